#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "impvar/problem.hpp"

namespace impvar {

inline constexpr int kProblemFormatVersion = 1;

/// Parses the versioned problem text format (see docs/problem-format.md).
/// Throws SpecError with a line number on malformed input.
ProblemSpec parse_problem_text(std::string_view text);

struct LoadedProblem {
    ProblemSpec spec;
    std::string text;
    std::string path;
};

LoadedProblem load_problem_file(const std::filesystem::path& path);

/// The bundled two-impulse example, verbatim.
const std::string& example4_text();
ProblemSpec example4_spec();

}  // namespace impvar
