#pragma once

#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "impvar/problem_file.hpp"

namespace impvar::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(IMPVAR_DATA_DIR) / name;
}

inline ProblemSpec load(const std::string& name) { return load_problem_file(data_path(name)).spec; }

/// Relative comparison |a - v| < tol max(|a|, |v|); exact zeros compare equal.
inline doctest::Approx rel(double v, double tol) {
    return doctest::Approx(v).epsilon(tol).scale(std::numeric_limits<double>::min());
}

/// Replaces the single occurrence of `from` in `text`.
inline std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    if (pos == std::string::npos || text.find(from, pos + 1) != std::string::npos)
        throw std::logic_error("replace_once: '" + from + "' not found exactly once");
    return text.replace(pos, from.size(), to);
}

/// The bundled example with some lines rewritten.
inline ProblemSpec example4_variant(std::initializer_list<std::pair<std::string, std::string>> edits) {
    std::string text = example4_text();
    for (const auto& [from, to] : edits) text = replace_once(text, from, to);
    return parse_problem_text(text);
}

/// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace impvar::test
