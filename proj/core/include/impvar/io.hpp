#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace impvar {

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Output directory written under a temporary name and renamed into place
/// on commit(). An existing target is only replaced when `force` is set.
class StagedDirectory {
public:
    StagedDirectory(std::filesystem::path target, bool force);
    ~StagedDirectory();
    StagedDirectory(const StagedDirectory&) = delete;
    StagedDirectory& operator=(const StagedDirectory&) = delete;

    const std::filesystem::path& staging() const noexcept { return staging_; }
    std::filesystem::path file(const std::string& name) const { return staging_ / name; }
    void write(const std::string& name, std::string_view content) const;
    void commit();

private:
    std::filesystem::path target_, staging_;
    bool force_ = false;
    bool committed_ = false;
};

/// Thrown when an output path exists and overwriting was not requested.
class OutputExists : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, std::string_view content, bool force);

}  // namespace impvar
