#include "impvar/io.hpp"

#include <fstream>
#include <system_error>

#include <unistd.h>

namespace impvar {

namespace fs = std::filesystem;

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
    return out;
}

StagedDirectory::StagedDirectory(fs::path target, bool force) : target_(std::move(target)), force_(force) {
    if (target_.empty()) throw std::invalid_argument("output directory must not be empty");
    if (fs::exists(target_) && !force_)
        throw OutputExists("output '" + target_.string() + "' exists; pass --force to replace it");
    fs::path parent = target_.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    staging_ = target_;
    staging_ += ".partial-" + std::to_string(::getpid());
    fs::remove_all(staging_);
    fs::create_directory(staging_);
}

StagedDirectory::~StagedDirectory() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

void StagedDirectory::write(const std::string& name, std::string_view content) const {
    std::ofstream os(staging_ / name, std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("cannot write " + (staging_ / name).string());
}

void StagedDirectory::commit() {
    if (fs::exists(target_)) {
        if (!force_) throw OutputExists("output '" + target_.string() + "' appeared while running");
        fs::remove_all(target_);
    }
    fs::rename(staging_, target_);
    committed_ = true;
}

void write_file(const fs::path& path, std::string_view content, bool force) {
    if (fs::exists(path) && !force)
        throw OutputExists("'" + path.string() + "' exists; pass --force to replace it");
    fs::path tmp = path;
    tmp += ".partial-" + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace impvar
