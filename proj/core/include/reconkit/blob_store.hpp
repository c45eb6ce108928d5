#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reconkit {

/// Directory of files named by the SHA-256 of their contents. Writes go
/// through a temporary file and rename, so concurrent puts of the same bytes
/// are safe.
class BlobStore {
public:
    explicit BlobStore(std::filesystem::path root);

    /// Stores bytes and returns their checksum. Existing blobs are not rewritten.
    std::string put(std::span<const std::uint8_t> bytes);
    std::optional<std::vector<std::uint8_t>> get(const std::string& checksum) const;
    bool contains(const std::string& checksum) const;
    std::filesystem::path path_of(const std::string& checksum) const;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
};

}  // namespace reconkit
