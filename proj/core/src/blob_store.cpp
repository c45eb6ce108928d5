#include "reconkit/blob_store.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <thread>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit {

BlobStore::BlobStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path BlobStore::path_of(const std::string& checksum) const { return root_ / checksum; }

bool BlobStore::contains(const std::string& checksum) const {
    return std::filesystem::exists(path_of(checksum));
}

std::string BlobStore::put(std::span<const std::uint8_t> bytes) {
    const std::string checksum = sha256_hex(bytes);
    const auto target = path_of(checksum);
    if (std::filesystem::exists(target)) return checksum;
    static std::atomic<unsigned> counter{0};
    const auto tmp = root_ / (".tmp-" + checksum + "-" +
                              std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
                              std::to_string(counter++));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io", "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("io", "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    return checksum;
}

std::optional<std::vector<std::uint8_t>> BlobStore::get(const std::string& checksum) const {
    std::ifstream in(path_of(checksum), std::ios::binary);
    if (!in) return std::nullopt;
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace reconkit
