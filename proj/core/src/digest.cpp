#include "reconkit/digest.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>

#include "reconkit/error.hpp"

namespace reconkit {

namespace {

std::string to_hex(std::span<const unsigned char> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(bytes.data(), bytes.size(), md.data());
    return to_hex(md);
}

std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t seed_from(std::string_view text) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), md.data());
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | md[i];
    return seed;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                        static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text)
        if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
    if (clean.size() % 4 != 0) throw Error("bad-base64", "length not a multiple of 4");
    std::vector<std::uint8_t> out(3 * clean.size() / 4);
    const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                        static_cast<int>(clean.size()));
    if (written < 0) throw Error("bad-base64", "invalid characters");
    std::size_t size = static_cast<std::size_t>(written);
    // EVP_DecodeBlock counts padding bytes as output.
    if (!clean.empty() && clean.back() == '=') --size;
    if (clean.size() >= 2 && clean[clean.size() - 2] == '=') --size;
    out.resize(size);
    return out;
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
}

}  // namespace reconkit
