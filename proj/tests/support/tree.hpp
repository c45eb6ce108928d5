#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

namespace fixtures {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative path -> contents of every regular file under root.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = read_file(e.path());
    return out;
}

/// Empty when both trees hold the same files with the same bytes.
inline std::string tree_difference(const std::filesystem::path& a, const std::filesystem::path& b) {
    const auto ta = read_tree(a);
    const auto tb = read_tree(b);
    for (const auto& [k, v] : ta) {
        auto it = tb.find(k);
        if (it == tb.end()) return "only in first: " + k;
        if (it->second != v) return "differs: " + k;
    }
    for (const auto& [k, v] : tb)
        if (!ta.count(k)) return "only in second: " + k;
    return {};
}

}  // namespace fixtures
