#pragma once

#include <string_view>

// SHA-256 of the prompt strings, computed once from the published templates
// outside this code base. Any byte of drift in the wrappers breaks these.
namespace golden {

inline constexpr std::string_view kTaskPromptSha256 =
    "caa050fedebd875270dddfdb731e644d6c9632cefedc9fb882d200dfeb969dbc";

struct WrappedCase {
    std::string_view caption;
    std::string_view sha256;
};

inline constexpr WrappedCase kWrapped[] = {
    {"A harbor with boats.", "6f4a6a714b3974693fa5580ef64cbd785215d5d127cb7739da0b74f13ffe8ff2"},
    {"Runway.", "aaba98b8d8162e54ace1afb115949d20421c12897c46bb4b0f7b57502beef83c"},
    {"many boats are docked in a harbor next to a road",
     "7de8807ccaa7c9581dbf6a30339e2bd9fbe6a2804df8268503db643cca57c0d5"},
};

}  // namespace golden
