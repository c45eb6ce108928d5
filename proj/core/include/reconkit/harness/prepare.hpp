#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "reconkit/backends/clients.hpp"
#include "reconkit/harness/dataset.hpp"

namespace reconkit::harness {

/// Instruction used to derive one variant kind from a source caption. The
/// source caption follows the instruction after a final "Input:" line.
struct VariantRecipe {
    std::string name;  // variant key written into the manifest
    std::string instruction;
};

/// Recipes for "paraphrased", "perturbed", "S", "M" and "L". Throws
/// "unknown-variant" for other names.
VariantRecipe variant_recipe(std::string_view name);
std::vector<std::string> known_variants();

/// The recipe applied to one caption.
std::string variant_prompt(const VariantRecipe& recipe, std::string_view caption);

/// Adds the requested variants to every entry, derived from its first
/// reference through the caption backend's text completion. Existing
/// variants are kept unless overwrite is set; entries without references are
/// left untouched.
DatasetManifest prepare_variants(const DatasetManifest& dataset, backends::ModelClients& clients,
                                 const std::vector<std::string>& variants, double temperature = 0.0,
                                 bool overwrite = false);

}  // namespace reconkit::harness
