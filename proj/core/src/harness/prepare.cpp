#include "reconkit/harness/prepare.hpp"

#include "reconkit/error.hpp"

namespace reconkit::harness {

VariantRecipe variant_recipe(std::string_view name) {
    if (name == "paraphrased")
        return {"paraphrased",
                "Paraphrase the following remote sensing image caption. Keep every object, attribute and spatial "
                "relation, but change the wording and sentence structure. Output only the rewritten caption."};
    if (name == "perturbed")
        return {"perturbed",
                "Extract 10 semantic triplets (subject, relation, object) from the following remote sensing image "
                "caption. Then rewrite the caption with minimal wording changes so that the objects, attributes or "
                "relations of those triplets become factually wrong. Output only the rewritten caption."};
    if (name == "S")
        return {"S",
                "Rewrite the following remote sensing image caption as a short description of about 18 words with "
                "the same content. Output only the caption."};
    if (name == "M")
        return {"M",
                "Rewrite the following remote sensing image caption as a description of about 55 words with the "
                "same content. Output only the caption."};
    if (name == "L")
        return {"L",
                "Rewrite the following remote sensing image caption as a detailed description of about 170 words "
                "with the same content, elaborating only on what it already states. Output only the caption."};
    throw Error("unknown-variant", "no recipe for variant '" + std::string(name) + "'");
}

std::vector<std::string> known_variants() { return {"paraphrased", "perturbed", "S", "M", "L"}; }

std::string variant_prompt(const VariantRecipe& recipe, std::string_view caption) {
    return recipe.instruction + "\nInput: " + std::string(caption);
}

DatasetManifest prepare_variants(const DatasetManifest& dataset, backends::ModelClients& clients,
                                 const std::vector<std::string>& variants, double temperature, bool overwrite) {
    std::vector<VariantRecipe> recipes;
    for (const auto& v : variants) recipes.push_back(variant_recipe(v));
    DatasetManifest out = dataset;
    for (auto& entry : out.entries) {
        if (entry.references.empty()) continue;
        for (const auto& recipe : recipes) {
            if (!overwrite && entry.variants.count(recipe.name)) continue;
            entry.variants[recipe.name] = clients.complete_text(variant_prompt(recipe, entry.references.front()),
                                                                temperature, 0);
        }
    }
    return out;
}

}  // namespace reconkit::harness
