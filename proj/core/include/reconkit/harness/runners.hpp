#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reconkit/backends/clients.hpp"
#include "reconkit/describer/describer.hpp"
#include "reconkit/harness/dataset.hpp"
#include "reconkit/harness/metric_set.hpp"
#include "reconkit/harness/report.hpp"
#include "reconkit/recon/recon_score.hpp"
#include "reconkit/stats/preferences.hpp"

namespace reconkit::harness {

/// Population standard deviation.
double population_sigma(std::span<const double> values);

/// tau_b and tau_c (x100) of every metric against the human rankings. Images
/// and references come from `dataset`. Rows keep the metric order (reference
/// based first); a failing metric gets "-" cells and a note.
ExperimentReport run_preference_correlation(const std::vector<stats::PreferenceInstance>& prefs,
                                            const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                            stats::FlattenMode mode = stats::FlattenMode::Global);

struct PerturbationVariants {
    std::string paraphrased = "paraphrased";
    std::string perturbed = "perturbed";
};

/// Mean (corpus-level for BLEU) score of the paraphrased and perturbed
/// variants against the references, and their difference. Entries missing a
/// variant are skipped and counted.
ExperimentReport run_perturbation_study(const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                        const PerturbationVariants& variants = {});

/// Per-bucket means over the S/M/L variants and the population sigma of the
/// bucket means.
ExperimentReport run_length_robustness(const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                       const std::vector<std::string>& buckets = {"S", "M", "L"});

struct AblationOptions {
    std::vector<int> n_list{1, 2, 4, 6, 8, 10};
    double temperature = describer::kDefaultTemperature;
    std::size_t parallelism = 1;
};

/// Mean selected ReconScore (x100) per N and dataset, plus a Total column
/// (sum over datasets). Each image's candidates are sampled once at max N;
/// smaller N select over a prefix of the same stream.
ExperimentReport run_candidate_ablation(const std::vector<DatasetManifest>& datasets, recon::ReconScorer& scorer,
                                        const AblationOptions& options = {});

/// Mean ReconScore (x100) of every caption source under every image embedder,
/// each embedder's ranking of the sources, and pairwise tau_b between the
/// embedders' source means.
ExperimentReport run_encoder_ablation(const DatasetManifest& dataset,
                                      const std::vector<std::shared_ptr<backends::ImageEmbedder>>& embedders,
                                      const std::vector<std::string>& sources, const recon::EvaluationContext& base);

}  // namespace reconkit::harness
