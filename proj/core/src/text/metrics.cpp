#include "reconkit/text/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "reconkit/error.hpp"
#include "reconkit/text/stemmer.hpp"

namespace reconkit::text {

std::string_view metric_name(MetricId id) {
    switch (id) {
        case MetricId::Bleu1: return "BLEU-1";
        case MetricId::Bleu2: return "BLEU-2";
        case MetricId::Bleu3: return "BLEU-3";
        case MetricId::Bleu4: return "BLEU-4";
        case MetricId::Meteor: return "METEOR";
        case MetricId::RougeL: return "ROUGE-L";
        case MetricId::CiderD: return "CIDEr-D";
    }
    return "unknown";
}

EvalInstance make_instance(std::string id, std::string_view candidate,
                           std::span<const std::string> references) {
    EvalInstance inst{std::move(id), tokenize(candidate), {}};
    inst.references.reserve(references.size());
    for (const auto& r : references) inst.references.push_back(tokenize(r));
    return inst;
}

NgramCounts count_ngrams(std::span<const std::string> tokens, int n) {
    NgramCounts counts;
    const auto un = static_cast<std::size_t>(n);
    if (n <= 0 || tokens.size() < un) return counts;
    for (std::size_t i = 0; i + un <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
    return counts;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// ---------------------------------------------------------------- BLEU

namespace {

constexpr int kMaxBleuN = 4;

struct BleuStats {
    std::array<long long, kMaxBleuN> matches{};
    std::array<long long, kMaxBleuN> totals{};
    long long candidate_length = 0;
    long long reference_length = 0;

    BleuStats& operator+=(const BleuStats& o) {
        for (int n = 0; n < kMaxBleuN; ++n) {
            matches[n] += o.matches[n];
            totals[n] += o.totals[n];
        }
        candidate_length += o.candidate_length;
        reference_length += o.reference_length;
        return *this;
    }
};

// Closest reference length; ties go to the shorter reference.
long long closest_reference_length(long long c, const std::vector<TokenSequence>& refs) {
    long long best = -1;
    for (const auto& r : refs) {
        const auto len = static_cast<long long>(r.size());
        if (best < 0 || std::llabs(len - c) < std::llabs(best - c) ||
            (std::llabs(len - c) == std::llabs(best - c) && len < best))
            best = len;
    }
    return std::max(best, 0LL);
}

BleuStats bleu_stats(const EvalInstance& inst, int max_n) {
    BleuStats s;
    const auto& cand = inst.candidate.tokens;
    s.candidate_length = static_cast<long long>(cand.size());
    s.reference_length = closest_reference_length(s.candidate_length, inst.references);
    for (int n = 1; n <= max_n; ++n) {
        NgramCounts max_ref;
        for (const auto& ref : inst.references)
            for (const auto& [gram, count] : count_ngrams(ref.tokens, n)) {
                int& slot = max_ref[gram];
                slot = std::max(slot, count);
            }
        long long clipped = 0;
        for (const auto& [gram, count] : count_ngrams(cand, n)) {
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) clipped += std::min(count, it->second);
        }
        s.matches[n - 1] = clipped;
        s.totals[n - 1] = std::max<long long>(s.candidate_length - n + 1, 0);
    }
    return s;
}

double bleu_from_stats(const BleuStats& s, int max_n, bool smoothing) {
    if (s.candidate_length == 0) return 0.0;
    double log_sum = 0.0;
    for (int n = 0; n < max_n; ++n) {
        double p;
        if (s.matches[n] == 0) {
            if (!smoothing) return 0.0;
            p = kBleuSmoothingEpsilon / static_cast<double>(std::max<long long>(s.totals[n], 1));
        } else {
            p = static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
        }
        log_sum += std::log(p) / max_n;
    }
    const double c = static_cast<double>(s.candidate_length);
    const double r = static_cast<double>(s.reference_length);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return 100.0 * bp * std::exp(log_sum);
}

MetricId bleu_id(int n) {
    static constexpr std::array kIds{MetricId::Bleu1, MetricId::Bleu2, MetricId::Bleu3,
                                     MetricId::Bleu4};
    return kIds[static_cast<std::size_t>(n - 1)];
}

void require_references(const EvalInstance& inst) {
    if (inst.references.empty())
        throw Error("empty-references", "instance '" + inst.instance_id + "' has no references");
}

}  // namespace

MetricScore bleu(std::span<const EvalInstance> instances, const BleuOptions& options) {
    if (options.max_n < 1 || options.max_n > kMaxBleuN)
        throw Error("invalid-argument", "BLEU max_n must be in 1..4");
    MetricScore out{bleu_id(options.max_n), 0.0, {}};
    BleuStats pooled;
    const bool sentence = options.level == BleuLevel::Sentence;
    for (const auto& inst : instances) {
        require_references(inst);
        if (sentence && inst.candidate.empty())
            throw Error("empty-candidate",
                        "sentence-level BLEU needs a non-empty candidate ('" + inst.instance_id + "')");
        const BleuStats s = bleu_stats(inst, options.max_n);
        pooled += s;
        out.per_instance.push_back(bleu_from_stats(s, options.max_n, sentence && options.smoothing));
    }
    if (sentence) {
        out.value = out.per_instance.empty()
                        ? 0.0
                        : std::accumulate(out.per_instance.begin(), out.per_instance.end(), 0.0) /
                              static_cast<double>(out.per_instance.size());
    } else {
        out.value = bleu_from_stats(pooled, options.max_n, false);
    }
    return out;
}

// ---------------------------------------------------------------- METEOR

namespace {

struct Alignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

Alignment align(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
    std::vector<int> cand_to_ref(cand.size(), -1);
    std::vector<bool> ref_used(ref.size(), false);
    auto stage = [&](auto&& equal) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (cand_to_ref[i] >= 0) continue;
            for (std::size_t j = 0; j < ref.size(); ++j) {
                if (!ref_used[j] && equal(i, j)) {
                    cand_to_ref[i] = static_cast<int>(j);
                    ref_used[j] = true;
                    break;
                }
            }
        }
    };
    stage([&](std::size_t i, std::size_t j) { return cand[i] == ref[j]; });

    std::vector<std::string> cand_stems, ref_stems;
    cand_stems.reserve(cand.size());
    ref_stems.reserve(ref.size());
    for (const auto& t : cand) cand_stems.push_back(porter_stem(t));
    for (const auto& t : ref) ref_stems.push_back(porter_stem(t));
    stage([&](std::size_t i, std::size_t j) { return cand_stems[i] == ref_stems[j]; });

    Alignment a;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (cand_to_ref[i] < 0) continue;
        ++a.matches;
        const bool continues = i > 0 && cand_to_ref[i - 1] >= 0 && cand_to_ref[i - 1] + 1 == cand_to_ref[i];
        if (!continues) ++a.chunks;
    }
    return a;
}

double meteor_single(const TokenSequence& cand, const TokenSequence& ref) {
    const Alignment a = align(cand.tokens, ref.tokens);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(cand.size());
    const double r = m / static_cast<double>(ref.size());
    const double f_mean = 10.0 * p * r / (r + 9.0 * p);
    const double frag = static_cast<double>(a.chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return 100.0 * f_mean * (1.0 - penalty);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MetricScore meteor(const EvalInstance& instance) {
    require_references(instance);
    if (instance.candidate.empty())
        throw Error("empty-candidate", "METEOR needs a non-empty candidate ('" + instance.instance_id + "')");
    double best = 0.0;
    for (const auto& ref : instance.references) {
        if (ref.empty())
            throw Error("empty-reference", "METEOR needs non-empty references ('" + instance.instance_id + "')");
        best = std::max(best, meteor_single(instance.candidate, ref));
    }
    return {MetricId::Meteor, best, {best}};
}

MetricScore meteor(std::span<const EvalInstance> instances) {
    MetricScore out{MetricId::Meteor, 0.0, {}};
    for (const auto& inst : instances) out.per_instance.push_back(meteor(inst).value);
    out.value = mean_of(out.per_instance);
    return out;
}

// ---------------------------------------------------------------- ROUGE-L

MetricScore rouge_l(const EvalInstance& instance) {
    require_references(instance);
    if (instance.candidate.empty())
        throw Error("empty-candidate", "ROUGE-L needs a non-empty candidate ('" + instance.instance_id + "')");
    constexpr double beta2 = kRougeBeta * kRougeBeta;
    double best = 0.0;
    for (const auto& ref : instance.references) {
        if (ref.empty()) continue;
        const auto lcs = static_cast<double>(lcs_length(instance.candidate.tokens, ref.tokens));
        if (lcs == 0.0) continue;
        const double r = lcs / static_cast<double>(ref.size());
        const double p = lcs / static_cast<double>(instance.candidate.size());
        best = std::max(best, (1.0 + beta2) * r * p / (r + beta2 * p));
    }
    return {MetricId::RougeL, 100.0 * best, {100.0 * best}};
}

MetricScore rouge_l(std::span<const EvalInstance> instances) {
    MetricScore out{MetricId::RougeL, 0.0, {}};
    for (const auto& inst : instances) out.per_instance.push_back(rouge_l(inst).value);
    out.value = mean_of(out.per_instance);
    return out;
}

// ---------------------------------------------------------------- CIDEr-D

namespace {

struct TfIdfVector {
    std::array<std::map<std::vector<std::string>, double>, CiderD::kMaxN> weights;
    std::array<double, CiderD::kMaxN> norms{};
    std::size_t length = 0;
};

}  // namespace

CiderD::CiderD(std::span<const std::vector<TokenSequence>> reference_sets)
    : corpus_size_(reference_sets.size()) {
    if (corpus_size_ < 2)
        throw Error("idf-degenerate", "CIDEr-D needs at least 2 reference sets, got " +
                                          std::to_string(corpus_size_));
    log_corpus_size_ = std::log(static_cast<double>(corpus_size_));
    for (const auto& refs : reference_sets) {
        std::set<std::vector<std::string>> seen;
        for (const auto& ref : refs)
            for (int n = 1; n <= kMaxN; ++n)
                for (auto& [gram, count] : count_ngrams(ref.tokens, n)) seen.insert(gram);
        for (const auto& gram : seen) document_frequency_[gram] += 1.0;
    }
}

double CiderD::score(const TokenSequence& candidate, std::span<const TokenSequence> references) const {
    if (references.empty()) throw Error("empty-references", "CIDEr-D needs at least one reference");
    auto vectorize = [&](const TokenSequence& seq) {
        TfIdfVector v;
        v.length = seq.size();
        for (int n = 1; n <= kMaxN; ++n) {
            double norm2 = 0.0;
            for (const auto& [gram, tf] : count_ngrams(seq.tokens, n)) {
                auto it = document_frequency_.find(gram);
                const double df = it == document_frequency_.end() ? 0.0 : it->second;
                const double w = static_cast<double>(tf) * (log_corpus_size_ - std::log(std::max(1.0, df)));
                v.weights[static_cast<std::size_t>(n - 1)].emplace(gram, w);
                norm2 += w * w;
            }
            v.norms[static_cast<std::size_t>(n - 1)] = std::sqrt(norm2);
        }
        return v;
    };

    const TfIdfVector hyp = vectorize(candidate);
    std::array<double, kMaxN> per_n{};
    for (const auto& ref_seq : references) {
        const TfIdfVector ref = vectorize(ref_seq);
        const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
        const double length_penalty = std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
        for (std::size_t n = 0; n < kMaxN; ++n) {
            double dot = 0.0;
            for (const auto& [gram, w_hyp] : hyp.weights[n]) {
                auto it = ref.weights[n].find(gram);
                if (it == ref.weights[n].end()) continue;
                dot += std::min(w_hyp, it->second) * it->second;
            }
            if (hyp.norms[n] != 0.0 && ref.norms[n] != 0.0) dot /= hyp.norms[n] * ref.norms[n];
            per_n[n] += dot * length_penalty;
        }
    }
    double mean = 0.0;
    for (double v : per_n) mean += 10.0 * v / static_cast<double>(references.size());
    mean /= kMaxN;
    return 100.0 * mean;
}

MetricScore cider_d(std::span<const EvalInstance> instances) {
    std::vector<std::vector<TokenSequence>> sets;
    sets.reserve(instances.size());
    for (const auto& inst : instances) {
        require_references(inst);
        sets.push_back(inst.references);
    }
    const CiderD scorer(sets);
    MetricScore out{MetricId::CiderD, 0.0, {}};
    for (const auto& inst : instances) out.per_instance.push_back(scorer.score(inst.candidate, inst.references));
    out.value = mean_of(out.per_instance);
    return out;
}

}  // namespace reconkit::text
