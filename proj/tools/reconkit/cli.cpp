#include "reconkit/cli.hpp"

#include <pthread.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reconkit/annotation/server.hpp"
#include "reconkit/annotation/store.hpp"
#include "reconkit/backends/config.hpp"
#include "reconkit/describer/describer.hpp"
#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"
#include "reconkit/harness/dataset.hpp"
#include "reconkit/harness/prepare.hpp"
#include "reconkit/harness/runners.hpp"
#include "reconkit/recon/recon_score.hpp"
#include "reconkit/run_config.hpp"
#include "reconkit/text/corpus.hpp"

namespace reconkit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kUsage = R"(usage: reconkit <command> [options]

commands:
  score        ReconScore of one caption for one image
  describe     best-of-N captioning with ReconScore selection
  eval         reference-based metrics over a JSON Lines corpus
  experiment   run an experiment: preference-correlation, perturbation-study,
               length-robustness, candidate-ablation, encoder-ablation
  prepare      derive caption variants for a dataset manifest
  annotate     annotation service: serve, export

Run "reconkit <command> --help" for the options of a command.
)";

const std::vector<std::string> kCommands = {"score", "describe", "eval", "experiment", "prepare", "annotate"};
const std::vector<std::string> kExperiments = {"preference-correlation", "perturbation-study", "length-robustness",
                                               "candidate-ablation", "encoder-ablation"};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Removes a scratch directory on scope exit.
class ScratchDir {
public:
    ScratchDir() {
        SplitMix64 rng(seed_from(std::to_string(::getpid()) + "|" +
                                 std::to_string(std::chrono::steady_clock::now().time_since_epoch().count())));
        path_ = fs::temp_directory_path() / ("reconkit-" + std::to_string(rng.next()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// Flags shared by every command that talks to backends.
struct CommonFlags {
    std::string config;
    std::string backends;
    std::optional<std::int64_t> seed;
    std::optional<int> steps;
    std::optional<int> max_tokens;
    std::optional<int> max_dim;
    std::optional<std::size_t> parallelism;

    void add(CLI::App& app) {
        app.add_option("--config", config, "run config JSON (flags override it)");
        app.add_option("--backends", backends, "\"mock\" or a backend config JSON");
        app.add_option("--seed", seed, "T2I seed (root seed of the run)");
        app.add_option("--steps", steps, "T2I denoising steps");
        app.add_option("--max-tokens", max_tokens, "T2I prompt token limit");
        app.add_option("--max-dim", max_dim, "longest side of reconstructions in pixels");
        app.add_option("--parallelism", parallelism, "bounded fan-out for backend calls");
    }

    RunConfig resolve(std::optional<RunConfig> base = std::nullopt) const {
        RunConfig c = base ? *base : RunConfig{};
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw Error("invalid-config", "cannot open " + config);
            c.apply(json::parse(in, nullptr, true, false), fs::path(config).parent_path());
        }
        if (!backends.empty()) c.set_backends(backends);
        if (seed) c.params.seed = *seed;
        if (steps) c.params.steps = *steps;
        if (max_tokens) c.params.max_prompt_tokens = *max_tokens;
        if (max_dim) c.params.max_dim_px = *max_dim;
        if (parallelism) c.parallelism = *parallelism;
        c.params.validate();
        if (c.parallelism < 1) throw Error("invalid-config", "parallelism must be at least 1");
        return c;
    }
};

/// Backends, ledger, blobs and cache of one run rooted at a directory.
struct Runtime {
    std::shared_ptr<backends::CallLedger> ledger = std::make_shared<backends::CallLedger>();
    std::shared_ptr<BlobStore> blobs;
    std::shared_ptr<recon::ReconCache> cache;
    std::shared_ptr<backends::ModelClients> clients;
    std::shared_ptr<recon::ReconScorer> scorer;
    std::optional<backends::ReplaySource> replay;

    Runtime(const RunConfig& cfg, const fs::path& dir, std::optional<backends::ReplaySource> source,
            std::optional<fs::path> dump_dir = std::nullopt)
        : replay(std::move(source)) {
        fs::create_directories(dir);
        blobs = std::make_shared<BlobStore>(dir / "blobs");
        cache = std::make_shared<recon::ReconCache>(dir / "cache");
        clients = std::make_shared<backends::ModelClients>(backends::build_backends(cfg.backends, replay), ledger,
                                                           blobs);
        if (clients->backends().t2i && clients->backends().image_embedder) {
            recon::EvaluationContext ctx{clients, cfg.params, cache, cfg.parallelism, std::move(dump_dir)};
            scorer = std::make_shared<recon::ReconScorer>(std::move(ctx));
        }
    }

    recon::ReconScorer& require_scorer() const {
        if (!scorer) throw Error("invalid-config", "scoring needs t2i and image-embed backends");
        return *scorer;
    }

    void save(const RunConfig& cfg, const fs::path& dir) const {
        cache->compact();
        ledger->save(dir / "ledger.jsonl");
        std::ofstream out(dir / "config.json", std::ios::binary | std::ios::trunc);
        out << cfg.to_json().dump(2) << '\n';
        if (!out) throw Error("io", "cannot write " + (dir / "config.json").string());
    }
};

std::optional<backends::ReplaySource> open_replay(const std::string& run_dir) {
    if (run_dir.empty()) return std::nullopt;
    const fs::path dir = run_dir;
    if (!fs::exists(dir / "ledger.jsonl")) throw Error("replay-missing", "no ledger.jsonl in " + run_dir);
    return backends::ReplaySource{backends::CallLedger::load(dir / "ledger.jsonl"),
                                  std::make_shared<const BlobStore>(dir / "blobs")};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<int> parse_int_list(const std::vector<std::string>& items) {
    std::vector<int> out;
    for (const auto& item : items) {
        for (const auto& part : split_list(item)) {
            try {
                std::size_t used = 0;
                out.push_back(std::stoi(part, &used));
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw UsageError("not an integer: " + part);
            }
        }
    }
    return out;
}

std::vector<std::string> flatten_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items)
        for (auto& part : split_list(item)) out.push_back(std::move(part));
    return out;
}

// score ---------------------------------------------------------------------

int cmd_score(std::ostream& out, const CommonFlags& common, const std::string& image_path,
              const std::string& caption, const std::string& out_dir, const std::string& dump, bool clip) {
    const RunConfig cfg = common.resolve();
    std::optional<ScratchDir> scratch;
    fs::path dir = out_dir;
    if (out_dir.empty()) dir = scratch.emplace().path();
    std::optional<fs::path> dump_dir;
    if (!dump.empty()) dump_dir = fs::path(dump);
    Runtime rt(cfg, dir, std::nullopt, dump_dir);
    const ImageRecord image = load_image(image_path, fs::path(image_path).stem().string());
    json result = rt.require_scorer().score(image, caption).to_json();
    result["image_id"] = image.id;
    if (clip) result["clipscore"] = 100.0 * recon::clip_style_score(*rt.clients, image, caption);
    if (!out_dir.empty()) rt.save(cfg, dir);
    out << result.dump(2) << '\n';
    return 0;
}

// describe --------------------------------------------------------------------

int cmd_describe(std::ostream& out, const CommonFlags& common, const std::string& image_path,
                 const std::string& manifest_path, std::optional<int> n, std::optional<double> temperature,
                 const std::string& out_dir) {
    RunConfig cfg = common.resolve();
    if (n) cfg.n = *n;
    if (temperature) cfg.temperature = *temperature;
    if (image_path.empty() == manifest_path.empty()) throw UsageError("give exactly one of --image or --manifest");

    std::optional<ScratchDir> scratch;
    fs::path dir = out_dir;
    if (out_dir.empty()) dir = scratch.emplace().path();
    Runtime rt(cfg, dir, std::nullopt);
    const describer::DescribeOptions options{cfg.n, cfg.temperature, cfg.parallelism};

    auto one = [&](const ImageRecord& image) {
        json j = describer::describe(rt.require_scorer(), image, options).to_json();
        j["image_id"] = image.id;
        return j;
    };
    json result;
    if (!image_path.empty()) {
        result = one(load_image(image_path, fs::path(image_path).stem().string()));
    } else {
        const auto dataset = harness::load_dataset(manifest_path);
        result = json::array();
        for (const auto& entry : dataset.entries) result.push_back(one(dataset.load_image(entry)));
        cfg.experiment["manifest"] = manifest_path;
    }
    if (!out_dir.empty()) {
        rt.save(cfg, dir);
        std::ofstream(dir / "describe.json", std::ios::binary | std::ios::trunc) << result.dump(2) << '\n';
    }
    out << result.dump(2) << '\n';
    return 0;
}

// eval ------------------------------------------------------------------------

int cmd_eval(std::ostream& out, const std::string& corpus_path, const std::string& metrics,
             const std::string& level, bool smoothing, const std::string& format) {
    const auto records = text::load_corpus(corpus_path);
    harness::MetricContext ctx;
    ctx.smooth_sentence_bleu = smoothing;
    auto set = harness::make_metrics(split_list(metrics), ctx);
    std::vector<harness::MetricItem> items;
    for (const auto& r : records) items.push_back({ImageRecord{}, r.candidate, r.references});

    harness::ExperimentReport report;
    report.experiment = "eval";
    report.columns = {"Score"};
    report.config = {{"corpus", corpus_path}, {"metrics", split_list(metrics)}, {"bleu_level", level},
                     {"smoothing", smoothing}};
    report.instances = json::array();
    for (const auto& r : records) report.instances.push_back({{"id", r.id}, {"scores", json::object()}});
    for (auto& metric : set) {
        if (metric.kind != harness::MetricKind::ReferenceBased)
            throw Error("unknown-metric", metric.id + " needs images; use experiment instead");
        if (level == "sentence") metric.corpus = nullptr;
        harness::ReportRow row{"", metric.name, {std::nullopt}, metric.note};
        if (metric.available) {
            const auto scores = metric.score(items);
            try {
                row.values[0] = harness::aggregate(metric, items, scores);
            } catch (const Error& e) {
                row.note = e.what();
            }
            if (scores.failures() > 0 && row.note.empty()) row.note = scores.first_error();
            for (std::size_t i = 0; i < records.size(); ++i)
                report.instances[i]["scores"][metric.id] =
                    scores.values[i] ? json(*scores.values[i]) : json(nullptr);
        }
        report.rows.push_back(std::move(row));
    }
    if (format == "md")
        out << report.to_markdown();
    else
        out << report.to_json().dump(2) << '\n';
    return 0;
}

// experiment --------------------------------------------------------------------

struct ExperimentFlags {
    std::string name;
    std::string out_dir;
    std::string replay;
    std::vector<std::string> datasets;
    std::string preferences;
    std::vector<std::string> metrics;
    std::vector<std::string> n_list;
    std::string grouping;
    std::vector<std::string> buckets;
    std::vector<std::string> sources;
    std::vector<std::string> embedders;
    std::string paraphrased;
    std::string perturbed;
    std::optional<double> temperature;
};

json experiment_settings(const RunConfig& base, const ExperimentFlags& f) {
    json e = base.experiment;
    e["name"] = f.name;
    if (!f.datasets.empty()) e["datasets"] = f.datasets;
    if (!f.preferences.empty()) e["preferences"] = f.preferences;
    if (!f.metrics.empty()) e["metrics"] = flatten_list(f.metrics);
    if (!f.n_list.empty()) e["n_list"] = parse_int_list(f.n_list);
    if (!f.grouping.empty()) e["grouping"] = f.grouping;
    if (!f.buckets.empty()) e["buckets"] = flatten_list(f.buckets);
    if (!f.sources.empty()) e["sources"] = flatten_list(f.sources);
    if (!f.embedders.empty()) e["embedders"] = flatten_list(f.embedders);
    if (!f.paraphrased.empty()) e["variants"]["paraphrased"] = f.paraphrased;
    if (!f.perturbed.empty()) e["variants"]["perturbed"] = f.perturbed;

    // Materialize defaults so the snapshot is explicit.
    if (!e.contains("datasets")) e["datasets"] = json::array();
    if (f.name == "preference-correlation") {
        if (!e.contains("metrics")) e["metrics"] = harness::default_metric_names();
        if (!e.contains("grouping")) e["grouping"] = "global";
        if (!e.contains("preferences")) throw UsageError("preference-correlation needs --preferences");
    } else if (f.name == "perturbation-study" || f.name == "length-robustness") {
        if (!e.contains("metrics")) e["metrics"] = harness::default_metric_names();
        if (f.name == "perturbation-study") {
            if (!e.contains("variants")) e["variants"] = json::object();
            if (!e["variants"].contains("paraphrased")) e["variants"]["paraphrased"] = "paraphrased";
            if (!e["variants"].contains("perturbed")) e["variants"]["perturbed"] = "perturbed";
        } else if (!e.contains("buckets")) {
            e["buckets"] = {"S", "M", "L"};
        }
    } else if (f.name == "candidate-ablation") {
        if (!e.contains("n_list")) e["n_list"] = {1, 2, 4, 6, 8, 10};
    } else if (f.name == "encoder-ablation") {
        if (!e.contains("sources")) throw UsageError("encoder-ablation needs --sources");
    }
    if (e["datasets"].empty()) throw UsageError(f.name + " needs at least one --dataset");
    return e;
}

int cmd_experiment(std::ostream& out, const CommonFlags& common, const ExperimentFlags& f) {
    if (std::find(kExperiments.begin(), kExperiments.end(), f.name) == kExperiments.end())
        throw UsageError("unknown experiment '" + f.name + "'");
    if (f.out_dir.empty()) throw UsageError("experiment needs --out");

    std::optional<RunConfig> base;
    if (!f.replay.empty()) base = RunConfig::load(fs::path(f.replay) / "config.json");
    RunConfig cfg = common.resolve(base);
    if (f.temperature) cfg.temperature = *f.temperature;
    cfg.experiment = experiment_settings(cfg, f);
    const json& e = cfg.experiment;

    const fs::path dir = f.out_dir;
    Runtime rt(cfg, dir, open_replay(f.replay));

    std::vector<harness::DatasetManifest> datasets;
    for (const auto& d : e["datasets"]) datasets.push_back(harness::load_dataset(d.get<std::string>()));

    harness::MetricContext mctx{rt.scorer, rt.clients, cfg.parallelism};
    harness::ExperimentReport report;
    if (f.name == "preference-correlation") {
        const auto prefs = stats::load_preferences(e["preferences"].get<std::string>());
        const std::string grouping = e["grouping"].get<std::string>();
        if (grouping != "global" && grouping != "per-instance")
            throw UsageError("grouping must be global or per-instance");
        report = harness::run_preference_correlation(
            prefs, datasets.front(), harness::make_metrics(e["metrics"].get<std::vector<std::string>>(), mctx),
            grouping == "global" ? stats::FlattenMode::Global : stats::FlattenMode::PerInstance);
    } else if (f.name == "perturbation-study") {
        harness::PerturbationVariants v{e["variants"]["paraphrased"].get<std::string>(),
                                        e["variants"]["perturbed"].get<std::string>()};
        report = harness::run_perturbation_study(
            datasets.front(), harness::make_metrics(e["metrics"].get<std::vector<std::string>>(), mctx), v);
    } else if (f.name == "length-robustness") {
        report = harness::run_length_robustness(
            datasets.front(), harness::make_metrics(e["metrics"].get<std::vector<std::string>>(), mctx),
            e["buckets"].get<std::vector<std::string>>());
    } else if (f.name == "candidate-ablation") {
        harness::AblationOptions options{e["n_list"].get<std::vector<int>>(), cfg.temperature, cfg.parallelism};
        report = harness::run_candidate_ablation(datasets, rt.require_scorer(), options);
    } else {
        std::vector<std::shared_ptr<backends::ImageEmbedder>> embedders;
        const auto wanted = e.value("embedders", std::vector<std::string>{});
        for (const auto& spec : cfg.backends.all(backends::Role::ImageEmbed)) {
            if (!wanted.empty() &&
                std::find(wanted.begin(), wanted.end(), spec.descriptor.model_id) == wanted.end())
                continue;
            embedders.push_back(backends::build_image_embedder(spec, rt.replay));
        }
        report = harness::run_encoder_ablation(datasets.front(), embedders,
                                               e["sources"].get<std::vector<std::string>>(),
                                               rt.require_scorer().context());
    }
    report.config = {{"run", cfg.to_json()}, {"runner", report.config}};
    harness::emit_report(report, dir);
    rt.save(cfg, dir);
    out << report.to_markdown();
    return 0;
}

// prepare ---------------------------------------------------------------------

int cmd_prepare(std::ostream& out, const CommonFlags& common, const std::string& manifest,
                const std::vector<std::string>& variants, const std::string& out_manifest, double temperature,
                bool overwrite, const std::string& run_dir) {
    RunConfig cfg = common.resolve();
    auto names = flatten_list(variants);
    if (names.empty()) names = harness::known_variants();
    cfg.experiment = {{"name", "prepare"}, {"manifest", manifest}, {"variants", names},
                      {"temperature", temperature}};
    std::optional<ScratchDir> scratch;
    fs::path dir = run_dir;
    if (run_dir.empty()) dir = scratch.emplace().path();
    Runtime rt(cfg, dir, std::nullopt);
    const auto dataset = harness::load_dataset(manifest);
    const auto prepared = harness::prepare_variants(dataset, *rt.clients, names, temperature, overwrite);
    harness::save_dataset(out_manifest, prepared);
    if (!run_dir.empty()) rt.save(cfg, dir);
    out << json{{"manifest", out_manifest}, {"entries", prepared.entries.size()}, {"variants", names}}.dump()
        << '\n';
    return 0;
}

// annotate ----------------------------------------------------------------------

std::shared_ptr<annotation::AnnotationStore> open_store(const std::string& store_dir, const std::string& pool,
                                                        const harness::DatasetManifest& dataset,
                                                        const annotation::ImageIndex& index) {
    return std::make_shared<annotation::AnnotationStore>(store_dir, dataset.name,
                                                         stats::load_preferences(pool, false), index.urls);
}

int cmd_annotate_serve(std::ostream& out, const std::string& pool, const std::string& manifest,
                       const std::string& store_dir, const std::string& host, int port,
                       const std::string& static_dir) {
    const auto dataset = harness::load_dataset(manifest);
    auto index = annotation::index_images(dataset);
    auto store = open_store(store_dir, pool, dataset, index);
    annotation::ServerOptions options{host, port, std::nullopt};
    if (!static_dir.empty()) options.static_dir = fs::path(static_dir);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    annotation::AnnotationServer server(store, std::move(index), options);
    const int bound = server.bind();
    out << json{{"listening", host + ":" + std::to_string(bound)}, {"store", store_dir}}.dump() << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.serve();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

int cmd_annotate_export(std::ostream& out, const std::string& pool, const std::string& manifest,
                        const std::string& store_dir, const std::string& out_path) {
    const auto dataset = harness::load_dataset(manifest);
    auto store = open_store(store_dir, pool, dataset, annotation::index_images(dataset));
    const auto prefs = store->export_preferences();
    if (out_path.empty()) {
        for (const auto& p : prefs) out << stats::to_json(p).dump() << '\n';
    } else {
        stats::save_preferences(out_path, prefs);
        out << json{{"exported", prefs.size()}, {"path", out_path}}.dump() << '\n';
    }
    return 0;
}

int report_error(std::ostream& err, const std::string& code, const std::string& message, int status) {
    err << json{{"error", code}, {"message", message}}.dump() << '\n';
    return status;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty() || (args[0] != "--help" && args[0] != "-h" &&
                         std::find(kCommands.begin(), kCommands.end(), args[0]) == kCommands.end())) {
        err << kUsage;
        if (!args.empty()) report_error(err, "unknown-command", "unknown command '" + args[0] + "'", 2);
        return 2;
    }
    if (args[0] == "--help" || args[0] == "-h") {
        out << kUsage;
        return 0;
    }

    CLI::App app{"reconkit", "reconkit"};
    app.require_subcommand(1);

    CommonFlags common;
    std::function<int()> run;

    auto* score = app.add_subcommand("score", "ReconScore of one caption for one image");
    std::string image, caption, out_dir, dump;
    bool clip = false;
    common.add(*score);
    score->add_option("--image", image, "image file (PNG or PPM)")->required();
    score->add_option("--caption", caption, "caption text")->required();
    score->add_option("--out", out_dir, "run directory (config, ledger, cache, blobs)");
    score->add_option("--dump-images", dump, "write reconstructions here");
    score->add_flag("--clip", clip, "also report the CLIP-style score");
    score->callback([&] { run = [&] { return cmd_score(out, common, image, caption, out_dir, dump, clip); }; });

    auto* describe = app.add_subcommand("describe", "best-of-N captioning");
    std::string manifest;
    std::optional<int> n;
    std::optional<double> temperature;
    common.add(*describe);
    describe->add_option("--image", image, "image file");
    describe->add_option("--manifest", manifest, "dataset manifest");
    describe->add_option("--n", n, "candidates per image (default 10)");
    describe->add_option("--temperature", temperature, "sampling temperature (default 0.8)");
    describe->add_option("--out", out_dir, "run directory");
    describe->callback([&] {
        run = [&] { return cmd_describe(out, common, image, manifest, n, temperature, out_dir); };
    });

    auto* eval = app.add_subcommand("eval", "reference-based metrics over a corpus");
    std::string corpus, metrics = "bleu,meteor,rouge-l,cider-d", level = "corpus", format = "json";
    bool smoothing = false;
    eval->add_option("--corpus", corpus, "JSON Lines {id, candidate, references}")->required();
    eval->add_option("--metrics", metrics, "comma-separated metric names")->capture_default_str();
    eval->add_option("--bleu-level", level, "corpus or sentence")
        ->check(CLI::IsMember({"corpus", "sentence"}))
        ->capture_default_str();
    eval->add_flag("--smoothing", smoothing, "add-epsilon smoothing for sentence-level BLEU");
    eval->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md"}))->capture_default_str();
    eval->callback([&] { run = [&] { return cmd_eval(out, corpus, metrics, level, smoothing, format); }; });

    auto* experiment = app.add_subcommand("experiment", "run a harness experiment");
    ExperimentFlags ef;
    common.add(*experiment);
    experiment->add_option("name", ef.name, "experiment name")->required();
    experiment->add_option("--out", ef.out_dir, "run directory")->required();
    experiment->add_option("--replay", ef.replay, "answer every backend call from this run directory");
    experiment->add_option("--dataset", ef.datasets, "dataset manifest (repeatable)");
    experiment->add_option("--preferences", ef.preferences, "ranked preference JSON Lines");
    experiment->add_option("--metrics", ef.metrics, "comma-separated metric names");
    experiment->add_option("--n,--n-list", ef.n_list, "candidate counts, e.g. 1,2,4");
    experiment->add_option("--grouping", ef.grouping, "global or per-instance");
    experiment->add_option("--buckets", ef.buckets, "length variant names (default S,M,L)");
    experiment->add_option("--sources", ef.sources, "caption-source variant names");
    experiment->add_option("--embedders", ef.embedders, "image-embed model ids (default all configured)");
    experiment->add_option("--paraphrased", ef.paraphrased, "variant name of paraphrased captions");
    experiment->add_option("--perturbed", ef.perturbed, "variant name of perturbed captions");
    experiment->add_option("--temperature", ef.temperature, "sampling temperature");
    experiment->callback([&] { run = [&] { return cmd_experiment(out, common, ef); }; });

    auto* prepare = app.add_subcommand("prepare", "derive caption variants for a manifest");
    std::vector<std::string> variants;
    std::string out_manifest, run_dir;
    double prep_temperature = 0.0;
    bool overwrite = false;
    common.add(*prepare);
    prepare->add_option("--manifest", manifest, "input manifest")->required();
    prepare->add_option("--variants", variants, "paraphrased, perturbed, S, M, L (default all)");
    prepare->add_option("--out", out_manifest, "output manifest")->required();
    prepare->add_option("--temperature", prep_temperature, "completion temperature")->capture_default_str();
    prepare->add_flag("--overwrite", overwrite, "replace existing variants");
    prepare->add_option("--run-dir", run_dir, "keep config and ledger here");
    prepare->callback([&] {
        run = [&] {
            return cmd_prepare(out, common, manifest, variants, out_manifest, prep_temperature, overwrite, run_dir);
        };
    });

    auto* annotate = app.add_subcommand("annotate", "double-blind ranking service");
    annotate->require_subcommand(1);
    std::string pool, store_dir = "annotations", host = "127.0.0.1", static_dir, export_path;
    int port = 8080;
    auto* serve = annotate->add_subcommand("serve", "serve the ranking API and UI assets");
    serve->add_option("--pool", pool, "unranked preference JSON Lines")->required();
    serve->add_option("--dataset", manifest, "manifest with the pool's images")->required();
    serve->add_option("--store", store_dir, "session log directory")->capture_default_str();
    serve->add_option("--host", host, "bind address")->envname("RECONKIT_ANNOTATE_HOST")->capture_default_str();
    serve->add_option("--port", port, "port (0 = any)")->envname("RECONKIT_ANNOTATE_PORT")->capture_default_str();
    serve->add_option("--static", static_dir, "UI asset directory")->envname("RECONKIT_ANNOTATE_STATIC");
    serve->callback([&] {
        run = [&] { return cmd_annotate_serve(out, pool, manifest, store_dir, host, port, static_dir); };
    });
    auto* exporter = annotate->add_subcommand("export", "export completed rankings");
    exporter->add_option("--pool", pool, "unranked preference JSON Lines")->required();
    exporter->add_option("--dataset", manifest, "manifest with the pool's images")->required();
    exporter->add_option("--store", store_dir, "session log directory")->capture_default_str();
    exporter->add_option("--out", export_path, "output JSON Lines (default stdout)");
    exporter->callback([&] {
        run = [&] { return cmd_annotate_export(out, pool, manifest, store_dir, export_path); };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report_error(err, "usage", e.what(), 2);
    }

    try {
        return run ? run() : 2;
    } catch (const UsageError& e) {
        return report_error(err, "usage", e.what(), 2);
    } catch (const Error& e) {
        return report_error(err, e.code(), e.detail(), 1);
    } catch (const nlohmann::json::exception& e) {
        return report_error(err, "invalid-json", e.what(), 1);
    } catch (const std::exception& e) {
        return report_error(err, "internal", e.what(), 1);
    }
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace reconkit::cli
