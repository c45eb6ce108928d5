#include "reconkit/annotation/store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit::annotation {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <typename T>
void shuffle(std::vector<T>& items, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

}  // namespace

json rubric() {
    return {{"instruction",
             "Rank the captions from 1 (best) to the number of captions (worst). Model names are hidden; judge the "
             "text against the image only."},
            {"criteria",
             {"Object completeness and factual accuracy", "Fine-grained attribute richness",
              "Spatial relationship fidelity"}}};
}

std::vector<int> display_permutation(const std::string& session_id, const std::string& task_id, int k) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, seed_from(session_id) ^ seed_from(task_id));
    return perm;
}

std::vector<int> deblind(const std::vector<int>& display_ranking, const std::vector<int>& perm) {
    if (display_ranking.size() != perm.size())
        throw Error("not-a-permutation", "expected " + std::to_string(perm.size()) + " ranks");
    stats::validate_ranking(display_ranking);
    std::vector<int> original(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) original[static_cast<std::size_t>(perm[j])] = display_ranking[j];
    return original;
}

json AnnotationSession::to_json() const {
    return {{"session_id", session_id},   {"dataset", dataset},       {"annotator_id", annotator_id},
            {"shuffle_seed", shuffle_seed}, {"task_order", task_order}, {"completed", completed},
            {"created_at", created_at},   {"updated_at", updated_at}};
}

json BlindTask::client_json() const {
    json cands = json::array();
    for (std::size_t j = 0; j < texts.size(); ++j) cands.push_back({{"position", j + 1}, {"text", texts[j]}});
    return {{"done", false},
            {"session_id", session_id},
            {"task_id", task_id},
            {"image_url", image_url},
            {"candidates", cands},
            {"rubric", rubric()},
            {"progress", {{"done", done}, {"total", total}}}};
}

void apply_event(AnnotationSession& s, const json& e) {
    const std::string type = e.at("type").get<std::string>();
    const std::string at = e.value("at", std::string());
    if (type == "created") {
        s.session_id = e.at("session_id").get<std::string>();
        s.dataset = e.at("dataset").get<std::string>();
        s.annotator_id = e.at("annotator_id").get<std::string>();
        s.shuffle_seed = e.at("seed").get<std::uint64_t>();
        s.task_order = e.at("task_order").get<std::vector<std::string>>();
        s.created_at = at;
    } else if (type == "ranked") {
        const std::string task = e.at("task_id").get<std::string>();
        TaskResult r;
        r.permutation = e.at("permutation").get<std::vector<int>>();
        r.display_ranking = e.at("display_ranking").get<std::vector<int>>();
        r.ranking = e.at("ranking").get<std::vector<int>>();
        r.completed_at = at;
        s.results[task] = std::move(r);
        s.completed.push_back(task);
    } else if (type == "adjudicated") {
        auto& r = s.results.at(e.at("task_id").get<std::string>());
        r.adjudicated = e.at("ranking").get<std::vector<int>>();
        r.adjudication_note = e.value("note", std::string());
    } else {
        throw Error("corrupt-log", "unknown event type " + type);
    }
    s.updated_at = at;
}

AnnotationStore::AnnotationStore(std::filesystem::path dir, std::string dataset_name,
                                 std::vector<stats::PreferenceInstance> pool,
                                 std::map<std::string, std::string> image_urls, Clock clock)
    : dir_(std::move(dir)),
      dataset_(std::move(dataset_name)),
      pool_(std::move(pool)),
      image_urls_(std::move(image_urls)),
      clock_(clock ? std::move(clock) : Clock(utc_now)) {
    if (pool_.empty()) throw Error("empty-dataset", "annotation pool has no instances");
    for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (pool_[i].candidates.size() < 2)
            throw Error("nothing-to-rank", "instance " + pool_[i].image_id + " has fewer than two candidates");
        if (!index_.emplace(pool_[i].image_id, i).second)
            throw Error("duplicate-id", "duplicate image_id " + pool_[i].image_id);
    }
    const auto sessions_dir = dir_ / "sessions";
    std::filesystem::create_directories(sessions_dir);
    for (const auto& file : std::filesystem::directory_iterator(sessions_dir)) {
        if (file.path().extension() != ".jsonl") continue;
        auto slot = std::make_shared<Slot>();
        std::ifstream in(file.path());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                apply_event(slot->state, json::parse(line));
            } catch (const json::exception& e) {
                throw Error("corrupt-log", file.path().string() + ": " + e.what());
            }
        }
        if (!slot->state.session_id.empty()) sessions_.emplace(slot->state.session_id, std::move(slot));
    }
}

std::shared_ptr<AnnotationStore::Slot> AnnotationStore::slot(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error("unknown-session", "no session " + session_id);
    return it->second;
}

const stats::PreferenceInstance& AnnotationStore::instance(const std::string& task_id) const {
    auto it = index_.find(task_id);
    if (it == index_.end()) throw Error("unknown-task", "no task " + task_id);
    return pool_[it->second];
}

void AnnotationStore::append(const std::string& session_id, const json& event) const {
    const auto path = dir_ / "sessions" / (session_id + ".jsonl");
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error("io", "cannot append to " + path.string());
}

AnnotationSession AnnotationStore::create_session(const std::string& annotator_id, std::uint64_t shuffle_seed) {
    std::vector<std::string> order;
    for (const auto& p : pool_) order.push_back(p.image_id);
    shuffle(order, shuffle_seed);

    std::lock_guard lock(mutex_);
    std::string id;
    for (std::size_t n = sessions_.size();; ++n) {
        id = sha256_hex(dataset_ + "|" + annotator_id + "|" + std::to_string(shuffle_seed) + "|" + std::to_string(n))
                 .substr(0, 16);
        if (!sessions_.count(id)) break;
    }
    const json event = {{"type", "created"},     {"session_id", id},  {"dataset", dataset_},
                        {"annotator_id", annotator_id}, {"seed", shuffle_seed}, {"task_order", order},
                        {"at", clock_()}};
    auto s = std::make_shared<Slot>();
    apply_event(s->state, event);
    append(id, event);
    sessions_.emplace(id, s);
    return s->state;
}

std::optional<BlindTask> AnnotationStore::next_task(const std::string& session_id) const {
    auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    const auto& st = s->state;
    std::optional<BlindTask> out;
    for (const auto& task_id : st.task_order) {
        if (st.is_completed(task_id)) continue;
        const auto& inst = instance(task_id);
        BlindTask t;
        t.session_id = session_id;
        t.task_id = task_id;
        if (auto it = image_urls_.find(task_id); it != image_urls_.end()) t.image_url = it->second;
        t.permutation = display_permutation(session_id, task_id, static_cast<int>(inst.candidates.size()));
        for (int idx : t.permutation) t.texts.push_back(inst.candidates[static_cast<std::size_t>(idx)].text);
        t.done = st.completed.size();
        t.total = st.task_order.size();
        out = std::move(t);
        break;
    }
    return out;
}

std::vector<int> AnnotationStore::checked_deblind(const AnnotationSession& s, const std::string& task_id,
                                                 const std::vector<int>& display_ranking) const {
    if (std::find(s.task_order.begin(), s.task_order.end(), task_id) == s.task_order.end())
        throw Error("unknown-task", "no task " + task_id + " in session " + s.session_id);
    const auto& inst = instance(task_id);
    return deblind(display_ranking,
                   display_permutation(s.session_id, task_id, static_cast<int>(inst.candidates.size())));
}

AnnotationSession AnnotationStore::submit_ranking(const std::string& session_id, const std::string& task_id,
                                                  const std::vector<int>& display_ranking) {
    auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    const auto original = checked_deblind(s->state, task_id, display_ranking);
    if (s->state.is_completed(task_id)) throw Error("already-completed", "task " + task_id + " already ranked");
    const json event = {{"type", "ranked"},
                        {"task_id", task_id},
                        {"permutation", display_permutation(session_id, task_id,
                                                            static_cast<int>(display_ranking.size()))},
                        {"display_ranking", display_ranking},
                        {"ranking", original},
                        {"at", clock_()}};
    append(session_id, event);
    apply_event(s->state, event);
    return s->state;
}

AnnotationSession AnnotationStore::adjudicate(const std::string& session_id, const std::string& task_id,
                                              const std::vector<int>& display_ranking, const std::string& note) {
    auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    const auto original = checked_deblind(s->state, task_id, display_ranking);
    if (!s->state.is_completed(task_id)) throw Error("not-completed", "task " + task_id + " has no ranking yet");
    const json event = {{"type", "adjudicated"}, {"task_id", task_id}, {"display_ranking", display_ranking},
                        {"ranking", original},   {"note", note},       {"at", clock_()}};
    append(session_id, event);
    apply_event(s->state, event);
    return s->state;
}

AnnotationSession AnnotationStore::session(const std::string& session_id) const {
    auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    return s->state;
}

std::vector<std::string> AnnotationStore::session_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

std::vector<stats::PreferenceInstance> AnnotationStore::export_preferences(
    const std::vector<std::string>& session_ids) const {
    std::vector<std::string> ids = session_ids.empty() ? this->session_ids() : session_ids;
    std::sort(ids.begin(), ids.end());
    std::vector<stats::PreferenceInstance> out;
    for (const auto& id : ids) {
        const AnnotationSession s = session(id);
        for (const auto& task_id : s.task_order) {
            auto it = s.results.find(task_id);
            if (it == s.results.end()) continue;
            stats::PreferenceInstance p = instance(task_id);
            p.ranking = it->second.adjudicated.value_or(it->second.ranking);
            p.extra["annotator"] = s.annotator_id;
            p.extra["session_id"] = s.session_id;
            p.extra["adjudicated"] = it->second.adjudicated.has_value();
            out.push_back(std::move(p));
        }
    }
    if (out.empty()) throw Error("nothing-completed", "no completed tasks to export");
    return out;
}

}  // namespace reconkit::annotation
