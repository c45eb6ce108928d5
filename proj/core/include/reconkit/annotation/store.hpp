#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/stats/preferences.hpp"

namespace reconkit::annotation {

/// Ranking instructions and criteria shown with every task.
nlohmann::json rubric();

/// Display order of one task: perm[j] is the original index of the
/// candidate shown at position j. Seeded by session and task id.
std::vector<int> display_permutation(const std::string& session_id, const std::string& task_id, int k);

/// Maps a ranking given in display order back to original candidate order:
/// original[perm[j]] = display[j].
std::vector<int> deblind(const std::vector<int>& display_ranking, const std::vector<int>& perm);

struct TaskResult {
    std::vector<int> permutation;
    std::vector<int> display_ranking;
    std::vector<int> ranking;  // original candidate order
    std::optional<std::vector<int>> adjudicated;
    std::string adjudication_note;
    std::string completed_at;
};

struct AnnotationSession {
    std::string session_id;
    std::string dataset;
    std::string annotator_id;
    std::uint64_t shuffle_seed = 0;
    std::vector<std::string> task_order;
    std::vector<std::string> completed;  // in completion order
    std::map<std::string, TaskResult> results;
    std::string created_at;
    std::string updated_at;

    bool is_completed(const std::string& task_id) const { return results.count(task_id) != 0; }
    nlohmann::json to_json() const;
};

/// A task as the annotator sees it. The permutation stays on the server;
/// client_json() carries only positions, texts, the image URL and the rubric.
struct BlindTask {
    std::string session_id;
    std::string task_id;
    std::string image_url;
    std::vector<std::string> texts;  // display order
    std::vector<int> permutation;
    std::size_t done = 0;
    std::size_t total = 0;

    nlohmann::json client_json() const;
};

/// Applies one log event to a session; events replayed in order rebuild it.
void apply_event(AnnotationSession& session, const nlohmann::json& event);

/// Sessions over a pool of unranked preference instances, persisted as one
/// append-only JSON Lines event log per session under dir/sessions. Task ids
/// are image ids. Writes to one session are serialized; sessions are
/// independent.
class AnnotationStore {
public:
    using Clock = std::function<std::string()>;

    /// image_urls maps image id to the URL the client loads it from. Throws
    /// "empty-dataset", "nothing-to-rank" (an instance with fewer than two
    /// candidates) or "duplicate-id".
    AnnotationStore(std::filesystem::path dir, std::string dataset_name, std::vector<stats::PreferenceInstance> pool,
                    std::map<std::string, std::string> image_urls = {}, Clock clock = {});

    AnnotationSession create_session(const std::string& annotator_id, std::uint64_t shuffle_seed);
    /// First uncompleted task, or nullopt when the session is done.
    std::optional<BlindTask> next_task(const std::string& session_id) const;
    /// Returns the updated session. Errors: "unknown-session", "unknown-task",
    /// "already-completed", "not-a-permutation".
    AnnotationSession submit_ranking(const std::string& session_id, const std::string& task_id,
                                     const std::vector<int>& display_ranking);
    /// Consensus correction of a completed task, in display order like the
    /// original submission. Throws "not-completed" for an open task.
    AnnotationSession adjudicate(const std::string& session_id, const std::string& task_id,
                                 const std::vector<int>& display_ranking, const std::string& note = {});

    AnnotationSession session(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;

    /// One instance per completed task per session (sessions by id, tasks in
    /// session order). Adjudicated tasks export the adjudicated ranking with
    /// "adjudicated": true. Throws "nothing-completed".
    std::vector<stats::PreferenceInstance> export_preferences(
        const std::vector<std::string>& session_ids = {}) const;

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::size_t pool_size() const noexcept { return pool_.size(); }

private:
    struct Slot {
        mutable std::mutex mutex;
        AnnotationSession state;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    const stats::PreferenceInstance& instance(const std::string& task_id) const;
    void append(const std::string& session_id, const nlohmann::json& event) const;
    std::vector<int> checked_deblind(const AnnotationSession& s, const std::string& task_id,
                                    const std::vector<int>& display_ranking) const;

    std::filesystem::path dir_;
    std::string dataset_;
    std::vector<stats::PreferenceInstance> pool_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::string> image_urls_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace reconkit::annotation
