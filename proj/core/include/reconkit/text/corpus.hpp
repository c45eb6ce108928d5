#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reconkit/text/metrics.hpp"

namespace reconkit::text {

struct CorpusRecord {
    std::string id;
    std::string candidate;
    std::vector<std::string> references;
};

/// Reads {"id", "candidate", "references"} JSON Lines. Blank lines are skipped.
/// Throws "unreadable-corpus", "empty-references" or "duplicate-id".
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

std::vector<EvalInstance> to_instances(const std::vector<CorpusRecord>& records);

}  // namespace reconkit::text
