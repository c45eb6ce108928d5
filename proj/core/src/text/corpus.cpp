#include "reconkit/text/corpus.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "reconkit/error.hpp"

namespace reconkit::text {

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-corpus", "cannot open " + path.string());
    std::vector<CorpusRecord> records;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        CorpusRecord rec;
        try {
            const auto j = nlohmann::json::parse(line);
            rec.id = j.at("id").get<std::string>();
            rec.candidate = j.at("candidate").get<std::string>();
            rec.references = j.at("references").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("unreadable-corpus", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (rec.references.empty()) throw Error("empty-references", "instance '" + rec.id + "'");
        if (!ids.insert(rec.id).second) throw Error("duplicate-id", rec.id);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<EvalInstance> to_instances(const std::vector<CorpusRecord>& records) {
    std::vector<EvalInstance> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(make_instance(r.id, r.candidate, r.references));
    return out;
}

}  // namespace reconkit::text
