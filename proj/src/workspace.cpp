#include "splat/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "splat/errors.hpp"

namespace splat {

using nlohmann::json;

json run_record_to_json(const RunRecord& record) {
    json stack = json::array();
    for (const auto& entry : record.stack.entries())
        stack.push_back({{"kind", entry.kind == ExplorationEntry::Kind::Method ? "method" : "feature"},
                         {"name", entry.name}});
    json state = json::object();
    for (const auto& [name, value] : record.state.bindings()) state[name] = value;
    return json{{"stack", stack},
                {"state", state},
                {"verdict", {{"pass", record.verdict.pass}, {"message", record.verdict.message}}},
                {"pruned", record.pruned}};
}

RunRecord run_record_from_json(const json& j) {
    RunRecord record;
    for (const auto& entry : j.at("stack")) {
        ExplorationEntry e;
        e.kind = entry.at("kind") == "method" ? ExplorationEntry::Kind::Method
                                              : ExplorationEntry::Kind::Feature;
        e.name = entry.at("name");
        record.stack.push(std::move(e));
    }
    for (const auto& [name, value] : j.at("state").items()) record.state.set(name, value.get<bool>());
    record.verdict.pass = j.at("verdict").at("pass");
    record.verdict.message = j.at("verdict").at("message");
    record.pruned = j.at("pruned");
    return record;
}

void Workspace::write_json(const std::filesystem::path& path, const json& j) const {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

std::optional<json> Workspace::read_json(const std::filesystem::path& path) const {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("corrupt workspace file " + path.string() + ": " + e.what());
    }
}

void Workspace::write_model_digest(const std::string& digest) {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / "model.digest", std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir_ / "model.digest").string());
    out << digest << "\n";
}

std::optional<std::string> Workspace::model_digest() const {
    std::ifstream in(dir_ / "model.digest");
    if (!in) return std::nullopt;
    std::string digest;
    in >> digest;
    return digest;
}

void Workspace::write_method_digests(const std::map<std::string, std::string>& digests) {
    write_json(dir_ / "methods.json", json(digests));
}

std::map<std::string, std::string> Workspace::method_digests() const {
    auto j = read_json(dir_ / "methods.json");
    if (!j) return {};
    return j->get<std::map<std::string, std::string>>();
}

void Workspace::write_test_cache(const std::string& test, const TestCache& cache) {
    json runs = json::array();
    for (const auto& record : cache.runs) runs.push_back(run_record_to_json(record));
    write_json(runs_dir() / (test + ".json"),
               json{{"test", test}, {"bounded", cache.bounded}, {"runs", runs}});
}

std::optional<TestCache> Workspace::test_cache(const std::string& test) const {
    auto j = read_json(runs_dir() / (test + ".json"));
    if (!j) return std::nullopt;
    TestCache cache;
    cache.bounded = j->at("bounded");
    for (const auto& record : j->at("runs")) cache.runs.push_back(run_record_from_json(record));
    return cache;
}

std::vector<std::string> Workspace::cached_tests() const {
    std::vector<std::string> tests;
    if (!std::filesystem::exists(runs_dir())) return tests;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir()))
        if (entry.path().extension() == ".json") tests.push_back(entry.path().stem().string());
    std::sort(tests.begin(), tests.end());
    return tests;
}

void Workspace::write_coverage(const std::map<std::string, std::set<std::string>>& by_test) {
    json j = json::object();
    for (const auto& [test, methods] : by_test)
        j[test] = std::vector<std::string>(methods.begin(), methods.end());
    write_json(dir_ / "coverage.json", j);
}

std::map<std::string, std::set<std::string>> Workspace::coverage() const {
    auto j = read_json(dir_ / "coverage.json");
    std::map<std::string, std::set<std::string>> out;
    if (!j) return out;
    for (const auto& [test, methods] : j->items())
        for (const auto& m : methods) out[test].insert(m.get<std::string>());
    return out;
}

SatTrie Workspace::load_trie(const std::string& model_digest, bool tolerate_corrupt) const {
    return SatTrie::load(dir_ / "trie.bin", model_digest, tolerate_corrupt);
}

void Workspace::save_trie(const SatTrie& trie, const std::string& model_digest) const {
    std::filesystem::create_directories(dir_);
    trie.persist(dir_ / "trie.bin", model_digest);
}

void Workspace::write_report(const std::string& session, const json& report) {
    write_json(reports_dir() / (session + ".json"), report);
}

std::optional<json> Workspace::report(const std::string& session) const {
    return read_json(reports_dir() / (session + ".json"));
}

std::vector<std::string> Workspace::report_sessions() const {
    std::vector<std::string> sessions;
    if (!std::filesystem::exists(reports_dir())) return sessions;
    for (const auto& entry : std::filesystem::directory_iterator(reports_dir()))
        if (entry.path().extension() == ".json") sessions.push_back(entry.path().stem().string());
    std::sort(sessions.begin(), sessions.end());
    return sessions;
}

std::filesystem::path Workspace::tree_path(const std::string& test) const {
    return dir_ / "trees" / (test + ".dot");
}

std::filesystem::path Workspace::array_path(std::size_t strength) const {
    return dir_ / ("array-t" + std::to_string(strength) + ".csv");
}

}  // namespace splat
