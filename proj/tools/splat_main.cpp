#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "splat/digest.hpp"
#include "splat/evolution.hpp"
#include "splat/explorer.hpp"
#include "splat/rts.hpp"
#include "splat/sampling.hpp"
#include "splat/workspace.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRegressions = 1;
constexpr int kExitToolError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw splat::Error("cannot read file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::string session_name(const std::string& command, const std::vector<std::string>& parts) {
    std::string blob = command;
    for (const auto& part : parts) blob += "\x1f" + part;
    return command + "-" + splat::digest_hex(blob).substr(0, 12);
}

json stats_json(const splat::CacheStats& stats) {
    return json{{"hits", stats.hits},
                {"misses", stats.misses},
                {"sat", stats.sat_count},
                {"unsat", stats.unsat_count},
                {"solver_calls", stats.solver_calls()}};
}

std::size_t verdict_mismatches(const std::vector<splat::RunRecord>& runs,
                               const splat::TestCase& test) {
    std::size_t mismatches = 0;
    for (const auto& record : runs)
        if (record.verdict.pass != test.expect_pass) ++mismatches;
    return mismatches;
}

json reduction_json(const splat::ReductionReport& report) {
    json per = json::object();
    for (const auto& [method, fraction] : report.per_method) per[method] = fraction;
    return json{{"per_method", per},
                {"average", report.average},
                {"bucket", splat::reduction_bucket(report.average)}};
}

void emit_tree(splat::Workspace& ws, const std::string& test,
               const std::vector<splat::RunRecord>& runs, const splat::FeatureModel& fm,
               splat::SatTrie& trie) {
    splat::ExplorationResult shaped;
    shaped.runs = runs;
    auto tree = splat::decision_tree(shaped, fm, trie);
    auto path = ws.tree_path(test);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw splat::Error("cannot write " + path.string());
    out << tree.to_dot();
}

struct CommonOpts {
    std::string model;
    std::string workspace;
    std::size_t bound = 100;
    unsigned jobs = 1;
    bool emit_trees = false;
    std::string format = "text";
};

splat::ChangeSet changes_between(const std::map<std::string, std::string>& old_digests,
                                 const std::map<std::string, std::string>& new_digests) {
    splat::ChangeSet changes;
    for (const auto& [name, digest] : old_digests) {
        auto it = new_digests.find(name);
        if (it == new_digests.end() || it->second != digest) changes.changed.insert(name);
    }
    for (const auto& [name, digest] : new_digests)
        if (!old_digests.count(name)) changes.changed.insert(name);
    return changes;
}

/// Change set from --old when given, from the workspace digest map otherwise.
splat::ChangeSet resolve_changes(const std::string& old_suite_path, const splat::FeatureModel& fm,
                                 const splat::Program& new_program, const splat::Workspace& ws) {
    if (!old_suite_path.empty()) {
        auto old_suite = splat::parse_suite(read_file(old_suite_path), fm);
        return splat::diff_methods(old_suite.program, new_program);
    }
    auto stored = ws.method_digests();
    if (stored.empty())
        throw splat::Error("no --old suite and the workspace has no stored method digests");
    return changes_between(stored, new_program.method_digests());
}

void require_workspace_model(const splat::Workspace& ws, const splat::FeatureModel& fm) {
    auto digest = ws.model_digest();
    if (!digest) throw splat::Error("workspace " + ws.dir().string() + " is not initialized");
    if (*digest != fm.digest())
        throw splat::Error("workspace was built against a different feature model");
}

void print_report(const json& report, const std::string& format, const std::string& summary) {
    if (format == "json")
        std::cout << report.dump(2) << "\n";
    else
        std::cout << summary;
}

int cmd_explore(const CommonOpts& opts, const std::string& suite_path) {
    Timer timer;
    auto fm = splat::FeatureModel::parse(read_file(opts.model));
    auto suite = splat::parse_suite(read_file(suite_path), fm);
    splat::Workspace ws(opts.workspace);

    auto trie = ws.load_trie(fm.digest());
    auto results = splat::explore_suite(fm, suite.program, suite.tests, opts.bound, trie, opts.jobs);

    ws.write_model_digest(fm.digest());
    ws.write_method_digests(suite.program.method_digests());

    json tests = json::object();
    std::size_t total_runs = 0;
    std::size_t total_covered = 0;
    std::size_t mismatches = 0;
    splat::CacheStats combined;
    std::map<std::string, std::set<std::string>> coverage;
    std::ostringstream summary;
    for (const auto& test : suite.tests) {
        const auto& result = results.at(test.name);
        ws.write_test_cache(test.name, splat::TestCache{result.runs, result.bounded});
        coverage[test.name] = {};
        for (const auto& record : result.runs)
            for (const auto& method : record.stack.methods()) coverage[test.name].insert(method);
        if (opts.emit_trees) emit_tree(ws, test.name, result.runs, fm, trie);

        std::size_t bad = verdict_mismatches(result.runs, test);
        mismatches += bad;
        total_runs += result.runs.size();
        total_covered += result.covered.size();
        combined.hits += result.stats.hits;
        combined.misses += result.stats.misses;
        combined.sat_count += result.stats.sat_count;
        combined.unsat_count += result.stats.unsat_count;
        tests[test.name] = json{{"runs", result.runs.size()},
                                {"covered_configurations", result.covered.size()},
                                {"paths", result.path_count()},
                                {"pruned_unsat", result.pruned_unsat},
                                {"bounded", result.bounded},
                                {"verdict_mismatches", bad},
                                {"reduction", reduction_json(
                                                  splat::reduction_report(result.runs, suite.program))}};
        summary << test.name << ": " << result.runs.size() << " runs, "
                << result.covered.size() << " configurations"
                << (result.bounded ? " (bounded)" : "")
                << (bad ? ", UNEXPECTED VERDICTS" : "") << "\n";
    }
    ws.write_coverage(coverage);
    ws.save_trie(trie, fm.digest());

    double confs_per_test =
        suite.tests.empty() ? 0.0 : static_cast<double>(total_covered) /
                                        static_cast<double>(suite.tests.size());
    json report{{"command", "explore"},
                {"model_digest", fm.digest()},
                {"bound", opts.bound},
                {"tests", tests},
                {"totals", json{{"tests", suite.tests.size()},
                                {"runs", total_runs},
                                {"covered_configurations", total_covered},
                                {"confs_per_test", confs_per_test},
                                {"verdict_mismatches", mismatches},
                                {"cache", stats_json(combined)}}}};
    auto session =
        session_name("explore", {fm.digest(), splat::digest_hex(read_file(suite_path)),
                                 std::to_string(opts.bound)});
    ws.write_report(session, report);

    std::ostringstream head;
    head << "explored " << suite.tests.size() << " tests: " << total_runs << " runs covering "
         << total_covered << " configurations (" << timer.ms() << " ms)\n";
    print_report(report, opts.format, head.str() + summary.str());
    return mismatches ? kExitRegressions : kExitOk;
}

int cmd_evolve(const CommonOpts& opts, const std::string& old_suite_path,
               const std::string& new_suite_path) {
    Timer timer;
    auto fm = splat::FeatureModel::parse(read_file(opts.model));
    auto suite = splat::parse_suite(read_file(new_suite_path), fm);
    splat::Workspace ws(opts.workspace);
    require_workspace_model(ws, fm);

    auto changes = resolve_changes(old_suite_path, fm, suite.program, ws);
    auto trie = ws.load_trie(fm.digest());

    json tests = json::object();
    std::size_t mismatches = 0;
    std::size_t refused = 0;
    std::map<std::string, std::set<std::string>> coverage = ws.coverage();
    std::ostringstream summary;
    for (const auto& test : suite.tests) {
        auto prior = ws.test_cache(test.name);
        json entry;
        if (prior && prior->bounded) {
            // RCS only re-explores complete decision trees; the stale cache
            // is kept untouched for a later full explore.
            ++refused;
            entry = json{{"classification", "refused-bounded"}};
            summary << test.name << ": refused (bounded prior exploration)\n";
            tests[test.name] = entry;
            continue;
        }
        auto outcome = splat::evo_splat(fm, suite.program, test, prior, changes, opts.bound, trie);
        ws.write_test_cache(test.name, splat::TestCache{outcome.merged, outcome.bounded});
        coverage[test.name] = {};
        for (const auto& record : outcome.merged)
            for (const auto& method : record.stack.methods()) coverage[test.name].insert(method);
        if (opts.emit_trees) emit_tree(ws, test.name, outcome.merged, fm, trie);

        std::string classification = outcome.runs_reexecuted == 0 ? "no-reexecution"
                                     : outcome.runs_retained == 0 ? "complete"
                                                                  : "partial";
        std::size_t bad = verdict_mismatches(outcome.merged, test);
        mismatches += bad;
        entry = json{{"classification", classification},
                     {"initial_run", outcome.initial_run},
                     {"drift_escalated", outcome.drift_escalated},
                     {"bounded", outcome.bounded},
                     {"runs_retained", outcome.runs_retained},
                     {"runs_reexecuted", outcome.runs_reexecuted},
                     {"paths_retained", outcome.paths_retained},
                     {"paths_reexecuted", outcome.paths_reexecuted},
                     {"subtrees_explored", outcome.subtrees_explored},
                     {"covered_configurations", outcome.covered.size()},
                     {"verdict_mismatches", bad},
                     {"reduction",
                      reduction_json(splat::reduction_report(outcome.merged, suite.program))},
                     {"cache", stats_json(outcome.stats)}};
        if (outcome.drift_escalated)
            summary << test.name << ": cached prefixes no longer reproducible, fully re-explored\n";
        summary << test.name << ": " << classification << ", re-executed "
                << outcome.paths_reexecuted << " paths, retained " << outcome.paths_retained
                << (bad ? ", UNEXPECTED VERDICTS" : "") << "\n";
        tests[test.name] = entry;
    }
    ws.write_method_digests(suite.program.method_digests());
    ws.write_coverage(coverage);
    ws.save_trie(trie, fm.digest());

    json changed = json::array();
    for (const auto& name : changes.changed) changed.push_back(name);
    json report{{"command", "evolve"},
                {"model_digest", fm.digest()},
                {"bound", opts.bound},
                {"changed_methods", changed},
                {"refused_tests", refused},
                {"tests", tests}};
    auto session =
        session_name("evolve", {fm.digest(), splat::digest_hex(read_file(new_suite_path)),
                                std::to_string(opts.bound)});
    ws.write_report(session, report);

    std::ostringstream head;
    head << "evolve over " << changes.changed.size() << " changed methods (" << timer.ms()
         << " ms)\n";
    print_report(report, opts.format, head.str() + summary.str());
    return mismatches ? kExitRegressions : kExitOk;
}

int cmd_rts(const CommonOpts& opts, const std::string& old_suite_path,
            const std::string& new_suite_path) {
    Timer timer;
    auto fm = splat::FeatureModel::parse(read_file(opts.model));
    auto suite = splat::parse_suite(read_file(new_suite_path), fm);
    splat::Workspace ws(opts.workspace);
    require_workspace_model(ws, fm);

    auto changes = resolve_changes(old_suite_path, fm, suite.program, ws);
    splat::CoverageMap coverage{ws.coverage()};
    std::map<std::string, splat::TestCache> prior;
    for (const auto& name : ws.cached_tests()) prior[name] = *ws.test_cache(name);

    auto trie = ws.load_trie(fm.digest());
    auto outcome =
        splat::run_rts(fm, suite.program, suite.tests, prior, coverage, changes, opts.bound, trie);

    std::size_t mismatches = 0;
    json tests = json::object();
    std::ostringstream summary;
    for (const auto& test : suite.tests) {
        const auto& per_test = outcome.tests.at(test.name);
        ws.write_test_cache(test.name, splat::TestCache{per_test.runs, per_test.bounded});
        std::size_t bad = per_test.selected ? verdict_mismatches(per_test.runs, test) : 0;
        mismatches += bad;
        tests[test.name] = json{{"selected", per_test.selected},
                                {"runs", per_test.runs.size()},
                                {"bounded", per_test.bounded},
                                {"verdict_changed", per_test.verdict_changed},
                                {"verdict_mismatches", bad}};
        summary << test.name << ": " << (per_test.selected ? "re-run" : "skipped") << ", "
                << per_test.runs.size() << " runs"
                << (per_test.verdict_changed ? ", verdicts changed" : "")
                << (bad ? ", UNEXPECTED VERDICTS" : "") << "\n";
    }
    ws.write_method_digests(suite.program.method_digests());
    ws.write_coverage(outcome.coverage.by_test);
    ws.save_trie(trie, fm.digest());

    json selected = json::array();
    for (const auto& name : outcome.selected) selected.push_back(name);
    json changed = json::array();
    for (const auto& name : changes.changed) changed.push_back(name);
    json report{{"command", "rts"},
                {"model_digest", fm.digest()},
                {"bound", opts.bound},
                {"changed_methods", changed},
                {"selected", selected},
                {"tests_executed_percent", outcome.selection_ratio * 100.0},
                {"tests", tests},
                {"cache", stats_json(outcome.stats)}};
    auto session = session_name("rts", {fm.digest(), splat::digest_hex(read_file(new_suite_path)),
                                        std::to_string(opts.bound)});
    ws.write_report(session, report);

    std::ostringstream head;
    head << "rts selected " << outcome.selected.size() << "/" << suite.tests.size() << " tests ("
         << outcome.selection_ratio * 100.0 << "%, " << timer.ms() << " ms)\n";
    print_report(report, opts.format, head.str() + summary.str());
    return mismatches ? kExitRegressions : kExitOk;
}

int cmd_sample_generate(const CommonOpts& opts, std::size_t strength, std::uint64_t seed) {
    Timer timer;
    auto fm = splat::FeatureModel::parse(read_file(opts.model));
    splat::Workspace ws(opts.workspace);

    auto trie = ws.load_trie(fm.digest());
    auto array = splat::generate_twise(fm, strength, seed, trie);
    auto verification = splat::verify_covering(fm, array, trie);
    if (!verification.complete()) throw splat::Error("generated array fails its covering check");

    auto csv = splat::array_to_csv(array, fm);
    auto path = ws.array_path(strength);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw splat::Error("cannot write " + path.string());
    out << csv;
    ws.save_trie(trie, fm.digest());

    if (opts.format == "csv")
        std::cout << csv;
    else if (opts.format == "json")
        std::cout << json{{"command", "sample-generate"},
                          {"strength", strength},
                          {"seed", seed},
                          {"rows", array.rows.size()},
                          {"path", path.string()}}
                         .dump(2)
                  << "\n";
    else
        std::cout << "strength-" << strength << " array with " << array.rows.size() << " rows -> "
                  << path.string() << " (" << timer.ms() << " ms)\n";
    return kExitOk;
}

int cmd_sample_run(const CommonOpts& opts, const std::string& old_suite_path,
                   const std::string& new_suite_path, std::size_t strength) {
    Timer timer;
    auto fm = splat::FeatureModel::parse(read_file(opts.model));
    auto suite = splat::parse_suite(read_file(new_suite_path), fm);
    splat::Workspace ws(opts.workspace);

    auto path = ws.array_path(strength);
    if (!std::filesystem::exists(path))
        throw splat::Error("no strength-" + std::to_string(strength) +
                           " array in the workspace; run sample generate first");
    auto array = splat::array_from_csv(read_file(path.string()), fm, strength);

    auto changes = resolve_changes(old_suite_path, fm, suite.program, ws);
    splat::CoverageMap coverage{ws.coverage()};
    auto outcome =
        splat::evo_sample_run(array, coverage, changes, suite.tests, suite.program, fm);

    std::size_t mismatches = 0;
    json tests = json::object();
    std::ostringstream summary;
    for (const auto& test : suite.tests) {
        auto it = outcome.verdicts.find(test.name);
        if (it == outcome.verdicts.end()) {
            tests[test.name] = json{{"selected", false}};
            summary << test.name << ": skipped\n";
            continue;
        }
        std::size_t bad = 0;
        for (const auto& verdict : it->second)
            if (verdict.pass != test.expect_pass) ++bad;
        mismatches += bad;
        tests[test.name] = json{{"selected", true},
                                {"rows", it->second.size()},
                                {"verdict_mismatches", bad}};
        summary << test.name << ": " << it->second.size() << " rows"
                << (bad ? ", UNEXPECTED VERDICTS" : "") << "\n";
    }

    json report{{"command", "sample-run"},
                {"strength", strength},
                {"rows_per_test", array.rows.size()},
                {"tests_executed_percent", outcome.selection_ratio * 100.0},
                {"executions", outcome.executions},
                {"tests", tests}};
    auto session = session_name("sample-run",
                                {fm.digest(), splat::digest_hex(read_file(new_suite_path)),
                                 std::to_string(strength)});
    ws.write_report(session, report);

    std::ostringstream head;
    head << "sample run executed " << outcome.executions << " configurations over "
         << outcome.selected.size() << "/" << suite.tests.size() << " tests (" << timer.ms()
         << " ms)\n";
    print_report(report, opts.format, head.str() + summary.str());
    return mismatches ? kExitRegressions : kExitOk;
}

int cmd_report(const std::string& workspace, const std::string& format) {
    splat::Workspace ws(workspace);
    auto sessions = ws.report_sessions();
    if (format == "json") {
        json all = json::object();
        for (const auto& session : sessions) all[session] = *ws.report(session);
        std::cout << all.dump(2) << "\n";
        return kExitOk;
    }
    if (sessions.empty()) {
        std::cout << "no reports in " << workspace << "\n";
        return kExitOk;
    }
    for (const auto& session : sessions) {
        auto report = ws.report(session);
        std::cout << session << ": " << (*report)["command"].get<std::string>() << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"configuration-aware regression testing over explicit feature models"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string suite_path, old_suite_path, new_suite_path;
    std::size_t strength = 2;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_model = true) {
        if (needs_model) cmd->add_option("--model", opts.model, "feature model file")->required();
        cmd->add_option("--workspace", opts.workspace, "workspace directory")->required();
        cmd->add_option("--format", opts.format, "output format")
            ->check(CLI::IsMember({"text", "json", "csv", "dot"}));
    };

    auto* explore = app.add_subcommand("explore", "explore every valid configuration per test");
    add_common(explore);
    explore->add_option("--suite", suite_path, "test suite file")->required();
    explore->add_option("--bound", opts.bound, "max executions per test")
        ->check(CLI::PositiveNumber);
    explore->add_option("--jobs", opts.jobs, "concurrent test explorations")
        ->check(CLI::PositiveNumber);
    explore->add_flag("--emit-tree", opts.emit_trees, "write decision trees as DOT files");

    auto* evolve = app.add_subcommand("evolve", "re-explore change-impacted decision subtrees");
    add_common(evolve);
    evolve->add_option("--old", old_suite_path, "previous suite version");
    evolve->add_option("--new", new_suite_path, "current suite version")->required();
    evolve->add_option("--bound", opts.bound, "max executions per subtree")
        ->check(CLI::PositiveNumber);
    evolve->add_flag("--emit-tree", opts.emit_trees, "write decision trees as DOT files");

    auto* rts = app.add_subcommand("rts", "re-run only change-impacted tests");
    add_common(rts);
    rts->add_option("--old", old_suite_path, "previous suite version");
    rts->add_option("--new", new_suite_path, "current suite version")->required();
    rts->add_option("--bound", opts.bound, "max executions per test")->check(CLI::PositiveNumber);

    auto* sample = app.add_subcommand("sample", "constraint-aware t-wise covering arrays");
    sample->require_subcommand(1);
    auto* generate = sample->add_subcommand("generate", "build and store a covering array");
    add_common(generate);
    generate->add_option("--strength", strength, "interaction strength t")
        ->check(CLI::PositiveNumber);
    generate->add_option("--seed", seed, "generation seed, recorded for provenance");
    auto* sample_run = sample->add_subcommand("run", "run impacted tests over a stored array");
    add_common(sample_run);
    sample_run->add_option("--old", old_suite_path, "previous suite version");
    sample_run->add_option("--new", new_suite_path, "current suite version")->required();
    sample_run->add_option("--strength", strength, "interaction strength t")
        ->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "list or dump stored session reports");
    report->add_option("--workspace", opts.workspace, "workspace directory")->required();
    report->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitToolError;
    }

    try {
        if (app.got_subcommand(explore)) return cmd_explore(opts, suite_path);
        if (app.got_subcommand(evolve)) return cmd_evolve(opts, old_suite_path, new_suite_path);
        if (app.got_subcommand(rts)) return cmd_rts(opts, old_suite_path, new_suite_path);
        if (app.got_subcommand(sample)) {
            if (sample->got_subcommand(generate)) return cmd_sample_generate(opts, strength, seed);
            return cmd_sample_run(opts, old_suite_path, new_suite_path, strength);
        }
        if (app.got_subcommand(report)) return cmd_report(opts.workspace, opts.format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitToolError;
    }
    return kExitToolError;
}
