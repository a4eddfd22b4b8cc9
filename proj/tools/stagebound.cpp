// stagebound: stage-graph analysis of population protocols.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "stagebound/bounds.hpp"
#include "stagebound/corpus.hpp"
#include "stagebound/export.hpp"
#include "stagebound/stagegraph.hpp"
#include "stagebound/verify.hpp"

using namespace stagebound;

namespace {

enum Exit { kOk = 0, kParse = 1, kNotCertified = 2, kLimits = 3 };

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file path, or corpus:NAME for a bundled protocol.
Protocol load(const std::string& where) {
    if (where.rfind("corpus:", 0) == 0) {
        auto* e = corpus::find(where.substr(7));
        if (!e) throw LoadError("unknown corpus protocol '" + where.substr(7) + "'");
        return e->build();
    }
    std::ifstream in(where);
    if (!in) throw LoadError("cannot open " + where);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return load_protocol_text(ss.str());
    } catch (const ParseError& e) {
        throw LoadError(where + ": " + e.what());
    } catch (const std::exception& e) {
        throw LoadError(where + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

struct Common {
    int max_stages = 100000;
    double timeout = 1000;
    Limits limits() const { return {max_stages, timeout}; }
};

int cmd_analyze(const std::string& path, const Common& c, const std::string& dot, const std::string& json_path,
                const std::string& csv) {
    Protocol p = load(path);
    StageGraph g = build_stage_graph(p, c.limits());
    AnalysisReport r = aggregate(p, g);
    std::cout << report_text(r);
    if (!g.complete())
        std::cout << (g.status == BuildStatus::Timeout ? "limit: timeout\n" : "limit: stage limit\n");
    if (!dot.empty()) write_file(dot, stage_graph_dot(p, g));
    if (!json_path.empty()) write_file(json_path, stage_graph_json(p, g));
    if (!csv.empty()) write_file(csv, report_csv_header() + "\n" + report_csv_row(r) + "\n");
    if (!g.complete()) return kLimits;
    return r.claim == Claim::Certified ? kOk : kNotCertified;
}

int cmd_simulate(const std::string& path, const std::string& spec, uint64_t trials, uint64_t seed,
                 const std::string& csv) {
    Protocol p = load(path);
    Config c0;
    try {
        c0 = parse_config_spec(p, spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    }
    if (c0.size() < 2) {
        std::cerr << "error: configuration needs at least two agents\n";
        return kParse;
    }
    SimOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    SimResult r;
    try {
        r = simulate(p, c0, opt);
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kLimits;
    }
    std::cout << "config: " << c0.str(p) << "\n";
    std::cout << "trials: " << r.trials << "\nseed: " << r.seed << "\n";
    if (r.mean) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "mean interactions: %.6f\nstderr: %.6f\n", *r.mean, r.stderr_mean());
        std::cout << buf;
        std::map<int, uint64_t> hist;
        for (int o : r.outputs) ++hist[o];
        for (auto [o, n] : hist)
            std::cout << "consensus " << (o < 0 ? std::string("none") : std::to_string(o)) << ": " << n << "/"
                      << r.trials << "\n";
    }
    if (!csv.empty()) {
        std::ostringstream os;
        os << "trial,interactions,output\n";
        for (uint64_t t = 0; t < r.trials; ++t) os << t << "," << r.steps[t] << "," << r.outputs[t] << "\n";
        write_file(csv, os.str());
    }
    return kOk;
}

int cmd_check(const std::string& path, const Common& c, int max_n, const std::string& tree) {
    Protocol p = load(path);
    StageGraph g;
    if (!tree.empty()) {
        std::ifstream in(tree);
        if (!in) throw LoadError("cannot open " + tree);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            g = stage_graph_from_json(p, ss.str());
        } catch (const std::exception& e) {
            throw LoadError(tree + ": " + e.what());
        }
    } else {
        g = build_stage_graph(p, c.limits());
        if (!g.complete()) {
            std::cout << "stage tree incomplete (limits exceeded)\n";
            return kLimits;
        }
    }
    auto rep = check_stage_graph(p, g, max_n);
    for (auto& v : rep.violations)
        std::cout << "violation (" << v.condition << ") stage " << v.stage << " n=" << v.size << " from " << v.config
                  << ": " << v.detail << "\n";
    if (max_n < 2) {
        std::cout << "0 violations (vacuous)\n";
        return kOk;
    }
    std::cout << rep.violations.size() << " violations (sizes 2.." << rep.max_size_checked << ")\n";
    if (rep.partial) {
        std::cout << "partial: exploration cap reached at size " << rep.max_size_checked + 1 << "\n";
        return kLimits;
    }
    return rep.violations.empty() ? kOk : kNotCertified;
}

struct Expect {
    int stages;
    std::string bound;
};

std::map<std::string, Expect> read_expectations(const std::string& path) {
    std::map<std::string, Expect> m;
    if (path.empty()) {
        for (auto& e : corpus::entries()) m[e.name] = {e.our_stages.value_or(e.table_stages), bound_key(e.table_bound)};
        return m;
    }
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        if (f.size() < 3) throw LoadError(path + ": expected name,stages,bound");
        m[f[0]] = {std::stoi(f[1]), f[2]};
    }
    return m;
}

int cmd_bench(std::vector<std::string> names, const Common& c, const std::string& csv, bool diff,
              const std::string& diff_path) {
    std::vector<const corpus::Entry*> rows;
    if (names.empty())
        for (auto& e : corpus::entries()) rows.push_back(&e);
    for (auto& n : names) {
        auto* e = corpus::find(n);
        if (!e) throw LoadError("unknown corpus protocol '" + n + "'");
        rows.push_back(e);
    }
    std::map<std::string, Expect> expect;
    if (diff) expect = read_expectations(diff_path);

    std::vector<AnalysisReport> reports(rows.size());
    std::vector<char> timed_out(rows.size(), 0);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < rows.size();) {
            Protocol p = rows[i]->build();
            StageGraph g = build_stage_graph(p, c.limits());
            reports[i] = aggregate(p, g);
            timed_out[i] = !g.complete();
        }
    };
    int threads = std::min<int>(thread_budget(), static_cast<int>(rows.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, threads); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream os;
    os << report_csv_header();
    if (diff) os << ",expected_stages,expected_bound,status";
    os << "\n";
    int mismatches = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        auto& r = reports[i];
        if (timed_out[i]) {
            os << r.protocol << "," << r.num_states << "," << r.num_transitions << ",T/O,T/O,incomplete,"
               << r.seconds;
        } else {
            os << report_csv_row(r);
        }
        if (diff) {
            auto it = expect.find(rows[i]->name);
            if (it == expect.end()) {
                os << ",,,missing";
            } else {
                bool ok = !timed_out[i] && it->second.stages == r.stages && it->second.bound == bound_key(r.overall);
                if (!ok) ++mismatches;
                os << "," << it->second.stages << "," << it->second.bound << "," << (ok ? "ok" : "DIFF");
            }
        }
        os << "\n";
    }
    std::cout << os.str();
    if (!csv.empty()) write_file(csv, os.str());
    if (diff) {
        std::cout << mismatches << " mismatching rows\n";
        return mismatches ? kNotCertified : kOk;
    }
    return std::any_of(timed_out.begin(), timed_out.end(), [](char b) { return b != 0; }) ? kLimits : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stage-graph analysis of population protocols"};
    app.require_subcommand(1);
    Common common;
    std::string dot, json_path, csv, spec, tree, diff_path;
    std::string protocol;
    uint64_t trials = 1000, seed = 0;
    int max_n = 6;
    bool diff = false;
    std::vector<std::string> names;

    auto add_limits = [&](CLI::App* s) {
        s->add_option("--max-stages", common.max_stages, "Stage limit")->check(CLI::PositiveNumber);
        s->add_option("--timeout", common.timeout, "Time limit in seconds")->check(CLI::PositiveNumber);
    };

    auto* analyze = app.add_subcommand("analyze", "Build the stage tree and report a bound");
    analyze->add_option("protocol", protocol, "Protocol file or corpus:NAME")->required();
    analyze->add_option("--dot", dot, "Write the tree as Graphviz DOT");
    analyze->add_option("--json", json_path, "Write the tree as JSON");
    analyze->add_option("--csv", csv, "Write a one-row CSV report");
    add_limits(analyze);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo runs until a stable configuration");
    sim->add_option("protocol", protocol, "Protocol file or corpus:NAME")->required();
    sim->add_option("--config", spec, "Initial configuration, e.g. A=5,B=3")->required();
    sim->add_option("--trials", trials, "Number of runs");
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--csv", csv, "Write per-trial interaction counts");

    auto* check = app.add_subcommand("check", "Validate the stage tree on all small populations");
    check->add_option("protocol", protocol, "Protocol file or corpus:NAME")->required();
    check->add_option("--max-n", max_n, "Largest population size");
    check->add_option("--tree", tree, "Check a stage tree read from JSON instead of building one");
    add_limits(check);

    auto* bench = app.add_subcommand("bench", "Analyze the bundled corpus");
    bench->add_option("names", names, "Corpus protocols (default: all)");
    bench->add_option("--csv", csv, "Write the table as CSV");
    bench->add_option("--diff", diff_path, "Compare with an expected table (default: built-in); use --diff=PATH")
        ->expected(0, 1);
    add_limits(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kParse;
    }
    if (bench->count("--diff")) diff = true;

    try {
        if (*analyze) return cmd_analyze(protocol, common, dot, json_path, csv);
        if (*sim) return cmd_simulate(protocol, spec, trials, seed, csv);
        if (*check) return cmd_check(protocol, common, max_n, tree);
        if (*bench) return cmd_bench(names, common, csv, diff, diff_path);
    } catch (const LoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    }
    return kOk;
}
