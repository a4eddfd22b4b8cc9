#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <gmpxx.h>

#include "stagebound/logic.hpp"
#include "stagebound/protocol.hpp"
#include "stagebound/stagegraph.hpp"

namespace stagebound {

class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReachGraph {
    std::vector<Config> nodes;
    std::unordered_map<Config, int, ConfigHash> index;
    // successor node -> probability; self-loops included
    std::vector<std::vector<std::pair<int, mpq_class>>> succ;
    int root = 0;

    size_t size() const { return nodes.size(); }
    std::optional<int> find(const Config& c) const;
};

using NodeSet = std::vector<bool>;

ReachGraph explore(const Protocol& p, const Config& c0, size_t cap = 1000000);

NodeSet satisfying(const Protocol& p, const ReachGraph& g, const Formula& f);
// Nodes all of whose successors (transitively) lie in `good`.
NodeSet box(const ReachGraph& g, const NodeSet& good);
// Nodes that reach `target` with probability one.
NodeSet diamond_as(const ReachGraph& g, const NodeSet& target);
bool holds_box(const Protocol& p, const ReachGraph& g, const Formula& f);
bool holds_diamond_as(const ReachGraph& g, const NodeSet& target);

// Stable nodes and, for each, its consensus output (-1 when not stable).
std::vector<int> stable_outputs(const Protocol& p, const ReachGraph& g);
NodeSet stable_set(const Protocol& p, const ReachGraph& g);

mpq_class expected_steps_exact(const ReachGraph& g, const NodeSet& target);
double expected_steps_float(const ReachGraph& g, const NodeSet& target);
// Exact below `exact_limit` nodes, floating point above.
double expected_steps(const ReachGraph& g, const NodeSet& target, size_t exact_limit = 5000);

struct SimResult {
    uint64_t trials = 0;
    uint64_t seed = 0;
    std::vector<uint64_t> steps;
    std::vector<int> outputs;  // consensus of the final configuration
    std::optional<double> mean;
    std::optional<double> variance;
    double stderr_mean() const;
};

struct SimOptions {
    uint64_t trials = 1000;
    uint64_t seed = 0;
    uint64_t step_cap = 100000000;
    int threads = 0;  // 0: STAGEBOUND_THREADS or hardware
    std::optional<Formula> target;  // default: stable configurations
};

SimResult simulate(const Protocol& p, const Config& c0, const SimOptions& opt);

int thread_budget();

std::vector<Config> initial_configurations(const Protocol& p, int n);

struct Violation {
    int size = 0;
    std::string config;
    int stage = 0;
    char condition = 'a';  // a: root membership, b: progress, s: stable stage not stable
    std::string detail;
};

struct CheckReport {
    std::vector<Violation> violations;
    int max_size_checked = 1;
    uint64_t configurations = 0;
    bool partial = false;
};

CheckReport check_stage_graph(const Protocol& p, const StageGraph& sg, int max_n, size_t cap = 1000000);

struct ScalingRow {
    int n = 0;
    std::string config;
    double expected = 0;
    bool exact = true;
};

// Worst expected interactions to stability over the initial configurations of each size.
std::vector<ScalingRow> scaling_sweep(const Protocol& p, const std::vector<int>& sizes);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace stagebound
