#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "stagebound/bounds.hpp"
#include "stagebound/logic.hpp"
#include "stagebound/protocol.hpp"

namespace stagebound {

using HeadSet = std::set<Head>;

// SCC ids per vertex (-1 for masked-out vertices); neighbours visited in sorted order.
std::vector<int> tarjan_scc(const std::vector<std::vector<int>>& adj, const std::vector<bool>& mask);

struct TransformationGraph {
    struct Generator {
        Transition rule;
        std::vector<std::pair<StateId, StateId>> edges;
    };
    std::vector<bool> vertex;
    std::vector<Generator> gens;               // non-disabled non-idle rules
    std::vector<std::vector<int>> adj;         // sorted, unique
    std::vector<int> scc;
    bool same_scc(StateId a, StateId b) const { return scc[a] == scc[b]; }
    // States whose SCC has an edge into another SCC.
    std::vector<StateId> non_bottom() const;
};

enum class Mode { None, NuDisabled, NuEnabled, Neither, NoJ, ISome, INone, IOther };
const char* mode_label(Mode m);

struct CaseAnalysis {
    Valuation nu;
    Valuation pi_nu;
    HeadSet t_parent;
    std::optional<int> stable;
    bool dead = false;
    TransformationGraph graph;
    HeadSet exp, j, t_nu, k, l;
    std::vector<StateId> i_states, u_states;
    Mode mode = Mode::None;
    bool fast = false, very_fast = false;
};

enum class StageKind { Internal, Stable, Dead, Exhausted };
const char* kind_label(StageKind k);

struct Stage {
    int id = 0;
    int parent = -1;
    int depth = 0;
    Formula phi;
    Valuation pi;
    HeadSet t;
    StageKind kind = StageKind::Internal;
    std::optional<int> consensus;
    Bound bound = Bound::Zero;  // incoming edge
    std::shared_ptr<const CaseAnalysis> analysis;
    std::vector<int> children;
};

struct Limits {
    int max_stages = 100000;
    double timeout_seconds = 1000;
};

enum class BuildStatus { Complete, StageLimit, Timeout };

struct StageGraph {
    std::vector<Stage> stages;
    BuildStatus status = BuildStatus::Complete;
    double seconds = 0;
    bool complete() const { return status == BuildStatus::Complete; }
};

// Shared helper: implication of xi(h) by pi & Psi_T, memoised per head.
class DisabledOracle {
public:
    DisabledOracle(const Protocol& p, const Valuation& pi, const HeadSet& t);
    bool operator()(Head h);
    const Formula& base() const { return base_; }

private:
    const Protocol& p_;
    Formula base_;
    std::map<Head, bool> memo_;
};

Formula heads_formula(const Protocol& p, const HeadSet& hs);

Stage initial_stage(const Protocol& p);
Valuation compute_pi_nu(const Protocol& p, const Valuation& pi, const HeadSet& t, const Valuation& nu);
std::optional<int> is_stable(const Protocol& p, const Valuation& pi_nu, const HeadSet& t);
bool is_dead(const Protocol& p, const Valuation& pi_nu, const HeadSet& t);
TransformationGraph build_transformation_graph(const Protocol& p, const Valuation& pi_nu, const HeadSet& t);
HeadSet compute_exp(const TransformationGraph& g);
HeadSet compute_j(const Protocol& p, const Valuation& pi_nu, const HeadSet& t, const HeadSet& exp);
Mode classify_nu_mode(const Protocol& p, const Valuation& nu, const HeadSet& j);
HeadSet compute_k(const TransformationGraph& g, const HeadSet& j);
std::pair<std::vector<StateId>, HeadSet> compute_i_and_l(const TransformationGraph& g, const Valuation& pi_nu);
// Formula used for a right-hand side CD in the K and L disjunctions.
Formula rhs_presence(const Protocol& p, Head cd);

// Child for nu, before the redundancy test.
Stage build_child(const Protocol& p, const Stage& s, const Valuation& nu);
bool is_redundant(const StageGraph& g, int parent, const Stage& child);
StageGraph build_stage_graph(const Protocol& p, const Limits& limits = {});

}  // namespace stagebound
