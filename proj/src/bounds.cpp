#include "stagebound/bounds.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "stagebound/stagegraph.hpp"

namespace stagebound {

std::string bound_label(Bound b) {
    switch (b) {
        case Bound::Zero: return "0";
        case Bound::Quadratic: return "n^2";
        case Bound::QuasiQuadratic: return "n^2 log n";
        case Bound::Cubic: return "n^3";
        case Bound::PolyUnknown: return "n^O(1)";
        case Bound::Exponential: return "exp(n)";
    }
    return "?";
}

std::string bound_big_o(Bound b) {
    switch (b) {
        case Bound::Zero: return "0";
        case Bound::Quadratic: return "O(n^2)";
        case Bound::QuasiQuadratic: return "O(n^2·log n)";
        case Bound::Cubic: return "O(n^3)";
        case Bound::PolyUnknown: return "n^O(1)";
        case Bound::Exponential: return "exp(n)";
    }
    return "?";
}

std::string parallel_time(Bound b) {
    switch (b) {
        case Bound::Zero: return "0";
        case Bound::Quadratic: return "O(n)";
        case Bound::QuasiQuadratic: return "O(n·log n)";
        case Bound::Cubic: return "O(n^2)";
        case Bound::PolyUnknown: return "n^O(1)";
        case Bound::Exponential: return "exp(n)";
    }
    return "?";
}

std::string bound_key(Bound b) {
    switch (b) {
        case Bound::Zero: return "0";
        case Bound::Quadratic: return "n2";
        case Bound::QuasiQuadratic: return "n2logn";
        case Bound::Cubic: return "n3";
        case Bound::PolyUnknown: return "poly";
        case Bound::Exponential: return "exp";
    }
    return "?";
}

std::optional<Bound> parse_bound(const std::string& s) {
    for (Bound b : {Bound::Zero, Bound::Quadratic, Bound::QuasiQuadratic, Bound::Cubic, Bound::PolyUnknown,
                    Bound::Exponential})
        if (s == bound_key(b) || s == bound_label(b) || s == bound_big_o(b)) return b;
    return std::nullopt;
}

bool is_fast(const Protocol& p, const CaseAnalysis& ca) {
    Formula base = valuation_formula(ca.pi_nu) && heads_formula(p, ca.t_parent) && !heads_formula(p, ca.exp);
    for (StateId a : ca.u_states) {
        std::vector<Formula> alts;
        for (Head h : ca.exp)
            if (h.contains(a)) alts.push_back(!xi(p, h));
        if (!entails(base && Formula::present(a), Formula::disj(alts))) return false;
    }
    return true;
}

bool is_very_fast(const Protocol& p, const CaseAnalysis& ca) {
    const auto& g = ca.graph;
    std::vector<bool> in_u(p.num_states(), false);
    for (StateId a : ca.u_states) in_u[a] = true;
    DisabledOracle dis(p, ca.pi_nu, ca.t_parent);
    for (auto& r : p.non_idle()) {
        StateId a = r.lhs.a, b = r.lhs.b, c = r.rhs.a, d = r.rhs.b;
        if (!g.vertex[a] || !g.vertex[b] || !g.vertex[c] || !g.vertex[d]) continue;
        if (!in_u[a] && !in_u[b] && !in_u[c] && !in_u[d]) continue;
        if (dis(r.lhs)) continue;
        const auto& s = g.scc;
        bool separated = (s[c] != s[a] && s[a] != s[d]) && (s[c] != s[b] && s[b] != s[d]);
        if (!separated) return false;
    }
    return true;
}

Bound edge_bound(const Protocol&, const CaseAnalysis& ca) {
    if (ca.stable || ca.dead) return Bound::Zero;
    if (ca.exp.empty()) return Bound::Exponential;
    if (ca.j.empty()) return Bound::PolyUnknown;
    if (ca.very_fast) return Bound::Quadratic;
    if (ca.fast) return Bound::QuasiQuadratic;
    return Bound::Cubic;
}

std::string claim_label(Claim c) {
    switch (c) {
        case Claim::Certified: return "certified";
        case Claim::DeadTerminal: return "dead-terminal-present";
        case Claim::ExhaustedTerminal: return "exhausted-terminal-present";
        case Claim::Incomplete: return "incomplete";
    }
    return "?";
}

AnalysisReport aggregate(const Protocol& p, const StageGraph& g) {
    AnalysisReport r;
    r.protocol = p.name();
    r.num_states = p.num_states();
    r.num_transitions = p.explicit_count();
    r.stages = static_cast<int>(g.stages.size());
    r.seconds = g.seconds;
    for (auto& s : g.stages) {
        if (s.parent >= 0) r.overall = max_bound(r.overall, s.bound);
        r.depth = std::max(r.depth, s.depth);
        if (s.children.empty()) ++r.leaves;
        switch (s.kind) {
            case StageKind::Stable: ++r.stable; break;
            case StageKind::Dead: ++r.dead; break;
            case StageKind::Exhausted: ++r.exhausted; break;
            default: break;
        }
    }
    r.all_terminals_stable = r.dead == 0 && r.exhausted == 0;
    if (!g.complete())
        r.claim = Claim::Incomplete;
    else if (r.exhausted)
        r.claim = Claim::ExhaustedTerminal;
    else if (r.dead)
        r.claim = Claim::DeadTerminal;
    else
        r.claim = Claim::Certified;
    return r;
}

std::string report_text(const AnalysisReport& r) {
    std::ostringstream os;
    os << "bound: " << bound_big_o(r.overall) << "; stages: " << r.stages << "; " << claim_label(r.claim) << "\n";
    os << "note: parallel time " << parallel_time(r.overall) << " (interactions divided by n)\n";
    os << "protocol: " << r.protocol << " |Q|=" << r.num_states << " |T|=" << r.num_transitions
       << " depth=" << r.depth << " leaves=" << r.leaves << " stable=" << r.stable << " dead=" << r.dead
       << " exhausted=" << r.exhausted << "\n";
    return os.str();
}

std::string report_json(const AnalysisReport& r) {
    nlohmann::ordered_json j;
    j["protocol"] = r.protocol;
    j["states"] = r.num_states;
    j["transitions"] = r.num_transitions;
    j["bound"] = bound_key(r.overall);
    j["bound_text"] = bound_big_o(r.overall);
    j["claim"] = claim_label(r.claim);
    j["all_terminals_stable"] = r.all_terminals_stable;
    j["stages"] = r.stages;
    j["leaves"] = r.leaves;
    j["depth"] = r.depth;
    j["stable"] = r.stable;
    j["dead"] = r.dead;
    j["exhausted"] = r.exhausted;
    return j.dump(2);
}

std::string report_csv_header() { return "protocol,states,transitions,stages,bound,claim,seconds"; }

std::string report_csv_row(const AnalysisReport& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", r.seconds);
    std::ostringstream os;
    os << r.protocol << "," << r.num_states << "," << r.num_transitions << "," << r.stages << ","
       << bound_key(r.overall) << "," << claim_label(r.claim) << "," << secs;
    return os.str();
}

}  // namespace stagebound
