#pragma once

#include <optional>
#include <string>

#include "stagebound/protocol.hpp"

namespace stagebound {

struct CaseAnalysis;
struct StageGraph;

// Asymptotic classes, ordered.
enum class Bound { Zero = 0, Quadratic, QuasiQuadratic, Cubic, PolyUnknown, Exponential };

inline Bound max_bound(Bound a, Bound b) { return a < b ? b : a; }
std::string bound_label(Bound b);     // "n^2 log n"
std::string bound_big_o(Bound b);     // "O(n^2 log n)"
std::string parallel_time(Bound b);   // class divided by n
std::string bound_key(Bound b);       // "n2logn"
std::optional<Bound> parse_bound(const std::string& s);

bool is_fast(const Protocol& p, const CaseAnalysis& ca);
bool is_very_fast(const Protocol& p, const CaseAnalysis& ca);
Bound edge_bound(const Protocol& p, const CaseAnalysis& ca);

enum class Claim { Certified, DeadTerminal, ExhaustedTerminal, Incomplete };
std::string claim_label(Claim c);

struct AnalysisReport {
    std::string protocol;
    int num_states = 0;
    int num_transitions = 0;
    Bound overall = Bound::Zero;
    Claim claim = Claim::Certified;
    bool all_terminals_stable = true;
    int stages = 0;
    int leaves = 0;
    int depth = 0;
    int stable = 0, dead = 0, exhausted = 0;
    double seconds = 0;
};

AnalysisReport aggregate(const Protocol& p, const StageGraph& g);
std::string report_text(const AnalysisReport& r);
std::string report_json(const AnalysisReport& r);
std::string report_csv_header();
std::string report_csv_row(const AnalysisReport& r);

}  // namespace stagebound
