#pragma once

#include <string>

#include "stagebound/bounds.hpp"
#include "stagebound/stagegraph.hpp"

namespace stagebound {

std::string stage_graph_dot(const Protocol& p, const StageGraph& g);
// Deterministic: no timings.
std::string stage_graph_json(const Protocol& p, const StageGraph& g);
// Reads the tree back (formulas, persistent parts, kinds, edges); case analyses are not restored.
StageGraph stage_graph_from_json(const Protocol& p, const std::string& text);

}  // namespace stagebound
