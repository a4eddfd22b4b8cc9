#include <doctest.h>

#include "stagebound/corpus.hpp"
#include "stagebound/export.hpp"
#include "stagebound/verify.hpp"

using namespace stagebound;

TEST_SUITE("export") {
    TEST_CASE("json is deterministic") {
        for (auto& e : corpus::entries()) {
            auto p = e.build();
            CHECK(stage_graph_json(p, build_stage_graph(p)) == stage_graph_json(p, build_stage_graph(p)));
        }
    }

    TEST_CASE("json round trip") {
        auto p = corpus::majority_ex2();
        auto g = build_stage_graph(p);
        auto back = stage_graph_from_json(p, stage_graph_json(p, g));
        REQUIRE(back.stages.size() == g.stages.size());
        for (size_t i = 0; i < g.stages.size(); ++i) {
            CHECK(to_string(p, back.stages[i].phi) == to_string(p, g.stages[i].phi));
            CHECK(back.stages[i].pi == g.stages[i].pi);
            CHECK(back.stages[i].t == g.stages[i].t);
            CHECK(back.stages[i].kind == g.stages[i].kind);
            CHECK(back.stages[i].children == g.stages[i].children);
            CHECK(back.stages[i].bound == g.stages[i].bound);
        }
        CHECK(check_stage_graph(p, back, 4).violations.empty());
        CHECK_THROWS(stage_graph_from_json(p, "{"));
    }

    TEST_CASE("dot output") {
        auto p = corpus::majority_ex1();
        auto g = build_stage_graph(p);
        auto dot = stage_graph_dot(p, g);
        CHECK(dot.rfind("digraph", 0) == 0);
        CHECK(dot.find("s0 ->") != std::string::npos);
        CHECK(dot.find("exp") != std::string::npos);
    }
}
