#include <doctest.h>

#include "stagebound/corpus.hpp"
#include "stagebound/verify.hpp"

using namespace stagebound;

TEST_SUITE("verify") {
    TEST_CASE("reachability of a small configuration") {
        auto p = corpus::majority_ex1();
        auto g = explore(p, parse_config_spec(p, "A=1,B=1"));
        CHECK(g.size() == 3);
        double total = 0;
        for (auto& row : g.succ) {
            mpq_class s = 0;
            for (auto& [w, pr] : row) s += pr;
            CHECK(s == 1);
            total += 1;
        }
        CHECK(total == 3);
        auto q = parse_protocol("states: A B\ninputs: x -> A\noutput1: B\ntransitions:\n  A A -> A B\n  A B -> B B\n");
        CHECK(explore(q, parse_config_spec(q, "A=3")).size() <= 4);
        CHECK_THROWS_AS(explore(corpus::majority_ex2(), parse_config_spec(corpus::majority_ex2(), "A=20,B=20"), 10),
                        ResourceError);
    }

    TEST_CASE("box and diamond") {
        auto p = corpus::majority_ex1();
        auto g = explore(p, parse_config_spec(p, "a=1,b=1"));
        CHECK(holds_box(p, g, parse_formula(p, "!A & !B")));
        auto h = explore(p, parse_config_spec(p, "A=1,B=1"));
        CHECK_FALSE(holds_box(p, h, parse_formula(p, "A")));
        CHECK(holds_diamond_as(h, stable_set(p, h)));
        NodeSet none(h.size());
        CHECK_FALSE(holds_diamond_as(h, none));
    }

    TEST_CASE("stable set") {
        auto p = corpus::majority_ex1();
        auto g = explore(p, parse_config_spec(p, "A=1,B=1"));
        auto outs = stable_outputs(p, g);
        CHECK(outs[g.root] == -1);
        CHECK(outs[*g.find(parse_config_spec(p, "b=2"))] == 1);
        CHECK(outs[*g.find(parse_config_spec(p, "a=1,b=1"))] == -1);
    }

    TEST_CASE("expected interactions") {
        auto p = corpus::majority_ex1();
        auto g = explore(p, parse_config_spec(p, "A=1,B=1"));
        CHECK(expected_steps_exact(g, stable_set(p, g)) == 2);
        NodeSet root_only(g.size());
        root_only[g.root] = true;
        CHECK(expected_steps_exact(g, root_only) == 0);
        // one productive pair out of three
        auto q = parse_protocol("states: A B C\ninputs: x -> A\noutput1: C\ntransitions:\n  A B -> C C\n");
        auto h = explore(q, parse_config_spec(q, "A=1,B=1,C=1"));
        CHECK(expected_steps_exact(h, stable_set(q, h)) == 3);
        CHECK(expected_steps_float(h, stable_set(q, h)) == doctest::Approx(3.0));
        CHECK(expected_steps(h, stable_set(q, h), 0) == doctest::Approx(3.0));
    }

    TEST_CASE("simulation") {
        auto p = corpus::majority_ex2();
        auto c = parse_config_spec(p, "A=3,B=2");
        SimOptions opt;
        opt.trials = 200;
        opt.seed = 3;
        auto a = simulate(p, c, opt);
        opt.threads = 1;
        auto b = simulate(p, c, opt);
        CHECK(a.steps == b.steps);
        for (int o : a.outputs) CHECK(o == 0);
        REQUIRE(a.mean);
        CHECK(*a.mean > 0);
        opt.trials = 0;
        auto z = simulate(p, c, opt);
        CHECK_FALSE(z.mean);
        CHECK(z.steps.empty());
    }

    TEST_CASE("initial configurations") {
        auto p = corpus::majority_ex1();
        CHECK(initial_configurations(p, 4).size() == 5);
        CHECK(initial_configurations(corpus::broadcast(), 3).size() == 4);
    }

    TEST_CASE("checker accepts the corpus trees at small sizes") {
        for (const char* name : {"majority_ex1", "majority_ex2", "broadcast"}) {
            auto p = corpus::find(name)->build();
            auto rep = check_stage_graph(p, build_stage_graph(p), 5);
            CHECK_MESSAGE(rep.violations.empty(), name);
            CHECK(rep.max_size_checked == 5);
        }
    }

    TEST_CASE("checker finds injected faults") {
        auto p = corpus::majority_ex1();
        auto g = build_stage_graph(p);
        for (int ch : g.stages[0].children) g.stages[ch].phi = Formula::ff();
        auto rep = check_stage_graph(p, g, 4);
        bool b = false;
        for (auto& v : rep.violations) b |= v.condition == 'b' && v.stage == 0;
        CHECK(b);

        auto h = build_stage_graph(p);
        h.stages[0].phi = Formula::ff();
        auto ra = check_stage_graph(p, h, 3);
        REQUIRE_FALSE(ra.violations.empty());
        CHECK(ra.violations[0].condition == 'a');

        CHECK(check_stage_graph(p, build_stage_graph(p), 1).violations.empty());
    }
}
