#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "stagebound/corpus.hpp"
#include "stagebound/stagegraph.hpp"

using namespace stagebound;

namespace {

Valuation nu_of(const Protocol& p, const std::string& lits) {
    Valuation v;
    std::istringstream in(lits);
    std::string w;
    while (in >> w) {
        bool val = w[0] != '!';
        if (!val) w.erase(0, 1);
        v.set(Atom::present(p.state_id(w)), val);
    }
    return v;
}

std::string heads(const Protocol& p, const HeadSet& hs) {
    std::string s;
    for (Head h : hs) s += (s.empty() ? "" : " ") + p.state_name(h.a) + p.state_name(h.b);
    return s;
}

std::string edges(const Protocol& p, const TransformationGraph& g) {
    std::set<std::string> es;
    for (size_t u = 0; u < g.adj.size(); ++u)
        for (int w : g.adj[u]) es.insert(p.state_name(u) + ">" + p.state_name(w));
    std::string s;
    for (auto& e : es) s += (s.empty() ? "" : " ") + e;
    return s;
}

}  // namespace

TEST_SUITE("stagegraph") {
    TEST_CASE("initial stages") {
        auto p1 = corpus::majority_ex1();
        CHECK(to_string(p1, initial_stage(p1).phi) == "(A | B) & !a & !b");
        auto p2 = corpus::majority_ex2();
        CHECK(to_string(p2, initial_stage(p2).phi) == "(A | B) & !C & !a & !b");
        auto b = corpus::broadcast();
        CHECK(to_string(b, initial_stage(b).phi) == "F | T");
    }

    TEST_CASE("persistent valuations of example 1") {
        auto p = corpus::majority_ex1();
        HeadSet none;
        auto pa = compute_pi_nu(p, {}, none, nu_of(p, "A !B !a !b"));
        CHECK(to_string(p, pa) == "A !B !a !b");  // M = {B, a, b}
        auto pb = compute_pi_nu(p, {}, none, nu_of(p, "!A B !a !b"));
        CHECK(to_string(p, pb) == "!A B !a !b");  // M = {A, a, b}
        auto pab = compute_pi_nu(p, {}, none, nu_of(p, "A B !a !b"));
        CHECK(pab.empty());
    }

    TEST_CASE("stable and dead") {
        auto p = corpus::majority_ex1();
        HeadSet none;
        auto pa = compute_pi_nu(p, {}, none, nu_of(p, "A !B !a !b"));
        CHECK(is_stable(p, pa, none) == 0);
        CHECK_FALSE(is_dead(p, pa, none));
        CHECK_FALSE(is_stable(p, Valuation{}, none));
        CHECK_FALSE(is_dead(p, Valuation{}, none));
        auto one = parse_protocol("states: A\ninputs: x -> A\noutput1: A\ntransitions:\n");
        CHECK(is_stable(one, Valuation{}, none) == 1);
        auto mixed = parse_protocol("states: A B C\ninputs: x -> A\noutput1: B\ntransitions:\n  A C -> B B\n  B C -> A A\n");
        auto v = nu_of(mixed, "A B !C");
        CHECK(is_dead(mixed, v, none));
    }

    TEST_CASE("transformation graphs and Exp") {
        auto p1 = corpus::majority_ex1();
        auto g1 = build_transformation_graph(p1, {}, {});
        CHECK(edges(p1, g1) == "A>a A>b B>a B>b a>b b>a");
        CHECK(heads(p1, compute_exp(g1)) == "AB");

        auto p2 = corpus::majority_ex2();
        auto g2 = build_transformation_graph(p2, {}, {});
        CHECK(edges(p2, g2) == "A>C A>b B>C B>b C>a C>b a>b b>a");
        CHECK(heads(p2, compute_exp(g2)) == "AB AC BC");

        Valuation all_off = nu_of(p1, "!A !B !a !b");
        auto g3 = build_transformation_graph(p1, all_off, {});
        CHECK(edges(p1, g3).empty());
        CHECK(compute_exp(g3).empty());
    }

    TEST_CASE("J, modes and K") {
        auto p1 = corpus::majority_ex1();
        auto g1 = build_transformation_graph(p1, {}, {});
        auto j1 = compute_j(p1, {}, {}, compute_exp(g1));
        CHECK(heads(p1, j1) == "AB");
        CHECK(classify_nu_mode(p1, nu_of(p1, "A B !a !b"), j1) == Mode::NuEnabled);
        CHECK(classify_nu_mode(p1, nu_of(p1, "!A B"), j1) == Mode::NuDisabled);
        CHECK(classify_nu_mode(p1, nu_of(p1, "A B"), {}) == Mode::Neither);
        CHECK(heads(p1, compute_k(g1, j1)) == "ab");
        CHECK(compute_j(p1, {}, {}, {}).empty());

        auto p2 = corpus::majority_ex2();
        auto g2 = build_transformation_graph(p2, {}, {});
        auto j2 = compute_j(p2, {}, {}, compute_exp(g2));
        CHECK(heads(p2, j2) == "AB AC BC");
        CHECK(heads(p2, compute_k(g2, j2)) == "Aa Bb Cb");  // bC, Aa, Bb
    }

    TEST_CASE("I and L") {
        auto p = corpus::majority_ex1();
        TransformationGraph empty = build_transformation_graph(p, nu_of(p, "!A !B !a !b"), {});
        auto [i0, l0] = compute_i_and_l(empty, {});
        CHECK(i0.empty());
        CHECK(l0.empty());
        // A b -> A a with A persistent: one stable edge b -> a between distinct SCCs
        auto q = parse_protocol("states: A a b\ninputs: x -> A\noutput1: a\ntransitions:\n  A b -> A a\n");
        Valuation pi = nu_of(q, "A");
        auto g = build_transformation_graph(q, pi, {});
        auto [i1, l1] = compute_i_and_l(g, pi);
        REQUIRE(i1.size() == 1);
        CHECK(q.state_name(i1[0]) == "b");
        CHECK(heads(q, l1) == "Aa");
        // a <-> b cycle only: one SCC, nothing leaves
        auto r = parse_protocol("states: A a b\ninputs: x -> A\noutput1: a\ntransitions:\n  A b -> A a\n  A a -> A b\n");
        auto gr = build_transformation_graph(r, pi, {});
        CHECK(compute_i_and_l(gr, pi).first.empty());
    }

    TEST_CASE("children of example 2") {
        auto p = corpus::majority_ex2();
        Stage root = initial_stage(p);
        auto ab = build_child(p, root, nu_of(p, "A B !C !a !b"));
        CHECK(ab.kind == StageKind::Internal);
        CHECK(heads(p, ab.t) == "AB AC BC");
        CHECK(ab.analysis->mode == Mode::NuEnabled);
        CHECK(ab.bound == Bound::QuasiQuadratic);

        auto p1 = corpus::majority_ex1();
        auto a = build_child(p1, initial_stage(p1), nu_of(p1, "A !B !a !b"));
        CHECK(a.kind == StageKind::Stable);
        CHECK(a.consensus == 0);
        CHECK(a.bound == Bound::Zero);
    }

    TEST_CASE("redundant child is dropped") {
        auto p = corpus::majority_ex1();
        StageGraph g;
        g.stages.push_back(initial_stage(p));
        Stage same = g.stages[0];
        CHECK(is_redundant(g, 0, same));
        same.t.insert(Head(0, 1));
        CHECK_FALSE(is_redundant(g, 0, same));
    }

    TEST_CASE("tree invariants on the corpus") {
        for (auto& e : corpus::entries()) {
            auto p = e.build();
            auto g = build_stage_graph(p);
            REQUIRE(g.complete());
            for (auto& s : g.stages) {
                CHECK(entails(s.phi, valuation_formula(s.pi) && heads_formula(p, s.t)));
                if (s.kind == StageKind::Internal) CHECK_FALSE(s.children.empty());
                if (s.parent < 0) continue;
                const Stage& par = g.stages[s.parent];
                CHECK(std::includes(s.t.begin(), s.t.end(), par.t.begin(), par.t.end()));
                auto& ca = *s.analysis;
                CHECK(std::includes(ca.exp.begin(), ca.exp.end(), ca.j.begin(), ca.j.end()));
                if (s.kind == StageKind::Internal && ca.exp.empty()) CHECK(s.t == par.t);
                for (int a = s.parent; a >= 0 && s.kind == StageKind::Internal; a = g.stages[a].parent) {
                    const Stage& anc = g.stages[a];
                    CHECK_FALSE((anc.pi == s.pi && anc.t == s.t && entails(anc.phi, s.phi)));
                }
            }
        }
    }

    TEST_CASE("construction is deterministic") {
        auto p = corpus::remainder(3);
        auto g1 = build_stage_graph(p), g2 = build_stage_graph(p);
        REQUIRE(g1.stages.size() == g2.stages.size());
        for (size_t i = 0; i < g1.stages.size(); ++i) {
            CHECK(to_string(p, g1.stages[i].phi) == to_string(p, g2.stages[i].phi));
            CHECK(g1.stages[i].children == g2.stages[i].children);
        }
    }

    TEST_CASE("limits") {
        auto p = corpus::flock_guidelines(7);
        auto g = build_stage_graph(p, Limits{10, 1000});
        CHECK(g.status == BuildStatus::StageLimit);
        CHECK(g.stages.size() <= 10);
    }
}
