#include "stagebound/stagegraph.hpp"

#include <algorithm>
#include <chrono>
#include <deque>

namespace stagebound {

std::vector<int> tarjan_scc(const std::vector<std::vector<int>>& adj, const std::vector<bool>& mask) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on(n, false);
    int counter = 0, ncomp = 0;
    struct Frame {
        int v;
        size_t next;
    };
    for (int s = 0; s < n; ++s) {
        if (!mask[s] || index[s] >= 0) continue;
        std::vector<Frame> call{{s, 0}};
        index[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next < adj[f.v].size()) {
                int w = adj[f.v][f.next++];
                if (!mask[w]) continue;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            int v = f.v;
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
    }
    return comp;
}

std::vector<StateId> TransformationGraph::non_bottom() const {
    std::set<int> nb;
    for (size_t u = 0; u < adj.size(); ++u)
        for (int w : adj[u])
            if (scc[u] != scc[w]) nb.insert(scc[u]);
    std::vector<StateId> out;
    for (size_t a = 0; a < vertex.size(); ++a)
        if (vertex[a] && nb.count(scc[a])) out.push_back(static_cast<StateId>(a));
    return out;
}

const char* mode_label(Mode m) {
    switch (m) {
        case Mode::None: return "none";
        case Mode::NuDisabled: return "nu-disabled";
        case Mode::NuEnabled: return "nu-enabled";
        case Mode::Neither: return "neither";
        case Mode::NoJ: return "no-j";
        case Mode::ISome: return "i-present";
        case Mode::INone: return "i-absent";
        case Mode::IOther: return "i-open";
    }
    return "?";
}

const char* kind_label(StageKind k) {
    switch (k) {
        case StageKind::Internal: return "internal";
        case StageKind::Stable: return "stable";
        case StageKind::Dead: return "dead";
        case StageKind::Exhausted: return "exhausted";
    }
    return "?";
}

Formula heads_formula(const Protocol& p, const HeadSet& hs) {
    return heads_formula(p, std::vector<Head>(hs.begin(), hs.end()));
}

DisabledOracle::DisabledOracle(const Protocol& p, const Valuation& pi, const HeadSet& t)
    : p_(p), base_(valuation_formula(pi) && heads_formula(p, t)) {}

bool DisabledOracle::operator()(Head h) {
    auto it = memo_.find(h);
    if (it != memo_.end()) return it->second;
    bool r = entails(base_, xi(p_, h));
    memo_.emplace(h, r);
    return r;
}

Stage initial_stage(const Protocol& p) {
    auto init = p.input_states();
    std::vector<Formula> some, none;
    for (StateId q = 0; q < p.num_states(); ++q) {
        if (std::binary_search(init.begin(), init.end(), q))
            some.push_back(Formula::present(q));
        else
            none.push_back(!Formula::present(q));
    }
    Stage s;
    std::vector<Formula> all{Formula::disj(some)};
    all.insert(all.end(), none.begin(), none.end());
    s.phi = Formula::conj(all);
    return s;
}

namespace {
bool in_rhs_not_lhs(const Transition& t, StateId a) { return t.rhs.contains(a) && !t.lhs.contains(a); }
}  // namespace

Valuation compute_pi_nu(const Protocol& p, const Valuation& pi, const HeadSet& t, const Valuation& nu) {
    const int n = p.num_states();
    std::set<StateId> m, nset;
    for (StateId q = 0; q < n; ++q) {
        if (nu.is(Atom::present(q), false)) m.insert(q);
        if (nu.is(Atom::single(q), true)) nset.insert(q);
    }
    auto blocked = [&](const Transition& r) {
        // the rule can never fire again
        return m.count(r.lhs.a) || m.count(r.lhs.b) || t.count(r.lhs) ||
               (r.lhs.a == r.lhs.b && nset.count(r.lhs.a));
    };
    while (true) {
        std::set<StateId> m2, n2;
        for (StateId a : m) {
            bool ok = true;
            for (auto& r : p.non_idle())
                if (in_rhs_not_lhs(r, a) && !blocked(r)) {
                    ok = false;
                    break;
                }
            if (ok) m2.insert(a);
        }
        for (StateId a : nset) {
            bool ok = true;
            for (auto& r : p.non_idle()) {
                if (r.lhs.contains(a)) {
                    StateId b = r.lhs.other(a);
                    bool gone = m.count(b) || t.count(r.lhs);
                    if (a != b && !r.rhs.contains(a) && !gone) ok = false;
                    if (a != b && r.rhs == Head(a, a) && !gone) ok = false;
                }
                if (ok && in_rhs_not_lhs(r, a) && !blocked(r)) ok = false;
                if (!ok) break;
            }
            if (ok) n2.insert(a);
        }
        if (m2 == m && n2 == nset) break;
        m = std::move(m2);
        nset = std::move(n2);
    }
    std::set<StateId> e;
    for (StateId a = 0; a < n; ++a) {
        if (!nu.is(Atom::present(a), true)) continue;
        bool ok = true;
        for (auto& r : p.non_idle()) {
            if (r.lhs.contains(a) && !r.rhs.contains(a)) {
                StateId b = r.lhs.other(a);
                if (!(m.count(b) || t.count(r.lhs) || (a == b && nset.count(a)))) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) e.insert(a);
    }
    Valuation res = pi;
    for (StateId a : m) res.set(Atom::present(a), false);
    for (StateId a : e) res.set(Atom::present(a), true);
    for (StateId a : nset) {
        res.set(Atom::single(a), true);
        res.set(Atom::present(a), true);
    }
    return res;
}

namespace {
bool may_be_present(const Valuation& pi, StateId a) { return !pi.is(Atom::present(a), false); }

std::optional<int> stable_with(const Protocol& p, const Valuation& pi, DisabledOracle& dis) {
    for (int x : {0, 1}) {
        bool ok = true;
        for (StateId a = 0; a < p.num_states() && ok; ++a)
            if (may_be_present(pi, a) && p.output(a) != x) ok = false;
        for (auto& r : p.non_idle()) {
            if (!ok) break;
            if ((p.output(r.rhs.a) != x || p.output(r.rhs.b) != x) && !dis(r.lhs)) ok = false;
        }
        if (ok) return x;
    }
    return std::nullopt;
}

bool all_disabled(const Protocol& p, DisabledOracle& dis) {
    for (auto& r : p.non_idle())
        if (!dis(r.lhs)) return false;
    return true;
}

std::vector<std::pair<StateId, StateId>> edges_of(const Transition& r) {
    StateId a = r.lhs.a, b = r.lhs.b, c = r.rhs.a, d = r.rhs.b;
    if (!r.rhs.contains(a) && !r.rhs.contains(b)) return {{a, c}, {a, d}, {b, c}, {b, d}};
    // cancel one shared state, connect the residues
    StateId x = r.rhs.contains(a) ? b : a;
    StateId common = r.rhs.contains(a) ? a : b;
    StateId y = r.rhs.other(common);
    return {{x, y}};
}

// The lhs partner that stays behind when u is transformed.
StateId context_of(const Transition& r, StateId u) { return r.lhs.other(u); }

TransformationGraph graph_with(const Protocol& p, const Valuation& pi, DisabledOracle& dis) {
    TransformationGraph g;
    const int n = p.num_states();
    g.vertex.assign(n, false);
    for (StateId a = 0; a < n; ++a) g.vertex[a] = may_be_present(pi, a);
    g.adj.assign(n, {});
    for (auto& r : p.non_idle()) {
        if (dis(r.lhs)) continue;
        TransformationGraph::Generator gen{r, {}};
        for (auto e : edges_of(r)) {
            if (!g.vertex[e.first] || !g.vertex[e.second]) continue;
            gen.edges.push_back(e);
            g.adj[e.first].push_back(e.second);
        }
        g.gens.push_back(std::move(gen));
    }
    for (auto& v : g.adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    g.scc = tarjan_scc(g.adj, g.vertex);
    return g;
}
}  // namespace

std::optional<int> is_stable(const Protocol& p, const Valuation& pi_nu, const HeadSet& t) {
    DisabledOracle dis(p, pi_nu, t);
    return stable_with(p, pi_nu, dis);
}

bool is_dead(const Protocol& p, const Valuation& pi_nu, const HeadSet& t) {
    DisabledOracle dis(p, pi_nu, t);
    return !stable_with(p, pi_nu, dis) && all_disabled(p, dis);
}

TransformationGraph build_transformation_graph(const Protocol& p, const Valuation& pi_nu, const HeadSet& t) {
    DisabledOracle dis(p, pi_nu, t);
    return graph_with(p, pi_nu, dis);
}

HeadSet compute_exp(const TransformationGraph& g) {
    HeadSet exp;
    for (auto& gen : g.gens)
        for (auto [u, w] : gen.edges)
            if (g.scc[u] != g.scc[w]) exp.insert(gen.rule.lhs);
    return exp;
}

HeadSet compute_j(const Protocol& p, const Valuation& pi_nu, const HeadSet& t, const HeadSet& exp) {
    Formula base = valuation_formula(pi_nu) && heads_formula(p, t);
    HeadSet m = exp;
    while (true) {
        std::optional<Head> drop;
        Formula ctx = base && heads_formula(p, m);
        for (Head ef : m) {
            bool ok = true;
            for (auto& r : p.non_idle()) {
                if (r.rhs == ef && !entails(ctx, xi(p, r.lhs))) ok = false;
                for (auto [x, y] : {std::pair{ef.a, ef.b}, std::pair{ef.b, ef.a}}) {
                    if (!ok) break;
                    // rhs of the form x g with g != y
                    for (auto [r0, r1] : {std::pair{r.rhs.a, r.rhs.b}, std::pair{r.rhs.b, r.rhs.a}}) {
                        if (r0 != x || r1 == y) continue;
                        if (x != y) {
                            Formula ante = !Formula::present(x) && Formula::present(y) && ctx;
                            if (!entails(ante, xi(p, r.lhs))) ok = false;
                        } else {
                            bool kept = r.lhs.contains(x) ||
                                        (p.has_singleton(x) && entails(Formula::single(x) && ctx, xi(p, r.lhs)));
                            if (!kept) ok = false;
                        }
                    }
                }
                if (!ok) break;
            }
            if (!ok) {
                drop = ef;
                break;
            }
        }
        if (!drop) break;
        m.erase(*drop);
    }
    return m;
}

Mode classify_nu_mode(const Protocol& p, const Valuation& nu, const HeadSet& j) {
    if (j.empty()) return Mode::Neither;
    Formula f = valuation_formula(nu);
    bool all = true;
    for (Head h : j)
        if (!entails(f, xi(p, h))) {
            all = false;
            break;
        }
    if (all) return Mode::NuDisabled;
    for (Head h : j)
        if (entails(f, !xi(p, h))) return Mode::NuEnabled;
    return Mode::Neither;
}

HeadSet compute_k(const TransformationGraph& g, const HeadSet& j) {
    std::set<StateId> qn;
    for (Head h : j) {
        qn.insert(h.a);
        qn.insert(h.b);
    }
    HeadSet k;
    for (auto& gen : g.gens)
        for (auto [u, w] : gen.edges)
            if (qn.count(u)) k.insert(gen.rule.rhs);
    return k;
}

std::pair<std::vector<StateId>, HeadSet> compute_i_and_l(const TransformationGraph& g, const Valuation& pi_nu) {
    const size_t n = g.vertex.size();
    std::vector<std::vector<int>> sadj(n);
    auto stable_edge = [&](const Transition& r, StateId u) { return pi_nu.is(Atom::present(context_of(r, u)), true); };
    for (auto& gen : g.gens)
        for (auto [u, w] : gen.edges)
            if (stable_edge(gen.rule, u)) sadj[u].push_back(w);
    for (auto& v : sadj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    auto sc = tarjan_scc(sadj, g.vertex);
    std::set<int> nb;
    for (size_t u = 0; u < n; ++u)
        for (int w : sadj[u])
            if (sc[u] != sc[w]) nb.insert(sc[u]);
    std::vector<StateId> i;
    std::vector<bool> in_i(n, false);
    for (size_t a = 0; a < n; ++a)
        if (g.vertex[a] && nb.count(sc[a])) {
            i.push_back(static_cast<StateId>(a));
            in_i[a] = true;
        }
    HeadSet l;
    for (auto& gen : g.gens)
        for (auto [u, w] : gen.edges)
            if (stable_edge(gen.rule, u) && in_i[u] && !in_i[w]) l.insert(gen.rule.rhs);
    return {i, l};
}

Formula rhs_presence(const Protocol& p, Head cd) {
    if (cd.a != cd.b) return Formula::present(cd.a) && Formula::present(cd.b);
    if (p.has_singleton(cd.a)) return Formula::present(cd.a) && !Formula::single(cd.a);
    return Formula::present(cd.a);
}

namespace {
Formula any_rhs(const Protocol& p, const HeadSet& hs) {
    std::vector<Formula> fs;
    for (Head h : hs) fs.push_back(rhs_presence(p, h));
    return Formula::disj(std::move(fs));
}
}  // namespace

Stage build_child(const Protocol& p, const Stage& s, const Valuation& nu) {
    auto ca = std::make_shared<CaseAnalysis>();
    ca->nu = nu;
    ca->t_parent = s.t;
    ca->pi_nu = compute_pi_nu(p, s.pi, s.t, nu);
    const Valuation& pin = ca->pi_nu;

    Stage c;
    c.pi = pin;
    c.depth = s.depth + 1;
    c.parent = s.id;

    DisabledOracle dis(p, pin, s.t);
    ca->stable = stable_with(p, pin, dis);
    if (!ca->stable && all_disabled(p, dis)) ca->dead = true;
    if (ca->stable || ca->dead) {
        c.phi = valuation_formula(pin);
        c.t = s.t;
        c.kind = ca->stable ? StageKind::Stable : StageKind::Dead;
        c.consensus = ca->stable;
        c.bound = Bound::Zero;
        ca->t_nu = s.t;
        c.analysis = ca;
        return c;
    }

    ca->graph = graph_with(p, pin, dis);
    ca->exp = compute_exp(ca->graph);
    ca->j = compute_j(p, pin, s.t, ca->exp);
    ca->u_states = ca->graph.non_bottom();
    Formula pif = valuation_formula(pin);
    Formula nuf = valuation_formula(nu);

    if (!ca->exp.empty()) {
        if (!ca->j.empty()) {
            ca->t_nu = s.t;
            ca->t_nu.insert(ca->j.begin(), ca->j.end());
            ca->mode = classify_nu_mode(p, nu, ca->j);
            Formula core = pif && heads_formula(p, ca->t_nu);
            if (ca->mode == Mode::NuDisabled) {
                c.phi = core && nuf;
            } else if (ca->mode == Mode::NuEnabled) {
                ca->k = compute_k(ca->graph, ca->j);
                c.phi = core && any_rhs(p, ca->k);
            } else {
                c.phi = core;
            }
        } else {
            ca->t_nu = s.t;
            ca->t_nu.insert(ca->exp.begin(), ca->exp.end());
            ca->mode = Mode::NoJ;
            c.phi = pif && heads_formula(p, ca->t_nu);
        }
    } else {
        ca->t_nu = s.t;
        auto [i, l] = compute_i_and_l(ca->graph, pin);
        ca->i_states = i;
        ca->l = l;
        std::vector<Formula> absent;
        bool some = false, none = true;
        for (StateId a : i) {
            absent.push_back(!Formula::present(a));
            if (nu.is(Atom::present(a), true)) some = true;
            if (!nu.is(Atom::present(a), false)) none = false;
        }
        Formula core = pif && heads_formula(p, ca->t_nu);
        if (some) {
            ca->mode = Mode::ISome;
            c.phi = core && Formula::conj(absent) && any_rhs(p, l);
        } else if (none) {
            ca->mode = Mode::INone;
            c.phi = core && nuf;
        } else {
            ca->mode = Mode::IOther;
            c.phi = core && Formula::conj(absent);
        }
    }
    c.t = ca->t_nu;
    if (!ca->exp.empty() && !ca->j.empty()) {
        ca->fast = is_fast(p, *ca);
        ca->very_fast = is_very_fast(p, *ca);
    }
    c.bound = edge_bound(p, *ca);
    c.analysis = ca;
    return c;
}

bool is_redundant(const StageGraph& g, int parent, const Stage& child) {
    for (int a = parent; a >= 0; a = g.stages[a].parent) {
        const Stage& s = g.stages[a];
        if (s.pi == child.pi && s.t == child.t && entails(s.phi, child.phi)) return true;
    }
    return false;
}

StageGraph build_stage_graph(const Protocol& p, const Limits& limits) {
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    StageGraph g;
    g.stages.push_back(initial_stage(p));
    std::deque<int> work{0};
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
    while (!work.empty()) {
        int sid = work.front();
        work.pop_front();
        if (g.stages[sid].kind != StageKind::Internal) continue;
        auto vals = enumerate_satisfying_valuations(g.stages[sid].phi);
        for (auto& nu : vals) {
            if (elapsed() > limits.timeout_seconds) {
                g.status = BuildStatus::Timeout;
                g.seconds = elapsed();
                return g;
            }
            Stage c = build_child(p, g.stages[sid], nu);
            // terminal children never repeat an ancestor's persistent part, so only internal ones are tested
            if (c.kind == StageKind::Internal && is_redundant(g, sid, c)) continue;
            if (static_cast<int>(g.stages.size()) >= limits.max_stages) {
                g.status = BuildStatus::StageLimit;
                g.seconds = elapsed();
                return g;
            }
            c.id = static_cast<int>(g.stages.size());
            g.stages[sid].children.push_back(c.id);
            if (c.kind == StageKind::Internal) work.push_back(c.id);
            g.stages.push_back(std::move(c));
        }
        if (g.stages[sid].children.empty()) g.stages[sid].kind = StageKind::Exhausted;
    }
    g.seconds = elapsed();
    return g;
}

}  // namespace stagebound
