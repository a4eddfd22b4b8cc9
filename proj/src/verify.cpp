#include "stagebound/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <random>
#include <sstream>
#include <thread>

namespace stagebound {

std::optional<int> ReachGraph::find(const Config& c) const {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

ReachGraph explore(const Protocol& p, const Config& c0, size_t cap) {
    if (c0.size() < 2) throw std::domain_error("configuration has fewer than two agents");
    ReachGraph g;
    g.nodes.push_back(c0);
    g.index.emplace(c0, 0);
    for (size_t v = 0; v < g.nodes.size(); ++v) {
        auto dist = step_distribution(p, g.nodes[v]);
        std::vector<std::pair<int, mpq_class>> out;
        out.reserve(dist.size());
        for (auto& [c, pr] : dist) {
            auto [it, fresh] = g.index.emplace(c, static_cast<int>(g.nodes.size()));
            if (fresh) {
                if (g.nodes.size() >= cap)
                    throw ResourceError("exploration exceeded " + std::to_string(cap) + " configurations");
                g.nodes.push_back(c);
            }
            out.emplace_back(it->second, pr);
        }
        g.succ.push_back(std::move(out));
    }
    return g;
}

NodeSet satisfying(const Protocol& p, const ReachGraph& g, const Formula& f) {
    NodeSet s(g.size());
    for (size_t v = 0; v < g.size(); ++v) s[v] = config_satisfies(p, g.nodes[v], f);
    return s;
}

namespace {

std::vector<std::vector<int>> predecessors(const ReachGraph& g) {
    std::vector<std::vector<int>> pred(g.size());
    for (size_t v = 0; v < g.size(); ++v)
        for (auto& [w, pr] : g.succ[v])
            if (w != static_cast<int>(v)) pred[w].push_back(static_cast<int>(v));
    return pred;
}

// Nodes from which some node of `from` is reachable, along paths whose inner nodes avoid `stop`.
NodeSet backward_closure(const ReachGraph& g, const NodeSet& from, const NodeSet* stop = nullptr) {
    auto pred = predecessors(g);
    NodeSet seen = from;
    std::deque<int> work;
    for (size_t v = 0; v < g.size(); ++v)
        if (from[v]) work.push_back(static_cast<int>(v));
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        for (int u : pred[v])
            if (!seen[u] && !(stop && (*stop)[u])) {
                seen[u] = true;
                work.push_back(u);
            }
    }
    return seen;
}

NodeSet complement(NodeSet s) {
    s.flip();
    return s;
}

int output_of(const Protocol& p, const Config& c) {
    int out = -1;
    for (StateId q = 0; q < p.num_states(); ++q) {
        if (!c[q]) continue;
        if (out == -1)
            out = p.output(q);
        else if (out != p.output(q))
            return -1;
    }
    return out;
}

}  // namespace

NodeSet box(const ReachGraph& g, const NodeSet& good) { return complement(backward_closure(g, complement(good))); }

NodeSet diamond_as(const ReachGraph& g, const NodeSet& target) {
    NodeSet hopeless = complement(backward_closure(g, target));
    // target nodes absorb: what happens after the first hit is irrelevant
    return complement(backward_closure(g, hopeless, &target));
}

bool holds_box(const Protocol& p, const ReachGraph& g, const Formula& f) {
    auto s = satisfying(p, g, f);
    return std::all_of(s.begin(), s.end(), [](bool b) { return b; });
}

bool holds_diamond_as(const ReachGraph& g, const NodeSet& target) { return diamond_as(g, target)[g.root]; }

std::vector<int> stable_outputs(const Protocol& p, const ReachGraph& g) {
    std::vector<int> res(g.size(), -1);
    for (int x : {0, 1}) {
        NodeSet ok(g.size());
        for (size_t v = 0; v < g.size(); ++v) ok[v] = output_of(p, g.nodes[v]) == x;
        auto b = box(g, ok);
        for (size_t v = 0; v < g.size(); ++v)
            if (b[v]) res[v] = x;
    }
    return res;
}

NodeSet stable_set(const Protocol& p, const ReachGraph& g) {
    auto o = stable_outputs(p, g);
    NodeSet s(g.size());
    for (size_t v = 0; v < g.size(); ++v) s[v] = o[v] >= 0;
    return s;
}

namespace {

template <class Num>
Num to_num(const mpq_class& q) {
    if constexpr (std::is_same_v<Num, double>)
        return q.get_d();
    else
        return q;
}

template <class Num>
bool is_zero(const Num& x) {
    if constexpr (std::is_same_v<Num, double>)
        return x == 0.0;
    else
        return sgn(x) == 0;
}

// Solves E = 1 + P E on non-target nodes, one SCC at a time in reverse topological order.
template <class Num>
std::vector<Num> solve_expectations(const ReachGraph& g, const NodeSet& target) {
    if (!holds_diamond_as(g, target))
        throw DivergenceError("target is not reached with probability one; expectation is infinite");
    const size_t n = g.size();
    std::vector<std::vector<int>> adj(n);
    // non-target nodes reachable from the root before the first hit
    NodeSet transient(n, false);
    if (!target[g.root]) {
        std::deque<int> work{g.root};
        transient[g.root] = true;
        while (!work.empty()) {
            int v = work.front();
            work.pop_front();
            for (auto& [w, pr] : g.succ[v])
                if (!target[w] && !transient[w]) {
                    transient[w] = true;
                    work.push_back(w);
                }
        }
    }
    for (size_t v = 0; v < n; ++v)
        if (transient[v])
            for (auto& [w, pr] : g.succ[v])
                if (transient[w]) adj[v].push_back(w);
    auto comp = tarjan_scc(adj, transient);
    int ncomp = 0;
    for (int c : comp) ncomp = std::max(ncomp, c + 1);
    std::vector<std::vector<int>> members(ncomp);
    for (size_t v = 0; v < n; ++v)
        if (comp[v] >= 0) members[comp[v]].push_back(static_cast<int>(v));

    std::vector<Num> e(n, Num(0));
    std::vector<int> local(n, -1);
    for (int c = 0; c < ncomp; ++c) {
        auto& vs = members[c];
        const size_t k = vs.size();
        for (size_t i = 0; i < k; ++i) local[vs[i]] = static_cast<int>(i);
        // augmented matrix [I - P_cc | b]
        std::vector<std::vector<Num>> m(k, std::vector<Num>(k + 1, Num(0)));
        for (size_t i = 0; i < k; ++i) {
            m[i][i] = Num(1);
            m[i][k] = Num(1);
            for (auto& [w, pr] : g.succ[vs[i]]) {
                if (!transient[w]) continue;
                if (comp[w] == c)
                    m[i][local[w]] -= to_num<Num>(pr);
                else
                    m[i][k] += to_num<Num>(pr) * e[w];
            }
        }
        for (size_t col = 0; col < k; ++col) {
            size_t piv = col;
            if constexpr (std::is_same_v<Num, double>) {
                for (size_t r = col + 1; r < k; ++r)
                    if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
            } else {
                while (piv < k && is_zero(m[piv][col])) ++piv;
            }
            if (piv == k || is_zero(m[piv][col])) throw DivergenceError("singular system");
            std::swap(m[piv], m[col]);
            for (size_t r = 0; r < k; ++r) {
                if (r == col || is_zero(m[r][col])) continue;
                Num f = m[r][col] / m[col][col];
                for (size_t j = col; j <= k; ++j) m[r][j] -= f * m[col][j];
            }
        }
        for (size_t i = 0; i < k; ++i) e[vs[i]] = m[i][k] / m[i][i];
        if constexpr (std::is_same_v<Num, double>) {
            for (size_t i = 0; i < k; ++i) {
                double lhs = e[vs[i]], rhs = 1;
                for (auto& [w, pr] : g.succ[vs[i]])
                    if (transient[w]) rhs += pr.get_d() * e[w];
                if (std::fabs(lhs - rhs) > 1e-9 * std::max(1.0, std::fabs(lhs)))
                    throw DivergenceError("floating-point residual above tolerance");
            }
        }
    }
    return e;
}

}  // namespace

mpq_class expected_steps_exact(const ReachGraph& g, const NodeSet& target) {
    return solve_expectations<mpq_class>(g, target)[g.root];
}

double expected_steps_float(const ReachGraph& g, const NodeSet& target) {
    return solve_expectations<double>(g, target)[g.root];
}

double expected_steps(const ReachGraph& g, const NodeSet& target, size_t exact_limit) {
    if (g.size() <= exact_limit) return expected_steps_exact(g, target).get_d();
    return expected_steps_float(g, target);
}

double SimResult::stderr_mean() const {
    if (!variance || trials == 0) return 0;
    return std::sqrt(*variance / static_cast<double>(trials));
}

int thread_budget() {
    int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("STAGEBOUND_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, hw);
    }
    return hw;
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unbiased integer in [0, bound); the standard distributions are not portable across libraries.
uint64_t below(std::mt19937_64& rng, uint64_t bound) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % bound;
}

StateId agent_state(const Config& c, uint64_t idx) {
    for (StateId q = 0;; ++q) {
        if (idx < c[q]) return q;
        idx -= c[q];
    }
}

}  // namespace

SimResult simulate(const Protocol& p, const Config& c0, const SimOptions& opt) {
    SimResult res;
    res.trials = opt.trials;
    res.seed = opt.seed;
    if (opt.trials == 0) return res;
    const uint64_t n = c0.size();
    if (n < 2) throw std::domain_error("configuration has fewer than two agents");

    ReachGraph g;
    std::vector<int> stable_out;
    if (!opt.target) {
        g = explore(p, c0);
        stable_out = stable_outputs(p, g);
    }
    auto hit = [&](const Config& c) {
        if (opt.target) return config_satisfies(p, c, *opt.target);
        return stable_out[*g.find(c)] >= 0;
    };

    res.steps.assign(opt.trials, 0);
    res.outputs.assign(opt.trials, -1);
    std::vector<std::string> errors(opt.trials);
    auto run = [&](uint64_t t) {
        std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(t)));
        Config c = c0;
        uint64_t steps = 0;
        while (!hit(c)) {
            if (steps >= opt.step_cap) {
                errors[t] = "trial " + std::to_string(t) + " exceeded the step cap of " +
                            std::to_string(opt.step_cap);
                return;
            }
            uint64_t i = below(rng, n), j = below(rng, n - 1);
            if (j >= i) ++j;
            Head h(agent_state(c, i), agent_state(c, j));
            const auto& rules = p.rules_for(h);
            const Transition& r = p.transitions()[rules[below(rng, rules.size())]];
            if (!r.idle()) c = fire(c, r);
            ++steps;
        }
        res.steps[t] = steps;
        res.outputs[t] = output_of(p, c);
    };

    int threads = opt.threads > 0 ? opt.threads : thread_budget();
    threads = static_cast<int>(std::min<uint64_t>(threads, opt.trials));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (uint64_t t = w; t < opt.trials; t += threads) run(t);
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (!e.empty()) throw ResourceError(e);

    double sum = 0;
    for (auto s : res.steps) sum += static_cast<double>(s);
    double mean = sum / static_cast<double>(opt.trials);
    res.mean = mean;
    if (opt.trials > 1) {
        double ss = 0;
        for (auto s : res.steps) ss += (static_cast<double>(s) - mean) * (static_cast<double>(s) - mean);
        res.variance = ss / static_cast<double>(opt.trials - 1);
    }
    return res;
}

std::vector<Config> initial_configurations(const Protocol& p, int n) {
    const auto& in = p.inputs();
    std::vector<Config> out;
    if (in.empty() || n < 0) return out;
    std::vector<int> parts(in.size(), 0);
    auto rec = [&](auto&& self, size_t i, int left) -> void {
        if (i + 1 == in.size()) {
            parts[i] = left;
            Config c = Config::zero(p.num_states());
            for (size_t k = 0; k < in.size(); ++k) c[in[k].second] += parts[k];
            out.push_back(c);
            return;
        }
        for (int x = left; x >= 0; --x) {
            parts[i] = x;
            self(self, i + 1, left - x);
        }
    };
    rec(rec, 0, n);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CheckReport check_stage_graph(const Protocol& p, const StageGraph& sg, int max_n, size_t cap) {
    CheckReport rep;
    std::vector<Formula> persistent;
    for (auto& s : sg.stages) persistent.push_back(valuation_formula(s.pi) && heads_formula(p, s.t));
    for (int n = 2; n <= max_n; ++n) {
        for (auto& c0 : initial_configurations(p, n)) {
            ReachGraph g;
            try {
                g = explore(p, c0, cap);
            } catch (const ResourceError&) {
                rep.partial = true;
                return rep;
            }
            ++rep.configurations;
            std::vector<NodeSet> member(sg.stages.size());
            for (size_t i = 0; i < sg.stages.size(); ++i) {
                auto phi = satisfying(p, g, sg.stages[i].phi);
                auto keep = box(g, satisfying(p, g, persistent[i]));
                for (size_t v = 0; v < g.size(); ++v) phi[v] = phi[v] && keep[v];
                member[i] = std::move(phi);
            }
            const std::string cs = c0.str(p);
            if (!sg.stages.empty() && !member[0][g.root])
                rep.violations.push_back({n, cs, 0, 'a', "initial configuration outside the root stage"});
            std::vector<int> outs;
            for (size_t i = 0; i < sg.stages.size(); ++i) {
                const Stage& s = sg.stages[i];
                if (s.kind == StageKind::Internal) {
                    NodeSet next(g.size());
                    for (int ch : s.children)
                        for (size_t v = 0; v < g.size(); ++v)
                            if (member[ch][v]) next[v] = true;
                    auto ok = diamond_as(g, next);
                    int bad = 0, first = -1;
                    for (size_t v = 0; v < g.size(); ++v)
                        if (member[i][v] && !ok[v]) {
                            if (first < 0) first = static_cast<int>(v);
                            ++bad;
                        }
                    if (bad)
                        rep.violations.push_back({n, cs, s.id, 'b',
                                                  std::to_string(bad) + " member(s) may miss every successor, e.g. " +
                                                      g.nodes[first].str(p)});
                } else if (s.kind == StageKind::Stable) {
                    if (outs.empty()) outs = stable_outputs(p, g);
                    for (size_t v = 0; v < g.size(); ++v)
                        if (member[i][v] && outs[v] != *s.consensus) {
                            rep.violations.push_back({n, cs, s.id, 's', g.nodes[v].str(p) + " is not stable"});
                            break;
                        }
                }
            }
        }
        rep.max_size_checked = n;
    }
    return rep;
}

std::vector<ScalingRow> scaling_sweep(const Protocol& p, const std::vector<int>& sizes) {
    std::vector<ScalingRow> rows;
    for (int n : sizes) {
        ScalingRow best;
        best.n = n;
        bool any = false;
        for (auto& c0 : initial_configurations(p, n)) {
            auto g = explore(p, c0);
            auto target = stable_set(p, g);
            double e = expected_steps(g, target);
            if (!any || e > best.expected) {
                best.expected = e;
                best.config = c0.str(p);
                best.exact = g.size() <= 5000;
                any = true;
            }
        }
        rows.push_back(best);
    }
    return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
    std::ostringstream os;
    os << "n,config,expected_interactions,exact\n";
    os.precision(10);
    for (auto& r : rows) os << r.n << ",\"" << r.config << "\"," << r.expected << "," << (r.exact ? 1 : 0) << "\n";
    return os.str();
}

}  // namespace stagebound
