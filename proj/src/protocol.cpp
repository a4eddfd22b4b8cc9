#include "stagebound/protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace stagebound {

Protocol::Protocol(std::string name, std::vector<std::string> states,
                   std::vector<std::pair<std::string, std::string>> inputs,
                   std::vector<std::string> output1,
                   const std::vector<std::array<std::string, 4>>& rules)
    : name_(std::move(name)), states_(std::move(states)) {
    if (states_.empty()) throw ParseError(0, "no states declared");
    for (size_t i = 0; i < states_.size(); ++i) {
        if (!index_.emplace(states_[i], static_cast<StateId>(i)).second)
            throw ParseError(0, "duplicate state '" + states_[i] + "'");
    }
    if (inputs.empty()) throw ParseError(0, "no inputs declared");
    for (auto& [sym, st] : inputs) inputs_.emplace_back(sym, state_id(st));

    out_.assign(states_.size(), 0);
    for (auto& s : output1) out_[state_id(s)] = 1;

    const int n = num_states();
    by_head_.assign(static_cast<size_t>(n) * n, {});
    std::set<std::pair<Head, Head>> seen;
    for (auto& r : rules) {
        Transition t{Head(state_id(r[0]), state_id(r[1])), Head(state_id(r[2]), state_id(r[3])), true};
        if (!seen.insert({t.lhs, t.rhs}).second) continue;
        trans_.push_back(t);
    }
    explicit_count_ = static_cast<int>(trans_.size());
    std::stable_sort(trans_.begin(), trans_.end(),
                     [](const Transition& x, const Transition& y) { return x.lhs < y.lhs; });
    std::vector<Transition> all;
    size_t k = 0;
    for (StateId a = 0; a < n; ++a) {
        for (StateId b = a; b < n; ++b) {
            Head h(a, b);
            bool any = false;
            while (k < trans_.size() && trans_[k].lhs == h) {
                all.push_back(trans_[k++]);
                any = true;
            }
            if (!any) all.push_back(Transition{h, h, false});
        }
    }
    trans_ = std::move(all);
    bang_.assign(n, false);
    for (size_t i = 0; i < trans_.size(); ++i) {
        const auto& t = trans_[i];
        by_head_[head_index(t.lhs)].push_back(static_cast<int>(i));
        if (!t.idle()) {
            nonidle_.push_back(t);
            if (t.lhs.a == t.lhs.b) bang_[t.lhs.a] = true;
        }
    }
}

StateId Protocol::state_id(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw ParseError(0, "undeclared state '" + s + "'");
    return it->second;
}

std::vector<StateId> Protocol::input_states() const {
    std::set<StateId> s;
    for (auto& [sym, q] : inputs_) s.insert(q);
    return {s.begin(), s.end()};
}

uint64_t Config::size() const {
    uint64_t n = 0;
    for (auto v : c_) n += v;
    return n;
}

std::string Config::str(const Protocol& p) const {
    std::string out;
    for (int q = 0; q < num_states(); ++q) {
        if (!c_[q]) continue;
        if (!out.empty()) out += ',';
        out += p.state_name(q) + "=" + std::to_string(c_[q]);
    }
    return out.empty() ? "-" : out;
}

size_t ConfigHash::operator()(const Config& c) const noexcept {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : c.counts()) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0x100000001b3ull;
    }
    return static_cast<size_t>(h);
}

Config initial_configuration(const Protocol& p, const std::map<std::string, uint64_t>& input) {
    Config c = Config::zero(p.num_states());
    for (auto& [sym, cnt] : input) {
        bool found = false;
        for (auto& [s, q] : p.inputs()) {
            if (s == sym) {
                c[q] += static_cast<uint32_t>(cnt);
                found = true;
            }
        }
        if (!found) throw std::invalid_argument("unknown input symbol '" + sym + "'");
    }
    return c;
}

Config parse_config_spec(const Protocol& p, const std::string& spec) {
    Config c = Config::zero(p.num_states());
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        item = trim(item);
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad config item '" + item + "'");
        std::string name = trim(item.substr(0, eq));
        if (!p.has_state(name)) throw std::invalid_argument("unknown state '" + name + "'");
        c[p.state_id(name)] += static_cast<uint32_t>(std::stoul(trim(item.substr(eq + 1))));
    }
    return c;
}

bool enabled(const Config& c, const Transition& t) {
    if (t.lhs.a == t.lhs.b) return c[t.lhs.a] >= 2;
    return c[t.lhs.a] >= 1 && c[t.lhs.b] >= 1;
}

Config fire(const Config& c, const Transition& t) {
    if (!enabled(c, t)) throw std::logic_error("transition not enabled");
    Config d = c;
    --d[t.lhs.a];
    --d[t.lhs.b];
    ++d[t.rhs.a];
    ++d[t.rhs.b];
    return d;
}

mpq_class transition_probability(const Protocol& p, const Config& c, const Transition& t) {
    uint64_t n = c.size();
    if (n < 2) throw std::domain_error("configuration has fewer than two agents");
    if (!enabled(c, t)) return 0;
    mpz_class k = static_cast<unsigned long>(p.rules_for(t.lhs).size());
    mpz_class num;
    if (t.lhs.a == t.lhs.b) {
        mpz_class x = c[t.lhs.a];
        num = x * (x - 1);
    } else {
        num = mpz_class(2) * c[t.lhs.a] * c[t.lhs.b];
    }
    mpz_class nn = static_cast<unsigned long>(n);
    mpq_class r(num, (nn * nn - nn) * k);
    r.canonicalize();
    return r;
}

std::map<Config, mpq_class> step_distribution(const Protocol& p, const Config& c) {
    if (c.size() < 2) throw std::domain_error("configuration has fewer than two agents");
    std::map<Config, mpq_class> out;
    for (auto& t : p.transitions()) {
        if (!enabled(c, t)) continue;
        out[t.idle() ? c : fire(c, t)] += transition_probability(p, c, t);
    }
    return out;
}

}  // namespace stagebound
