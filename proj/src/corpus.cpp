#include "stagebound/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <tuple>

namespace stagebound::corpus {

namespace {

using Rules = std::vector<std::array<std::string, 4>>;
using Inputs = std::vector<std::pair<std::string, std::string>>;

Inputs same_named(const std::vector<std::string>& states) {
    Inputs in;
    for (auto& s : states) in.emplace_back(s, s);
    return in;
}

std::string num(long v) { return std::to_string(v); }

}  // namespace

Protocol broadcast() {
    return Protocol("broadcast", {"F", "T"}, same_named({"F", "T"}), {"T"}, {{"T", "F", "T", "T"}});
}

Protocol majority_ex1() {
    return Protocol("majority_ex1", {"A", "B", "a", "b"}, same_named({"A", "B"}), {"B", "b"},
                    {{"A", "B", "a", "b"}, {"A", "b", "A", "a"}, {"B", "a", "B", "b"}, {"b", "a", "b", "b"}});
}

Protocol majority_ex1_untied() {
    return Protocol("majority_ex1_untied", {"A", "B", "a", "b"}, same_named({"A", "B"}), {"B", "b"},
                    {{"A", "B", "a", "b"}, {"A", "b", "A", "a"}, {"B", "a", "B", "b"}});
}

Protocol majority_ex2() {
    return Protocol("majority_ex2", {"A", "B", "C", "a", "b"}, same_named({"A", "B"}), {"B", "b", "C"},
                    {{"A", "B", "b", "C"},
                     {"A", "C", "A", "a"},
                     {"B", "C", "B", "b"},
                     {"B", "a", "B", "b"},
                     {"A", "b", "A", "a"},
                     {"C", "a", "C", "b"}});
}

Protocol flock_aadfp(int c) {
    std::vector<std::string> q;
    for (int i = 0; i <= c; ++i) q.push_back(num(i));
    Rules t;
    for (int i = 0; i <= c; ++i)
        for (int j = i; j <= c; ++j) {
            if (i + j < c)
                t.push_back({num(i), num(j), num(i + j), "0"});
            else
                t.push_back({num(i), num(j), num(c), num(c)});
        }
    return Protocol("flock_aadfp_c" + num(c), q, same_named({"0", "1"}), {num(c)}, t);
}

Protocol flock_guidelines(int c) {
    std::vector<std::string> q;
    for (int i = 0; i <= c; ++i) q.push_back(num(i));
    Rules t;
    for (int i = 1; i < c; ++i) t.push_back({num(i), num(i), num(i), num(i + 1)});
    for (int i = 0; i < c; ++i) t.push_back({num(c), num(i), num(c), num(c)});
    return Protocol("flock_guidelines_c" + num(c), q, same_named({"0", "1"}), {num(c)}, t);
}

// Agents hold 0, a power of two 2^i, a partial sum 2^(j+1)-1, or the saturated value c.
Protocol log_flock(int k) {
    const long c = (1L << k) - 1;
    std::vector<std::string> p, q{"0"};
    for (int i = 0; i < k; ++i) p.push_back(num(1L << i));
    q.insert(q.end(), p.begin(), p.end());
    auto sum = [](int j) { return num((1L << (j + 1)) - 1); };
    for (int j = 1; j <= k - 2; ++j) q.push_back(sum(j));
    const std::string top = num(c);
    q.push_back(top);

    Rules t;
    for (int i = 0; i + 1 < k; ++i) t.push_back({p[i], p[i], p[i + 1], "0"});
    t.push_back({p[k - 1], p[k - 1], top, top});
    auto partial = [&](int j) { return j == 0 ? p[0] : sum(j); };
    for (int j = 0; j + 1 < k; ++j) {
        std::string next = j + 1 < k - 1 ? partial(j + 1) : top;
        t.push_back({partial(j), p[j + 1], next, next == top ? top : "0"});
    }
    for (auto& s : q) t.push_back({top, s, top, top});
    // collisions inside a partial sum collapse to the next power
    for (int j = 1; j <= k - 2; ++j) {
        for (int i = 0; i <= j; ++i) t.push_back({sum(j), p[i], p[j + 1], "0"});
        for (int l = 1; l <= j; ++l) t.push_back({sum(j), sum(l), p[j + 1], "0"});
    }
    return Protocol("log_flock_c" + top, q, same_named({"0", "1"}), {top}, t);
}

Protocol remainder(int m) {
    std::vector<std::string> q;
    for (int i = 0; i < m; ++i) q.push_back(num(i));
    q.push_back("t");
    q.push_back("f");
    Rules t;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            int s = (i + j) % m;
            t.push_back({num(i), num(j), num(s), s == 0 ? "t" : "f"});
        }
    for (int i = 0; i < m; ++i)
        for (const char* b : {"t", "f"}) t.push_back({num(i), b, num(i), i == 0 ? "t" : "f"});
    std::vector<std::string> in(q.begin() + 1, q.begin() + m);
    return Protocol("remainder_m" + num(m), q, same_named(in), {"0", "t"}, t);
}

// States (leader, output bit, value) with values clamped to [-s, s].
Protocol threshold(const std::vector<int>& a, int c) {
    int s = std::abs(c) + 1;
    for (int x : a) s = std::max(s, std::abs(x));
    auto name = [](int l, int b, int u) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%d%d%+d", l, b, u);
        return std::string(buf);
    };
    std::vector<std::tuple<int, int, int>> sts;
    for (int l : {0, 1})
        for (int b : {0, 1})
            for (int u = -s; u <= s; ++u) sts.emplace_back(l, b, u);
    std::vector<std::string> q, out1;
    for (auto [l, b, u] : sts) {
        q.push_back(name(l, b, u));
        if (b == 1) out1.push_back(name(l, b, u));
    }
    Rules t;
    for (size_t i = 0; i < sts.size(); ++i)
        for (size_t j = i; j < sts.size(); ++j) {
            auto [l1, b1, u1] = sts[i];
            auto [l2, b2, u2] = sts[j];
            if (l1 == 0 && l2 == 0) continue;
            int v = std::clamp(u1 + u2, -s, s);
            int r = u1 + u2 - v;
            int bit = v < c ? 1 : 0;
            t.push_back({q[i], q[j], name(1, bit, v), name(0, bit, r)});
        }
    Inputs in;
    for (size_t i = 0; i < a.size(); ++i) in.emplace_back("x" + num(i + 1), name(1, a[i] < c ? 1 : 0, a[i]));
    std::string label = "threshold";
    for (size_t i = 0; i < a.size(); ++i) label += "_" + num(a[i]);
    label += "_lt_" + num(c);
    return Protocol(label, q, in, out1, t);
}

// Strong values +-3..+-m (odd), intermediate +-1_j for j <= d, weak +-0.
Protocol average_and_conquer(int m, int d) {
    struct St {
        char kind;  // 's', 'i', 'w'
        int a;      // value for 's', level for 'i', sign for 'w'
        int sign;
    };
    std::vector<St> sts;
    for (int v = m; v > 1; v -= 2) {
        sts.push_back({'s', v, 1});
        sts.push_back({'s', -v, -1});
    }
    for (int j = 1; j <= d; ++j) {
        sts.push_back({'i', j, 1});
        sts.push_back({'i', j, -1});
    }
    sts.push_back({'w', 1, 1});
    sts.push_back({'w', -1, -1});

    auto name = [](const St& x) {
        std::string sg = x.sign > 0 ? "+" : "-";
        if (x.kind == 's') return sg + num(std::abs(x.a));
        if (x.kind == 'i') return sg + "1_" + num(x.a);
        return sg + "0";
    };
    auto value = [](const St& x) { return x.kind == 's' ? x.a : x.kind == 'i' ? x.sign : 0; };
    auto weight = [&](const St& x) { return std::abs(value(x)); };
    auto of_value = [](int v) -> St {
        if (v == 1) return {'i', 1, 1};
        if (v == -1) return {'i', 1, -1};
        return {'s', v, v > 0 ? 1 : -1};
    };
    auto floor_div2 = [](int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
    auto round_down = [&](int k) { return of_value(k % 2 ? k : k - 1); };
    auto round_up = [&](int k) { return of_value(k % 2 ? k : k + 1); };
    auto shift = [&](const St& x) -> St {
        if (x.kind == 'i' && x.a < d) return {'i', x.a + 1, x.sign};
        return x;
    };
    auto to_weak = [](const St& x) -> St { return {'w', x.sign, x.sign}; };
    auto last_level = [&](const St& x) { return x.kind == 'i' && x.a == d; };

    Rules t;
    for (size_t i = 0; i < sts.size(); ++i)
        for (size_t j = i; j < sts.size(); ++j) {
            const St &x = sts[i], &y = sts[j];
            St r0, r1;
            if ((weight(x) > 0 && weight(y) > 1) || (weight(y) > 0 && weight(x) > 1)) {
                int k = floor_div2(value(x) + value(y));
                r0 = round_down(k);
                r1 = round_up(k);
            } else if (weight(x) * weight(y) == 0 && value(x) + value(y) != 0) {
                if (weight(x) != 0) {
                    r0 = shift(x);
                    r1 = to_weak(x);
                } else {
                    r0 = to_weak(y);
                    r1 = shift(y);
                }
            } else if ((last_level(x) && weight(y) == 1 && x.sign != y.sign) ||
                       (last_level(y) && weight(x) == 1 && x.sign != y.sign)) {
                r0 = {'w', -1, -1};
                r1 = {'w', 1, 1};
            } else {
                r0 = shift(x);
                r1 = shift(y);
            }
            t.push_back({name(x), name(y), name(r0), name(r1)});
        }
    std::vector<std::string> q, out1;
    for (auto& x : sts) {
        q.push_back(name(x));
        if (x.sign > 0) out1.push_back(name(x));
    }
    return Protocol("avc_m" + num(m) + "_d" + num(d), q, same_named({name(sts[0]), name(sts[1])}), out1, t);
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> rows = {
        {"broadcast", "broadcast", [] { return broadcast(); }, 5, Bound::QuasiQuadratic, {}},
        {"majority_ex2", "majority (Example 2)", [] { return majority_ex2(); }, 13, Bound::QuasiQuadratic, {}},
        {"majority_ex1", "majority (Example 1)", [] { return majority_ex1(); }, 11, Bound::Exponential, 10},
        {"majority_ex1_untied", "majority (Example 1, no tie-break)", [] { return majority_ex1_untied(); }, 9,
         Bound::QuasiQuadratic, {}},
        {"flock_aadfp_c5", "flock-of-birds [AADFP06] c=5", [] { return flock_aadfp(5); }, 26, Bound::Cubic, {}},
        {"flock_aadfp_c10", "flock-of-birds [AADFP06] c=10", [] { return flock_aadfp(10); }, 46, Bound::Cubic, {}},
        {"flock_guidelines_c5", "flock-of-birds [guidelines] c=5", [] { return flock_guidelines(5); }, 54,
         Bound::Cubic, {}},
        {"flock_guidelines_c7", "flock-of-birds [guidelines] c=7", [] { return flock_guidelines(7); }, 198,
         Bound::Cubic, {}},
        {"log_flock_c15", "logarithmic flock c=15", [] { return log_flock(4); }, 66, Bound::Cubic, {}},
        {"log_flock_c31", "logarithmic flock c=31", [] { return log_flock(5); }, 130, Bound::Cubic, {}},
        {"remainder_m3", "remainder m=3", [] { return remainder(3); }, 27, Bound::QuasiQuadratic, {}},
        {"remainder_m5", "remainder m=5", [] { return remainder(5); }, 225, Bound::QuasiQuadratic, {}},
        {"avc_m3_d1", "average-and-conquer m=3 d=1", [] { return average_and_conquer(3, 1); }, 41,
         Bound::QuasiQuadratic, 33},
        {"threshold_-1_1_lt_0", "threshold -x1+x2<0", [] { return threshold({-1, 1}, 0); }, 21, Bound::Cubic, 29},
    };
    return rows;
}

const Entry* find(const std::string& name) {
    for (auto& e : entries())
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace stagebound::corpus
