#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagebound/protocol.hpp"

namespace stagebound {

enum class AtomKind : uint8_t { Present = 0, Single = 1, Out0 = 2, Out1 = 3 };

struct Atom {
    AtomKind kind = AtomKind::Present;
    StateId state = 0;

    static Atom present(StateId q) { return {AtomKind::Present, q}; }
    static Atom single(StateId q) { return {AtomKind::Single, q}; }
    static Atom out(int x) { return {x ? AtomKind::Out1 : AtomKind::Out0, -1}; }

    // A, A!, B, B!, ..., then Out0, Out1.
    long key() const {
        if (kind == AtomKind::Out0 || kind == AtomKind::Out1) return (1L << 40) + static_cast<int>(kind);
        return 2L * state + static_cast<int>(kind);
    }
    bool operator==(const Atom& o) const { return key() == o.key(); }
    bool operator<(const Atom& o) const { return key() < o.key(); }
};

class Formula {
public:
    enum class Op : uint8_t { True, False, Var, Not, And, Or, Implies };

    Formula();  // true
    static Formula tt();
    static Formula ff();
    static Formula var(Atom a);
    static Formula present(StateId q) { return var(Atom::present(q)); }
    static Formula single(StateId q) { return var(Atom::single(q)); }
    static Formula conj(std::vector<Formula> fs);
    static Formula disj(std::vector<Formula> fs);
    static Formula implies(const Formula& a, const Formula& b);
    static Formula negate(const Formula& f);

    Op op() const;
    const Atom& atom() const;
    const std::vector<Formula>& kids() const;
    bool is_true() const { return op() == Op::True; }
    bool is_false() const { return op() == Op::False; }

    void collect_atoms(std::vector<Atom>& out) const;
    std::vector<Atom> atoms() const;  // sorted, unique

    bool operator==(const Formula& o) const;

private:
    struct Node;
    static const std::shared_ptr<const Node>& true_node();
    static const std::shared_ptr<const Node>& false_node();
    explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    std::shared_ptr<const Node> n_;
};

inline Formula operator!(const Formula& f) { return Formula::negate(f); }
inline Formula operator&&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
inline Formula operator||(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }

// Partial assignment of atoms.
class Valuation {
public:
    Valuation() = default;
    std::optional<bool> get(const Atom& a) const {
        auto it = m_.find(a);
        if (it == m_.end()) return std::nullopt;
        return it->second;
    }
    bool is(const Atom& a, bool v) const {
        auto g = get(a);
        return g && *g == v;
    }
    void set(const Atom& a, bool v) { m_[a] = v; }
    bool empty() const { return m_.empty(); }
    size_t size() const { return m_.size(); }
    const std::map<Atom, bool>& entries() const { return m_; }
    bool consistent() const;
    bool operator==(const Valuation& o) const { return m_ == o.m_; }

private:
    std::map<Atom, bool> m_;
};

// Condition "no non-idle transition with this head can fire".
Formula xi(const Protocol& p, Head h);
Formula heads_formula(const Protocol& p, const std::vector<Head>& hs);
Formula valuation_formula(const Valuation& v);

bool satisfiable(const Formula& f);
bool is_tautology(const Formula& f);
bool entails(const Formula& a, const Formula& b);
std::vector<Valuation> enumerate_satisfying_valuations(const Formula& f);

bool config_satisfies(const Protocol& p, const Config& c, const Formula& f);

std::string atom_to_string(const Protocol& p, const Atom& a);
std::string to_string(const Protocol& p, const Formula& f);
std::string to_string(const Protocol& p, const Valuation& v);
Formula parse_formula(const Protocol& p, const std::string& text);

}  // namespace stagebound
