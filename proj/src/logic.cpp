#include "stagebound/logic.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace stagebound {

struct Formula::Node {
    Op op;
    Atom atom;
    std::vector<Formula> kids;
};

const std::shared_ptr<const Formula::Node>& Formula::true_node() {
    static const auto n = std::make_shared<const Node>(Node{Op::True, {}, {}});
    return n;
}
const std::shared_ptr<const Formula::Node>& Formula::false_node() {
    static const auto n = std::make_shared<const Node>(Node{Op::False, {}, {}});
    return n;
}

Formula::Formula() : n_(true_node()) {}
Formula Formula::tt() { return Formula(true_node()); }
Formula Formula::ff() { return Formula(false_node()); }
Formula Formula::var(Atom a) { return Formula(std::make_shared<const Node>(Node{Op::Var, a, {}})); }

Formula Formula::conj(std::vector<Formula> fs) {
    std::vector<Formula> out;
    for (auto& f : fs) {
        if (f.is_false()) return ff();
        if (f.is_true()) continue;
        if (f.op() == Op::And)
            out.insert(out.end(), f.kids().begin(), f.kids().end());
        else
            out.push_back(f);
    }
    if (out.empty()) return tt();
    if (out.size() == 1) return out[0];
    return Formula(std::make_shared<const Node>(Node{Op::And, {}, std::move(out)}));
}

Formula Formula::disj(std::vector<Formula> fs) {
    std::vector<Formula> out;
    for (auto& f : fs) {
        if (f.is_true()) return tt();
        if (f.is_false()) continue;
        if (f.op() == Op::Or)
            out.insert(out.end(), f.kids().begin(), f.kids().end());
        else
            out.push_back(f);
    }
    if (out.empty()) return ff();
    if (out.size() == 1) return out[0];
    return Formula(std::make_shared<const Node>(Node{Op::Or, {}, std::move(out)}));
}

Formula Formula::negate(const Formula& f) {
    if (f.is_true()) return ff();
    if (f.is_false()) return tt();
    if (f.op() == Op::Not) return f.kids()[0];
    return Formula(std::make_shared<const Node>(Node{Op::Not, {}, {f}}));
}

Formula Formula::implies(const Formula& a, const Formula& b) {
    if (a.is_true()) return b;
    if (a.is_false() || b.is_true()) return tt();
    if (b.is_false()) return negate(a);
    return Formula(std::make_shared<const Node>(Node{Op::Implies, {}, {a, b}}));
}

Formula::Op Formula::op() const { return n_->op; }
const Atom& Formula::atom() const { return n_->atom; }
const std::vector<Formula>& Formula::kids() const { return n_->kids; }

void Formula::collect_atoms(std::vector<Atom>& out) const {
    if (op() == Op::Var) out.push_back(atom());
    for (auto& k : kids()) k.collect_atoms(out);
}

std::vector<Atom> Formula::atoms() const {
    std::vector<Atom> a;
    collect_atoms(a);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

bool Formula::operator==(const Formula& o) const {
    if (n_ == o.n_) return true;
    if (op() != o.op()) return false;
    if (op() == Op::Var) return atom() == o.atom();
    if (kids().size() != o.kids().size()) return false;
    for (size_t i = 0; i < kids().size(); ++i)
        if (!(kids()[i] == o.kids()[i])) return false;
    return true;
}

bool Valuation::consistent() const {
    for (auto& [a, v] : m_)
        if (a.kind == AtomKind::Single && v && is(Atom::present(a.state), false)) return false;
    return true;
}

Formula xi(const Protocol& p, Head h) {
    if (h.a != h.b) return !Formula::present(h.a) || !Formula::present(h.b);
    if (p.has_singleton(h.a)) return !Formula::present(h.a) || Formula::single(h.a);
    return Formula::tt();
}

Formula heads_formula(const Protocol& p, const std::vector<Head>& hs) {
    std::vector<Formula> fs;
    for (auto h : hs) fs.push_back(xi(p, h));
    return Formula::conj(std::move(fs));
}

Formula valuation_formula(const Valuation& v) {
    std::vector<Formula> fs;
    for (auto& [a, b] : v.entries()) fs.push_back(b ? Formula::var(a) : !Formula::var(a));
    return Formula::conj(std::move(fs));
}

// ---------------------------------------------------------------------------
// Search over consistent assignments.

namespace {

struct Compiled {
    struct N {
        Formula::Op op;
        int var;
        int first;
        int count;
    };
    std::vector<Atom> atoms;
    std::vector<int> companion;  // Single -> its Present, Present -> its Single, else -1
    std::vector<N> nodes;
    std::vector<int> kids;
    int root = 0;

    explicit Compiled(const Formula& f) {
        atoms = f.atoms();
        std::vector<Atom> extra;
        for (auto& a : atoms)
            if (a.kind == AtomKind::Single) extra.push_back(Atom::present(a.state));
        atoms.insert(atoms.end(), extra.begin(), extra.end());
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
        companion.assign(atoms.size(), -1);
        for (size_t i = 0; i + 1 < atoms.size(); ++i) {
            if (atoms[i].kind == AtomKind::Present && atoms[i + 1].kind == AtomKind::Single &&
                atoms[i + 1].state == atoms[i].state) {
                companion[i] = static_cast<int>(i + 1);
                companion[i + 1] = static_cast<int>(i);
            }
        }
        root = add(f);
    }

    int index_of(const Atom& a) const {
        return static_cast<int>(std::lower_bound(atoms.begin(), atoms.end(), a) - atoms.begin());
    }

    int add(const Formula& f) {
        std::vector<int> ks;
        for (auto& k : f.kids()) ks.push_back(add(k));
        N n{f.op(), f.op() == Formula::Op::Var ? index_of(f.atom()) : -1, static_cast<int>(kids.size()),
            static_cast<int>(ks.size())};
        kids.insert(kids.end(), ks.begin(), ks.end());
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    // 1 true, 0 false, -1 open
    int eval(int i, const std::vector<int8_t>& v) const {
        const N& n = nodes[i];
        switch (n.op) {
            case Formula::Op::True: return 1;
            case Formula::Op::False: return 0;
            case Formula::Op::Var: return v[n.var];
            case Formula::Op::Not: {
                int r = eval(kids[n.first], v);
                return r < 0 ? r : 1 - r;
            }
            case Formula::Op::And: {
                int res = 1;
                for (int k = 0; k < n.count; ++k) {
                    int r = eval(kids[n.first + k], v);
                    if (r == 0) return 0;
                    if (r < 0) res = -1;
                }
                return res;
            }
            case Formula::Op::Or: {
                int res = 0;
                for (int k = 0; k < n.count; ++k) {
                    int r = eval(kids[n.first + k], v);
                    if (r == 1) return 1;
                    if (r < 0) res = -1;
                }
                return res;
            }
            case Formula::Op::Implies: {
                int a = eval(kids[n.first], v);
                if (a == 0) return 1;
                int b = eval(kids[n.first + 1], v);
                if (b == 1) return 1;
                if (a == 1) return b;
                return -1;
            }
        }
        return -1;
    }

    // Assigns and propagates A! => A. Returns false on conflict; trail records changes.
    bool assign(int i, bool val, std::vector<int8_t>& v, std::vector<int>& trail) const {
        if (v[i] >= 0) return v[i] == static_cast<int8_t>(val);
        v[i] = val;
        trail.push_back(i);
        int c = companion[i];
        if (c < 0) return true;
        if (atoms[i].kind == AtomKind::Single && val) return assign(c, true, v, trail);
        if (atoms[i].kind == AtomKind::Present && !val) return assign(c, false, v, trail);
        return true;
    }

    static void undo(std::vector<int8_t>& v, std::vector<int>& trail, size_t mark) {
        while (trail.size() > mark) {
            v[trail.back()] = -1;
            trail.pop_back();
        }
    }

    bool sat(std::vector<int8_t>& v, std::vector<int>& trail) const {
        int r = eval(root, v);
        if (r == 1) return true;
        if (r == 0) return false;
        int pick = -1;
        for (size_t i = 0; i < atoms.size(); ++i)
            if (v[i] < 0) {
                pick = static_cast<int>(i);
                break;
            }
        if (pick < 0) return false;
        for (bool val : {true, false}) {
            size_t mark = trail.size();
            if (assign(pick, val, v, trail) && sat(v, trail)) return true;
            undo(v, trail, mark);
        }
        return false;
    }

    bool seed_units(std::vector<int8_t>& v, std::vector<int>& trail) const {
        const N& r = nodes[root];
        auto unit = [&](int i) -> bool {
            const N& n = nodes[i];
            if (n.op == Formula::Op::Var) return assign(n.var, true, v, trail);
            if (n.op == Formula::Op::Not && nodes[kids[n.first]].op == Formula::Op::Var)
                return assign(nodes[kids[n.first]].var, false, v, trail);
            return true;
        };
        if (r.op == Formula::Op::And) {
            for (int k = 0; k < r.count; ++k)
                if (!unit(kids[r.first + k])) return false;
            return true;
        }
        return unit(root);
    }

    void enumerate(size_t i, std::vector<int8_t>& v, std::vector<int>& trail, std::vector<Valuation>& out) const {
        if (eval(root, v) == 0) return;
        while (i < atoms.size() && v[i] >= 0) ++i;
        if (i == atoms.size()) {
            if (eval(root, v) != 1) return;
            Valuation val;
            for (size_t k = 0; k < atoms.size(); ++k) val.set(atoms[k], v[k] == 1);
            out.push_back(std::move(val));
            return;
        }
        for (bool b : {true, false}) {
            size_t mark = trail.size();
            if (assign(static_cast<int>(i), b, v, trail)) enumerate(i + 1, v, trail, out);
            undo(v, trail, mark);
        }
    }
};

}  // namespace

bool satisfiable(const Formula& f) {
    if (f.is_true()) return true;
    if (f.is_false()) return false;
    Compiled c(f);
    std::vector<int8_t> v(c.atoms.size(), -1);
    std::vector<int> trail;
    if (!c.seed_units(v, trail)) return false;
    return c.sat(v, trail);
}

bool is_tautology(const Formula& f) { return !satisfiable(!f); }

bool entails(const Formula& a, const Formula& b) { return !satisfiable(a && !b); }

std::vector<Valuation> enumerate_satisfying_valuations(const Formula& f) {
    std::vector<Valuation> out;
    if (f.is_false()) return out;
    Compiled c(f);
    std::vector<int8_t> v(c.atoms.size(), -1);
    std::vector<int> trail;
    c.enumerate(0, v, trail, out);
    return out;
}

bool config_satisfies(const Protocol& p, const Config& c, const Formula& f) {
    switch (f.op()) {
        case Formula::Op::True: return true;
        case Formula::Op::False: return false;
        case Formula::Op::Var: {
            const Atom& a = f.atom();
            switch (a.kind) {
                case AtomKind::Present: return c[a.state] > 0;
                case AtomKind::Single: return c[a.state] == 1;
                case AtomKind::Out0:
                case AtomKind::Out1: {
                    int x = a.kind == AtomKind::Out1 ? 1 : 0;
                    for (int q = 0; q < c.num_states(); ++q)
                        if (c[q] > 0 && p.output(q) != x) return false;
                    return true;
                }
            }
            return false;
        }
        case Formula::Op::Not: return !config_satisfies(p, c, f.kids()[0]);
        case Formula::Op::And:
            for (auto& k : f.kids())
                if (!config_satisfies(p, c, k)) return false;
            return true;
        case Formula::Op::Or:
            for (auto& k : f.kids())
                if (config_satisfies(p, c, k)) return true;
            return false;
        case Formula::Op::Implies:
            return !config_satisfies(p, c, f.kids()[0]) || config_satisfies(p, c, f.kids()[1]);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Text form.

std::string atom_to_string(const Protocol& p, const Atom& a) {
    switch (a.kind) {
        case AtomKind::Present: return p.state_name(a.state);
        case AtomKind::Single: return p.state_name(a.state) + "!";
        case AtomKind::Out0: return "Out0";
        case AtomKind::Out1: return "Out1";
    }
    return "?";
}

namespace {
int prec(Formula::Op op) {
    switch (op) {
        case Formula::Op::Implies: return 1;
        case Formula::Op::Or: return 2;
        case Formula::Op::And: return 3;
        case Formula::Op::Not: return 4;
        default: return 5;
    }
}

void print(const Protocol& p, const Formula& f, std::string& out) {
    auto sub = [&](const Formula& k, int min_prec) {
        bool paren = prec(k.op()) < min_prec;
        if (paren) out += '(';
        print(p, k, out);
        if (paren) out += ')';
    };
    switch (f.op()) {
        case Formula::Op::True: out += "true"; break;
        case Formula::Op::False: out += "false"; break;
        case Formula::Op::Var: out += atom_to_string(p, f.atom()); break;
        case Formula::Op::Not:
            out += '!';
            sub(f.kids()[0], 5);
            break;
        case Formula::Op::And:
        case Formula::Op::Or: {
            const char* sep = f.op() == Formula::Op::And ? " & " : " | ";
            for (size_t i = 0; i < f.kids().size(); ++i) {
                if (i) out += sep;
                sub(f.kids()[i], prec(f.op()) + 1);
            }
            break;
        }
        case Formula::Op::Implies:
            sub(f.kids()[0], 2);
            out += " => ";
            sub(f.kids()[1], 1);
            break;
    }
}
}  // namespace

std::string to_string(const Protocol& p, const Formula& f) {
    std::string s;
    print(p, f, s);
    return s;
}

std::string to_string(const Protocol& p, const Valuation& v) {
    std::string s;
    for (auto& [a, b] : v.entries()) {
        if (!s.empty()) s += ' ';
        s += (b ? "" : "!") + atom_to_string(p, a);
    }
    return s.empty() ? "{}" : s;
}

namespace {
class FormulaParser {
public:
    FormulaParser(const Protocol& p, const std::string& s) : p_(p), s_(s) {}

    Formula parse() {
        Formula f = implication();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + s_.substr(i_, 1) + "'");
        return f;
    }

private:
    const Protocol& p_;
    const std::string& s_;
    size_t i_ = 0;

    [[noreturn]] void fail(const std::string& m) const {
        throw ParseError(0, "formula at offset " + std::to_string(i_) + ": " + m);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(const std::string& tok) {
        skip();
        if (s_.compare(i_, tok.size(), tok) == 0) {
            i_ += tok.size();
            return true;
        }
        return false;
    }
    static bool name_char(char c) {
        return !std::isspace(static_cast<unsigned char>(c)) && std::string("!&|()=>").find(c) == std::string::npos;
    }

    Formula implication() {
        Formula a = disjunction();
        if (eat("=>")) return Formula::implies(a, implication());
        return a;
    }
    Formula disjunction() {
        std::vector<Formula> fs{conjunction()};
        while (eat("|")) fs.push_back(conjunction());
        return fs.size() == 1 ? fs[0] : Formula::disj(fs);
    }
    Formula conjunction() {
        std::vector<Formula> fs{unary()};
        while (eat("&")) fs.push_back(unary());
        return fs.size() == 1 ? fs[0] : Formula::conj(fs);
    }
    Formula unary() {
        skip();
        if (eat("!")) return !unary();
        if (eat("(")) {
            Formula f = implication();
            if (!eat(")")) fail("expected ')'");
            return f;
        }
        size_t b = i_;
        while (i_ < s_.size() && name_char(s_[i_])) ++i_;
        if (b == i_) fail("expected an atom");
        std::string name = s_.substr(b, i_ - b);
        bool bang = i_ < s_.size() && s_[i_] == '!';
        if (bang) ++i_;
        if (!bang && name == "true") return Formula::tt();
        if (!bang && name == "false") return Formula::ff();
        if (!bang && name == "Out0") return Formula::var(Atom::out(0));
        if (!bang && name == "Out1") return Formula::var(Atom::out(1));
        if (!p_.has_state(name)) fail("unknown state '" + name + "'");
        StateId q = p_.state_id(name);
        return bang ? Formula::single(q) : Formula::present(q);
    }
};
}  // namespace

Formula parse_formula(const Protocol& p, const std::string& text) { return FormulaParser(p, text).parse(); }

}  // namespace stagebound
