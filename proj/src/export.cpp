#include "stagebound/export.hpp"

#include <sstream>

#include <json.hpp>

namespace stagebound {

using json = nlohmann::ordered_json;

namespace {

std::string head_str(const Protocol& p, Head h) { return p.state_name(h.a) + " " + p.state_name(h.b); }

std::string heads_str(const Protocol& p, const HeadSet& hs) {
    std::string s;
    for (Head h : hs) s += (s.empty() ? "" : ", ") + head_str(p, h);
    return "{" + s + "}";
}

json heads_json(const Protocol& p, const HeadSet& hs) {
    json a = json::array();
    for (Head h : hs) a.push_back({p.state_name(h.a), p.state_name(h.b)});
    return a;
}

json states_json(const Protocol& p, const std::vector<StateId>& qs) {
    json a = json::array();
    for (StateId q : qs) a.push_back(p.state_name(q));
    return a;
}

json valuation_json(const Protocol& p, const Valuation& v) {
    json a = json::array();
    for (auto& [atom, b] : v.entries()) a.push_back((b ? "" : "!") + atom_to_string(p, atom));
    return a;
}

std::string dot_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '"' || c == '\\') o += '\\';
        o += c;
    }
    return o;
}

Valuation valuation_from_json(const Protocol& p, const json& a) {
    Valuation v;
    for (auto& lit : a) {
        std::string s = lit.get<std::string>();
        bool val = true;
        if (!s.empty() && s[0] == '!') {
            val = false;
            s.erase(0, 1);
        }
        Atom atom;
        if (s == "Out0" || s == "Out1")
            atom = Atom::out(s == "Out1");
        else if (!s.empty() && s.back() == '!')
            atom = Atom::single(p.state_id(s.substr(0, s.size() - 1)));
        else
            atom = Atom::present(p.state_id(s));
        v.set(atom, val);
    }
    return v;
}

HeadSet heads_from_json(const Protocol& p, const json& a) {
    HeadSet hs;
    for (auto& h : a) hs.insert(Head(p.state_id(h.at(0).get<std::string>()), p.state_id(h.at(1).get<std::string>())));
    return hs;
}

}  // namespace

std::string stage_graph_dot(const Protocol& p, const StageGraph& g) {
    std::ostringstream os;
    os << "digraph stages {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (auto& s : g.stages) {
        std::string label = "S" + std::to_string(s.id) + " [" + kind_label(s.kind);
        if (s.consensus) label += " " + std::to_string(*s.consensus);
        label += "]\\nPhi: " + dot_escape(to_string(p, s.phi));
        label += "\\npi: " + dot_escape(to_string(p, s.pi));
        label += "\\nT: " + dot_escape(heads_str(p, s.t));
        os << "  s" << s.id << " [label=\"" << label << "\"";
        if (s.kind == StageKind::Stable) os << ", style=rounded";
        if (s.kind == StageKind::Dead || s.kind == StageKind::Exhausted) os << ", color=red";
        os << "];\n";
    }
    for (auto& s : g.stages)
        for (int c : s.children)
            os << "  s" << s.id << " -> s" << c << " [label=\"" << dot_escape(bound_label(g.stages[c].bound))
               << "\"];\n";
    os << "}\n";
    return os.str();
}

std::string stage_graph_json(const Protocol& p, const StageGraph& g) {
    auto rep = aggregate(p, g);
    json j;
    j["protocol"] = p.name();
    j["states"] = p.state_names();
    j["status"] = g.complete() ? "complete" : g.status == BuildStatus::Timeout ? "timeout" : "stage-limit";
    j["bound"] = bound_key(rep.overall);
    j["claim"] = claim_label(rep.claim);
    j["stage_count"] = rep.stages;
    json stages = json::array();
    for (auto& s : g.stages) {
        json e;
        e["id"] = s.id;
        e["parent"] = s.parent >= 0 ? json(s.parent) : json(nullptr);
        e["depth"] = s.depth;
        e["kind"] = kind_label(s.kind);
        e["consensus"] = s.consensus ? json(*s.consensus) : json(nullptr);
        e["bound"] = s.parent >= 0 ? json(bound_key(s.bound)) : json(nullptr);
        e["phi"] = to_string(p, s.phi);
        e["pi"] = valuation_json(p, s.pi);
        e["t"] = heads_json(p, s.t);
        e["children"] = s.children;
        if (s.analysis) {
            const CaseAnalysis& ca = *s.analysis;
            json a;
            a["via"] = valuation_json(p, ca.nu);
            a["pi_nu"] = valuation_json(p, ca.pi_nu);
            a["stable"] = ca.stable ? json(*ca.stable) : json(nullptr);
            a["dead"] = ca.dead;
            a["exp"] = heads_json(p, ca.exp);
            a["j"] = heads_json(p, ca.j);
            a["t_nu"] = heads_json(p, ca.t_nu);
            a["k"] = heads_json(p, ca.k);
            a["i_states"] = states_json(p, ca.i_states);
            a["l"] = heads_json(p, ca.l);
            a["u_states"] = states_json(p, ca.u_states);
            a["mode"] = mode_label(ca.mode);
            a["fast"] = ca.fast;
            a["very_fast"] = ca.very_fast;
            e["analysis"] = a;
        }
        stages.push_back(e);
    }
    j["stages"] = stages;
    return j.dump(2) + "\n";
}

StageGraph stage_graph_from_json(const Protocol& p, const std::string& text) {
    json j = json::parse(text);
    StageGraph g;
    for (auto& e : j.at("stages")) {
        Stage s;
        s.id = e.at("id").get<int>();
        if (s.id != static_cast<int>(g.stages.size())) throw std::runtime_error("stage ids must be dense and ordered");
        s.parent = e.at("parent").is_null() ? -1 : e.at("parent").get<int>();
        s.depth = e.value("depth", 0);
        std::string kind = e.at("kind").get<std::string>();
        if (kind == "internal")
            s.kind = StageKind::Internal;
        else if (kind == "stable")
            s.kind = StageKind::Stable;
        else if (kind == "dead")
            s.kind = StageKind::Dead;
        else if (kind == "exhausted")
            s.kind = StageKind::Exhausted;
        else
            throw std::runtime_error("unknown stage kind '" + kind + "'");
        if (e.contains("consensus") && !e["consensus"].is_null()) s.consensus = e["consensus"].get<int>();
        if (e.contains("bound") && !e["bound"].is_null())
            s.bound = parse_bound(e["bound"].get<std::string>()).value_or(Bound::Zero);
        s.phi = parse_formula(p, e.at("phi").get<std::string>());
        s.pi = valuation_from_json(p, e.at("pi"));
        s.t = heads_from_json(p, e.at("t"));
        s.children = e.at("children").get<std::vector<int>>();
        g.stages.push_back(std::move(s));
    }
    for (auto& s : g.stages)
        for (int c : s.children)
            if (c < 0 || c >= static_cast<int>(g.stages.size()))
                throw std::runtime_error("stage " + std::to_string(s.id) + " has unknown child " + std::to_string(c));
    return g;
}

}  // namespace stagebound
