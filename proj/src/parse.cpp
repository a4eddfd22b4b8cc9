#include <set>
#include <sstream>

#include <json.hpp>

#include "stagebound/protocol.hpp"

namespace stagebound {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

Protocol parse_protocol(const std::string& text) {
    std::string name = "protocol";
    std::vector<std::string> states;
    std::set<std::string> declared;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> out1;
    std::vector<std::array<std::string, 4>> rules;
    bool have_states = false, have_inputs = false, have_output = false, in_rules = false;

    auto need_state = [&](int ln, const std::string& s) {
        if (!declared.count(s)) throw ParseError(ln, "undeclared state '" + s + "'");
    };

    std::istringstream in(text);
    std::string raw;
    int ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        auto colon = line.find(':');
        std::string key = colon == std::string::npos ? "" : trim(line.substr(0, colon));
        std::string rest = colon == std::string::npos ? "" : trim(line.substr(colon + 1));

        if (line.rfind("protocol", 0) == 0 && colon == std::string::npos) {
            auto w = words(line);
            if (w.size() != 2) throw ParseError(ln, "expected 'protocol <name>'");
            name = w[1];
        } else if (key == "states") {
            in_rules = false;
            for (auto& s : words(rest)) {
                if (!declared.insert(s).second) throw ParseError(ln, "duplicate state '" + s + "'");
                states.push_back(s);
            }
            have_states = true;
        } else if (key == "inputs") {
            in_rules = false;
            std::istringstream items(rest);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                auto arrow = item.find("->");
                if (arrow == std::string::npos)
                    throw ParseError(ln, "input symbol '" + item + "' has no mapping");
                std::string sym = trim(item.substr(0, arrow)), st = trim(item.substr(arrow + 2));
                if (sym.empty() || st.empty()) throw ParseError(ln, "malformed input mapping '" + item + "'");
                need_state(ln, st);
                inputs.emplace_back(sym, st);
            }
            have_inputs = true;
        } else if (key == "output1") {
            in_rules = false;
            for (auto& s : words(rest)) {
                need_state(ln, s);
                out1.push_back(s);
            }
            have_output = true;
        } else if (key == "transitions") {
            in_rules = true;
            if (!rest.empty()) throw ParseError(ln, "rules go on the lines after 'transitions:'");
        } else if (in_rules) {
            auto arrow = line.find("->");
            if (arrow == std::string::npos) throw ParseError(ln, "expected 'A B -> C D'");
            auto l = words(line.substr(0, arrow)), r = words(line.substr(arrow + 2));
            if (l.size() != 2 || r.size() != 2) throw ParseError(ln, "a rule needs two states on each side");
            for (auto* s : {&l[0], &l[1], &r[0], &r[1]}) need_state(ln, *s);
            rules.push_back({l[0], l[1], r[0], r[1]});
        } else {
            throw ParseError(ln, "unrecognised line '" + line + "'");
        }
    }
    if (!have_states) throw ParseError(ln, "missing 'states:' declaration");
    if (!have_inputs || inputs.empty()) throw ParseError(ln, "missing 'inputs:' declaration");
    if (!have_output) throw ParseError(ln, "missing 'output1:' declaration");
    return Protocol(name, states, inputs, out1, rules);
}

Protocol parse_protocol_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    try {
        for (const char* k : {"states", "inputs", "output1", "transitions"})
            if (!j.contains(k)) throw ParseError(0, std::string("missing key '") + k + "'");
        std::vector<std::string> states = j.at("states").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> inputs;
        const auto& ji = j.at("inputs");
        if (ji.is_object()) {
            for (auto it = ji.begin(); it != ji.end(); ++it) inputs.emplace_back(it.key(), it.value().get<std::string>());
        } else {
            for (auto& e : ji) {
                auto v = e.get<std::vector<std::string>>();
                if (v.size() != 2) throw ParseError(0, "input entries are [symbol, state]");
                inputs.emplace_back(v[0], v[1]);
            }
        }
        auto out1 = j.at("output1").get<std::vector<std::string>>();
        std::vector<std::array<std::string, 4>> rules;
        for (auto& r : j.at("transitions")) {
            auto v = r.get<std::vector<std::string>>();
            if (v.size() != 4) throw ParseError(0, "transitions are 4-element arrays");
            rules.push_back({v[0], v[1], v[2], v[3]});
        }
        return Protocol(j.value("name", std::string("protocol")), states, inputs, out1, rules);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("bad protocol JSON: ") + e.what());
    }
}

Protocol load_protocol_text(const std::string& text) {
    auto p = text.find_first_not_of(" \t\r\n");
    if (p != std::string::npos && text[p] == '{') return parse_protocol_json(text);
    return parse_protocol(text);
}

std::string protocol_to_text(const Protocol& p) {
    std::ostringstream o;
    o << "protocol " << p.name() << "\nstates:";
    for (auto& s : p.state_names()) o << ' ' << s;
    o << "\ninputs: ";
    for (size_t i = 0; i < p.inputs().size(); ++i)
        o << (i ? ", " : "") << p.inputs()[i].first << " -> " << p.state_name(p.inputs()[i].second);
    o << "\noutput1:";
    for (int q = 0; q < p.num_states(); ++q)
        if (p.output(q)) o << ' ' << p.state_name(q);
    o << "\ntransitions:\n";
    for (auto& t : p.transitions()) {
        if (!t.explicit_rule) continue;
        o << "  " << p.state_name(t.lhs.a) << ' ' << p.state_name(t.lhs.b) << " -> "
          << p.state_name(t.rhs.a) << ' ' << p.state_name(t.rhs.b) << '\n';
    }
    return o.str();
}

}  // namespace stagebound
