#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace stagebound {

using StateId = int;

// Unordered pair of states, stored sorted.
struct Head {
    StateId a = 0;
    StateId b = 0;
    Head() = default;
    Head(StateId x, StateId y) : a(x < y ? x : y), b(x < y ? y : x) {}
    bool contains(StateId q) const { return a == q || b == q; }
    StateId other(StateId q) const { return a == q ? b : a; }
    auto operator<=>(const Head&) const = default;
};

struct Transition {
    Head lhs;
    Head rhs;
    bool explicit_rule = true;
    bool idle() const { return lhs == rhs; }
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& msg)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class Protocol {
public:
    Protocol() = default;
    Protocol(std::string name, std::vector<std::string> states,
             std::vector<std::pair<std::string, std::string>> inputs,
             std::vector<std::string> output1,
             const std::vector<std::array<std::string, 4>>& rules);

    const std::string& name() const { return name_; }
    int num_states() const { return static_cast<int>(states_.size()); }
    const std::string& state_name(StateId q) const { return states_.at(q); }
    const std::vector<std::string>& state_names() const { return states_; }
    StateId state_id(const std::string& s) const;
    bool has_state(const std::string& s) const { return index_.count(s) != 0; }

    int output(StateId q) const { return out_[q]; }
    const std::vector<std::pair<std::string, StateId>>& inputs() const { return inputs_; }
    std::vector<StateId> input_states() const;  // I(Sigma), sorted, unique

    // All transitions, implicit idle ones included.
    const std::vector<Transition>& transitions() const { return trans_; }
    const std::vector<Transition>& non_idle() const { return nonidle_; }
    int explicit_count() const { return explicit_count_; }
    // Indices into transitions() for a head.
    const std::vector<int>& rules_for(Head h) const { return by_head_[head_index(h)]; }
    // A! is an atom iff some non-idle AA rule exists.
    bool has_singleton(StateId q) const { return bang_[q]; }

    int head_index(Head h) const { return h.a * num_states() + h.b; }

private:
    std::string name_;
    std::vector<std::string> states_;
    std::map<std::string, StateId> index_;
    std::vector<int> out_;
    std::vector<std::pair<std::string, StateId>> inputs_;
    std::vector<Transition> trans_;
    std::vector<Transition> nonidle_;
    std::vector<std::vector<int>> by_head_;
    std::vector<bool> bang_;
    int explicit_count_ = 0;
};

class Config {
public:
    Config() = default;
    explicit Config(std::vector<uint32_t> counts) : c_(std::move(counts)) {}
    static Config zero(int nstates) { return Config(std::vector<uint32_t>(nstates, 0)); }

    uint32_t operator[](StateId q) const { return c_[q]; }
    uint32_t& operator[](StateId q) { return c_[q]; }
    uint64_t size() const;
    int num_states() const { return static_cast<int>(c_.size()); }
    const std::vector<uint32_t>& counts() const { return c_; }
    auto operator<=>(const Config&) const = default;

    std::string str(const Protocol& p) const;

private:
    std::vector<uint32_t> c_;
};

struct ConfigHash {
    size_t operator()(const Config& c) const noexcept;
};

Config initial_configuration(const Protocol& p, const std::map<std::string, uint64_t>& input);
// Parses "A=2,B=1" (state names).
Config parse_config_spec(const Protocol& p, const std::string& spec);

bool enabled(const Config& c, const Transition& t);
Config fire(const Config& c, const Transition& t);
mpq_class transition_probability(const Protocol& p, const Config& c, const Transition& t);
// Successor -> probability, in successor order.
std::map<Config, mpq_class> step_distribution(const Protocol& p, const Config& c);

Protocol parse_protocol(const std::string& text);
Protocol parse_protocol_json(const std::string& text);
// Picks the format from the first non-space character.
Protocol load_protocol_text(const std::string& text);
std::string protocol_to_text(const Protocol& p);

}  // namespace stagebound
