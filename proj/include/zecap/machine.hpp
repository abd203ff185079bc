#pragma once

// Finite-state additive noise channels: the labeled noise machine, its
// validation, the JSON machine document, and a stepping session.

#include <zecap/errors.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zecap {

using Symbol = std::uint32_t;
using State = std::uint32_t;
using Word = std::vector<Symbol>;

struct Edge {
    State from = 0;
    State to = 0;
    Symbol noise = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge& a, const Edge& b) {
        return std::tie(a.from, a.noise, a.to) <=> std::tie(b.from, b.noise, b.to);
    }
};

/// Raw, unchecked machine data as read from a document.
struct MachineDescription {
    std::uint32_t q = 0;
    std::uint32_t num_states = 0;
    std::vector<Edge> edges;
};

inline Symbol add_mod(Symbol a, Symbol b, std::uint32_t q) { return (a + b) % q; }
inline Symbol sub_mod(Symbol a, Symbol b, std::uint32_t q) { return (a + q - b % q) % q; }

struct InvariantCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<InvariantCheck> checks;

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }

    bool passed(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return c.passed;
        return false;
    }

    std::string failures() const {
        std::string out;
        for (const auto& c : checks) {
            if (c.passed) continue;
            if (!out.empty()) out += "; ";
            out += c.name + ": " + c.detail;
        }
        return out;
    }
};

namespace detail {

inline std::vector<bool> reachable(std::uint32_t n, const std::vector<Edge>& edges, bool reverse) {
    std::vector<std::vector<State>> adj(n);
    for (const auto& e : edges) {
        if (e.from >= n || e.to >= n) continue;
        if (reverse) adj[e.to].push_back(e.from);
        else adj[e.from].push_back(e.to);
    }
    std::vector<bool> seen(n, false);
    if (n == 0) return seen;
    std::vector<State> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        for (State t : adj[s]) {
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
        }
    }
    return seen;
}

} // namespace detail

/// Checks every structural invariant of a noise machine and reports each one.
///
/// Strong connectivity is decided by a forward and a reverse reachability
/// sweep from state 0.
inline ValidationReport validate(const MachineDescription& d) {
    ValidationReport r;
    const auto n = d.num_states;

    InvariantCheck alphabet{"alphabet", d.q >= 2, ""};
    if (!alphabet.passed) alphabet.detail = "q must be at least 2, got " + std::to_string(d.q);
    r.checks.push_back(alphabet);

    InvariantCheck states{"states", n >= 1, ""};
    if (!states.passed) states.detail = "machine needs at least one state";
    r.checks.push_back(states);

    InvariantCheck endpoints{"edge-endpoints", true, ""};
    InvariantCheck labels{"noise-range", true, ""};
    for (const auto& e : d.edges) {
        if (endpoints.passed && (e.from >= n || e.to >= n)) {
            endpoints.passed = false;
            endpoints.detail = "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                               " references a state outside 0.." + std::to_string(n == 0 ? 0 : n - 1);
        }
        if (labels.passed && e.noise >= d.q) {
            labels.passed = false;
            labels.detail = "noise label " + std::to_string(e.noise) + " is not below q=" + std::to_string(d.q);
        }
    }
    r.checks.push_back(endpoints);
    r.checks.push_back(labels);

    InvariantCheck distinct{"distinct-labels", true, ""};
    InvariantCheck live{"liveness", true, ""};
    std::vector<std::vector<Symbol>> out(n);
    for (const auto& e : d.edges)
        if (e.from < n) out[e.from].push_back(e.noise);
    for (State s = 0; s < n; ++s) {
        auto& labs = out[s];
        std::sort(labs.begin(), labs.end());
        if (distinct.passed && std::adjacent_find(labs.begin(), labs.end()) != labs.end()) {
            distinct.passed = false;
            distinct.detail = "state " + std::to_string(s) + " has two outgoing edges with the same noise label";
        }
        if (live.passed && labs.empty()) {
            live.passed = false;
            live.detail = "state " + std::to_string(s) + " has no outgoing edge";
        }
    }
    r.checks.push_back(distinct);
    r.checks.push_back(live);

    InvariantCheck connected{"strong-connectivity", true, ""};
    if (n > 0) {
        auto fwd = detail::reachable(n, d.edges, false);
        auto bwd = detail::reachable(n, d.edges, true);
        for (State s = 0; s < n; ++s) {
            if (!fwd[s] || !bwd[s]) {
                connected.passed = false;
                connected.detail = "state " + std::to_string(s) +
                                   (fwd[s] ? " cannot reach state 0" : " is unreachable from state 0");
                break;
            }
        }
    }
    r.checks.push_back(connected);
    return r;
}

/// A validated, immutable noise machine.
///
/// States are 0..num_states()-1. Edges are kept sorted by (from, noise), so the
/// outgoing edges of a state are contiguous and ordered by noise label.
class NoiseMachine {
public:
    explicit NoiseMachine(MachineDescription d) {
        auto report = validate(d);
        if (!report.ok()) throw ValidationError("invalid noise machine: " + report.failures());
        q_ = d.q;
        n_ = d.num_states;
        edges_ = std::move(d.edges);
        std::sort(edges_.begin(), edges_.end());
        first_.assign(n_ + 1, 0);
        for (const auto& e : edges_) ++first_[e.from + 1];
        for (State s = 0; s < n_; ++s) first_[s + 1] += first_[s];
    }

    std::uint32_t q() const noexcept { return q_; }
    std::uint32_t num_states() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const Edge> out_edges(State s) const {
        return std::span<const Edge>(edges_).subspan(first_[s], first_[s + 1] - first_[s]);
    }

    std::size_t out_degree(State s) const { return first_[s + 1] - first_[s]; }

    /// Successor of `s` under noise `z`, if `z` labels an outgoing edge.
    std::optional<State> next(State s, Symbol z) const {
        for (const auto& e : out_edges(s))
            if (e.noise == z) return e.to;
        return std::nullopt;
    }

    std::uint32_t max_label() const {
        std::uint32_t m = 0;
        for (const auto& e : edges_) m = std::max(m, e.noise);
        return m;
    }

    /// Same graph over a different alphabet; `q` must exceed every label.
    NoiseMachine with_alphabet(std::uint32_t q) const {
        if (q <= max_label())
            throw ValidationError("alphabet size " + std::to_string(q) + " does not cover noise label " +
                                  std::to_string(max_label()));
        return NoiseMachine(description_with(q));
    }

    MachineDescription description() const { return description_with(q_); }

    friend bool operator==(const NoiseMachine& a, const NoiseMachine& b) {
        return a.q_ == b.q_ && a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    MachineDescription description_with(std::uint32_t q) const { return {q, n_, edges_}; }

    std::uint32_t q_ = 0;
    std::uint32_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> first_;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline std::uint32_t require_count(const nlohmann::json& j, const char* what) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0 || j.get<std::int64_t>() > 0xFFFFFFFFLL)
        throw ParseError(std::string("field '") + what + "' must be a non-negative integer", 0, 0);
    return static_cast<std::uint32_t>(j.get<std::int64_t>());
}

} // namespace detail

/// Reads the fields of a machine document without validating the machine.
inline MachineDescription parse_description(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports the offending byte 1-based.
        auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                             ": " + e.what(),
                         line, col);
    }
    if (!doc.is_object()) throw ParseError("machine document must be a JSON object", 1, 1);
    for (const auto& [key, _] : doc.items()) {
        if (key != "q" && key != "states" && key != "edges" && key != "name")
            throw ParseError("unknown field '" + key + "'", 0, 0);
    }
    for (const char* key : {"q", "states", "edges"})
        if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0, 0);

    MachineDescription d;
    d.q = detail::require_count(doc["q"], "q");
    // `states` is a count, or a list of names numbered in declaration order.
    std::map<std::string, std::uint32_t> names;
    if (doc["states"].is_array()) {
        for (const auto& name : doc["states"]) {
            if (!name.is_string()) throw ParseError("state names must be strings", 0, 0);
            if (!names.emplace(name.get<std::string>(), static_cast<std::uint32_t>(names.size())).second)
                throw ParseError("duplicate state name '" + name.get<std::string>() + "'", 0, 0);
        }
        d.num_states = static_cast<std::uint32_t>(names.size());
    } else {
        d.num_states = detail::require_count(doc["states"], "states");
    }
    auto state = [&](const nlohmann::json& j, const char* what) {
        if (!j.is_string()) return detail::require_count(j, what);
        auto it = names.find(j.get<std::string>());
        if (it == names.end()) throw ParseError("unknown state name '" + j.get<std::string>() + "'", 0, 0);
        return it->second;
    };
    const auto& edges = doc["edges"];
    if (!edges.is_array()) throw ParseError("field 'edges' must be a list of [from, to, noise] triples", 0, 0);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (!e.is_array() || e.size() != 3)
            throw ParseError("edge #" + std::to_string(i) + " must be a triple [from, to, noise]", 0, 0);
        d.edges.push_back({state(e[0], "edges.from"), state(e[1], "edges.to"),
                           detail::require_count(e[2], "edges.noise")});
    }
    return d;
}

/// Parses and validates a machine document.
inline NoiseMachine parse_machine(std::string_view text) { return NoiseMachine(parse_description(text)); }

/// Renders the canonical document: edges sorted by (from, noise), one per line.
inline std::string render_machine(const NoiseMachine& m) {
    std::ostringstream os;
    os << "{\n  \"q\": " << m.q() << ",\n  \"states\": " << m.num_states() << ",\n  \"edges\": [";
    const auto& edges = m.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        os << (i ? ",\n    " : "\n    ") << '[' << edges[i].from << ", " << edges[i].to << ", " << edges[i].noise
           << ']';
    }
    os << "\n  ]\n}\n";
    return os.str();
}

/// One channel use: input, noise, output and the state before and after.
struct ChannelUse {
    Symbol x = 0;
    Symbol z = 0;
    Symbol y = 0;
    State from = 0;
    State to = 0;
};

/// Single-owner simulation of the channel Y = X + Z (mod q).
class ChannelSession {
public:
    ChannelSession(NoiseMachine machine, State initial) : machine_(std::move(machine)), state_(initial) {
        if (initial >= machine_.num_states())
            throw PreconditionError("initial state " + std::to_string(initial) + " does not exist");
    }

    const NoiseMachine& machine() const noexcept { return machine_; }
    State state() const noexcept { return state_; }
    const std::vector<ChannelUse>& transcript() const noexcept { return transcript_; }

    Symbol step(Symbol x, Symbol z) {
        const auto q = machine_.q();
        if (x >= q) throw PreconditionError("input symbol " + std::to_string(x) + " is not below q");
        auto to = machine_.next(state_, z);
        if (!to)
            throw InfeasibleNoise("noise " + std::to_string(z) + " labels no edge out of state " +
                                  std::to_string(state_));
        Symbol y = add_mod(x, z, q);
        transcript_.push_back({x, z, y, state_, *to});
        state_ = *to;
        return y;
    }

private:
    NoiseMachine machine_;
    State state_;
    std::vector<ChannelUse> transcript_;
};

} // namespace zecap
