#pragma once

// Machine-readable reports. Field names are stable within a schema version;
// reals are rounded to 10 decimal places so reports diff cleanly across
// platforms.

#include <zecap/capacity.hpp>
#include <zecap/codec.hpp>
#include <zecap/coupled.hpp>
#include <zecap/machine.hpp>
#include <zecap/oracle.hpp>
#include <zecap/spectral.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace zecap::report {

inline constexpr const char* schema = "zecap.report/1";

inline double rounded(double x, int places = 10) {
    if (!std::isfinite(x)) return x;
    // Through decimal text, so the result is the double nearest the rounded decimal.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, x);
    double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r; // no negative zero
}

inline nlohmann::json rounded(const std::vector<double>& xs) {
    auto out = nlohmann::json::array();
    for (double x : xs) out.push_back(rounded(x));
    return out;
}

inline nlohmann::json word(const Word& w) {
    auto out = nlohmann::json::array();
    for (auto s : w) out.push_back(s);
    return out;
}

inline std::string word_string(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(w[i]);
    }
    return s;
}

inline nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json j;
    j["ok"] = r.ok();
    auto checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = std::move(checks);
    return j;
}

inline nlohmann::json to_json(const SpectralSummary& s) {
    nlohmann::json j;
    j["adjacency"] = s.adjacency;
    j["perron_value"] = rounded(s.perron_value);
    j["perron_vector"] = rounded(s.perron_vector);
    j["entropy_bits"] = rounded(s.entropy_bits);
    j["alpha"] = rounded(s.alpha);
    j["beta"] = rounded(s.beta);
    return j;
}

inline nlohmann::json to_json(const ZeroTestVerdict& v) {
    nlohmann::json j;
    j["verdict"] = to_string(v.verdict);
    j["witness"] = v.witness ? word(*v.witness) : nlohmann::json(nullptr);
    j["subsets_explored"] = v.subsets_explored;
    return j;
}

inline nlohmann::json to_json(const CapacityReport& r) {
    nlohmann::json j;
    j["q"] = r.q;
    j["perron_value"] = rounded(r.perron_value);
    j["entropy_bits"] = rounded(r.entropy_bits);
    j["alpha"] = rounded(r.alpha);
    j["beta"] = rounded(r.beta);
    j["verdict"] = to_string(r.verdict);
    j["witness"] = r.witness ? word(*r.witness) : nlohmann::json(nullptr);
    j["c0f_bits"] = rounded(r.c0f_bits);
    j["c0_lower_bits"] = rounded(r.c0_lower_bits);
    j["c0_upper_bits"] = rounded(r.c0_upper_bits);
    return j;
}

inline nlohmann::json to_json(const MinimizationResult& r, const NoiseMachine& m) {
    nlohmann::json j;
    j["min_bits"] = rounded(r.min_bits);
    j["parameters"] = rounded(r.parameters);
    auto edges = nlohmann::json::array();
    for (std::size_t i = 0; i < m.edges().size(); ++i) {
        const auto& e = m.edges()[i];
        edges.push_back({{"from", e.from}, {"to", e.to}, {"noise", e.noise},
                         {"probability", rounded(r.edge_probabilities[i])}});
    }
    j["edges"] = std::move(edges);
    j["evaluations"] = r.evaluations;
    return j;
}

inline nlohmann::json to_json(const Codebook& c) {
    nlohmann::json j;
    j["n"] = c.n;
    j["size"] = c.size();
    j["rate_bits"] = rounded(c.rate_bits());
    auto words = nlohmann::json::array();
    for (const auto& w : c.words) words.push_back(word(w));
    j["words"] = std::move(words);
    return j;
}

inline nlohmann::json to_json(const TransmitResult& r) {
    nlohmann::json j;
    j["decoded"] = r.decoded;
    j["uses"] = r.uses;
    auto stages = nlohmann::json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"kind", to_string(s.kind)}, {"length", s.length},
                          {"candidates_before", s.candidates_before}, {"candidates_after", s.candidates_after}});
    j["stages"] = std::move(stages);
    auto uses = nlohmann::json::array();
    for (const auto& u : r.transcript)
        uses.push_back({{"x", u.x}, {"z", u.z}, {"y", u.y}, {"from", u.from}, {"to", u.to}});
    j["transcript"] = std::move(uses);
    return j;
}

inline nlohmann::json to_json(const VerificationSummary& v) {
    return {{"runs", v.runs}, {"failures", v.failures}, {"min_uses", v.min_uses}, {"max_uses", v.max_uses}};
}

/// Wraps a result with the schema tag and the manifest that produced it.
inline nlohmann::json envelope(const std::string& command, nlohmann::json manifest, nlohmann::json result) {
    nlohmann::json j;
    j["schema"] = schema;
    j["command"] = command;
    j["manifest"] = std::move(manifest);
    j["result"] = std::move(result);
    return j;
}

namespace detail {

// Same layout as json::dump(2), but floats use the shortest round-trip form.
inline void write(std::string& out, const nlohmann::json& j, int depth) {
    const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
    if (j.is_object() && !j.empty()) {
        out += "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            out += (first ? "" : ",\n") + pad + nlohmann::json(k).dump() + ": ";
            write(out, v, depth + 1);
            first = false;
        }
        out += "\n" + close + "}";
    } else if (j.is_array() && !j.empty()) {
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            out += (i ? ",\n" : "") + pad;
            write(out, j[i], depth + 1);
        }
        out += "\n" + close + "]";
    } else if (j.is_number_float() && std::isfinite(j.get<double>())) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, j.get<double>());
        std::string num(buf, end);
        if (num.find_first_of(".e") == std::string::npos) num += ".0";
        out += num;
    } else {
        out += j.dump();
    }
}

} // namespace detail

/// Sorted keys, two-space indent, trailing newline.
inline std::string dump(const nlohmann::json& j) {
    std::string out;
    detail::write(out, j, 0);
    return out + "\n";
}

} // namespace zecap::report
