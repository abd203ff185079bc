#pragma once

// Command-line front end. `run` takes the argument list without the program
// name and writes to the given streams, so tests drive it in-process.

#include <zecap/zecap.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef ZECAP_CORPUS_DIR
#define ZECAP_CORPUS_DIR "corpus"
#endif

namespace zecap::cli {

enum Exit : int {
    ok = 0,
    failure = 1,
    invalid = 2,
    resource = 3,
    io = 4,
    disagreement = 5,
    capacity_zero = 10,
};

class IoError : public Error {
public:
    using Error::Error;
};

struct Common {
    std::string machine;
    std::optional<std::uint32_t> q;
    bool json = false;
    double tol = 1e-12;
    std::size_t max_iter = 1'000'000;
    std::size_t subset_cap = std::size_t{1} << 20;
    std::uint64_t max_words = 4096;
    std::uint64_t node_budget = 20'000'000;

    PerronOptions perron() const { return {tol, max_iter}; }
    ZeroTestOptions zero_test() const { return {subset_cap}; }
    CodebookOptions codebook() const { return {max_words, node_budget}; }

    nlohmann::json manifest() const {
        nlohmann::json j;
        j["machine"] = machine;
        j["q"] = q ? nlohmann::json(*q) : nlohmann::json(nullptr);
        j["tol"] = tol;
        j["max_iter"] = max_iter;
        j["subset_cap"] = subset_cap;
        return j;
    }
};

/// A path to an existing file, or the name of a shipped corpus fixture.
inline std::filesystem::path resolve(const std::string& name) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(name)) return name;
    fs::path fixture = fs::path(ZECAP_CORPUS_DIR) / (name + ".json");
    if (fs::is_regular_file(fixture)) return fixture;
    throw IoError("cannot open machine file '" + name + "'");
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline MachineDescription load_description(const Common& c) {
    auto d = parse_description(read_file(resolve(c.machine)));
    if (c.q) d.q = *c.q;
    return d;
}

inline NoiseMachine load(const Common& c) {
    auto d = load_description(c);
    if (c.q) {
        std::uint32_t max_label = 0;
        for (const auto& e : d.edges) max_label = std::max(max_label, e.noise);
        if (!d.edges.empty() && *c.q <= max_label)
            throw ValidationError("--q " + std::to_string(*c.q) + " must exceed the largest noise label " +
                                  std::to_string(max_label));
    }
    return NoiseMachine(std::move(d));
}

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("machine", c.machine, "machine file, or fixture name fig1|fig2|fig6")->required();
    sub->add_option("--q", c.q, "alphabet size override (above the largest label)");
    sub->add_flag("--json", c.json, "machine-readable output");
    sub->add_option("--tol", c.tol, "power iteration tolerance")->capture_default_str();
    sub->add_option("--max-iter", c.max_iter, "power iteration cap")->capture_default_str();
    sub->add_option("--subset-cap", c.subset_cap, "zero test subset cap")->capture_default_str();
    sub->add_option("--max-words", c.max_words, "codebook search guard on q^n")->capture_default_str();
    sub->add_option("--node-budget", c.node_budget, "codebook search node budget")->capture_default_str();
}

inline std::string fmt(double x, int precision = 10) {
    std::ostringstream os;
    os.precision(precision);
    os << x;
    return os.str();
}

inline void emit(std::ostream& out, const Common& c, const std::string& command, nlohmann::json extra,
                 nlohmann::json result) {
    auto manifest = c.manifest();
    for (auto& [k, v] : extra.items()) manifest[k] = v;
    out << report::dump(report::envelope(command, std::move(manifest), std::move(result)));
}

// ---------------------------------------------------------------------------

inline int cmd_validate(const Common& c, std::ostream& out) {
    auto d = load_description(c);
    auto r = validate(d);
    if (c.json) {
        emit(out, c, "validate", {}, report::to_json(r));
    } else {
        for (const auto& check : r.checks)
            out << (check.passed ? "pass  " : "FAIL  ") << check.name
                << (check.detail.empty() ? "" : "  (" + check.detail + ")") << '\n';
        out << (r.ok() ? "valid\n" : "invalid\n");
    }
    return r.ok() ? ok : invalid;
}

inline int cmd_entropy(const Common& c, std::ostream& out) {
    auto m = load(c);
    auto s = spectral_summary(m, c.perron());
    if (c.json) {
        emit(out, c, "entropy", {}, report::to_json(s));
        return ok;
    }
    out << "lambda        " << fmt(s.perron_value) << '\n'
        << "entropy_bits  " << fmt(s.entropy_bits) << '\n'
        << "alpha         " << fmt(s.alpha) << '\n'
        << "beta          " << fmt(s.beta) << '\n'
        << "vector       ";
    for (double v : s.perron_vector) out << ' ' << fmt(v);
    out << '\n';
    return ok;
}

inline int cmd_capacity(const Common& c, std::ostream& out) {
    auto m = load(c);
    auto r = capacity_report(m, {c.perron(), c.zero_test()});
    if (c.json) {
        emit(out, c, "capacity", {}, report::to_json(r));
        return ok;
    }
    out << "q             " << r.q << '\n'
        << "entropy_bits  " << fmt(r.entropy_bits) << '\n'
        << "verdict       " << to_string(r.verdict) << '\n'
        << "witness       " << (r.witness ? report::word_string(*r.witness) : "-") << '\n'
        << "c0f_bits      " << fmt(r.c0f_bits) << '\n'
        << "c0_lower_bits " << fmt(r.c0_lower_bits) << '\n'
        << "c0_upper_bits " << fmt(r.c0_upper_bits) << '\n';
    return ok;
}

inline int cmd_zerotest(const Common& c, std::ostream& out) {
    auto m = load(c);
    auto v = zero_capacity_test(m, c.zero_test());
    if (c.json)
        emit(out, c, "zerotest", {}, report::to_json(v));
    else
        out << to_string(v.verdict) << (v.witness ? "  witness " + report::word_string(*v.witness) : "") << '\n';
    return v.verdict == Verdict::CapacityZero ? capacity_zero : ok;
}

struct MinfcArgs {
    std::size_t grid = 99;
    double refine_tol = 1e-6;
};

inline int cmd_minfc(const Common& c, const MinfcArgs& a, std::ostream& out) {
    auto m = load(c);
    MinimizeOptions opts;
    opts.grid_points = a.grid;
    opts.refine_tol = a.refine_tol;
    auto r = minimize_feedback_capacity(m, opts);
    const double c0f = capacity_report(m, {c.perron(), c.zero_test()}).c0f_bits;
    if (c.json) {
        auto j = report::to_json(r, m);
        j["c0f_bits"] = report::rounded(c0f);
        // The argmin is flat to first order; six places are what the refinement resolves.
        for (auto& p : j["parameters"]) p = report::rounded(p.get<double>(), 6);
        for (auto& e : j["edges"]) e["probability"] = report::rounded(e["probability"].get<double>(), 6);
        emit(out, c, "minfc", {{"grid", a.grid}, {"refine_tol", a.refine_tol}}, std::move(j));
        return ok;
    }
    out << "min_bits  " << fmt(r.min_bits) << '\n' << "c0f_bits  " << fmt(c0f) << '\n';
    for (std::size_t i = 0; i < m.edges().size(); ++i) {
        const auto& e = m.edges()[i];
        out << "p(" << e.from << " -> " << e.to << ", z=" << e.noise << ")  " << fmt(r.edge_probabilities[i], 6)
            << '\n';
    }
    return ok;
}

struct OracleArgs {
    std::string check = "counts";
    std::size_t n = 4;
    std::size_t max_len = 8;
};

inline int cmd_oracle(const Common& c, const OracleArgs& a, std::ostream& out) {
    auto m = load(c);
    nlohmann::json result;
    bool agree = true;
    std::ostringstream text;

    if (a.check == "counts") {
        auto summary = spectral_summary(m, c.perron());
        auto rows = nlohmann::json::array();
        for (State s = 0; s < m.num_states(); ++s) {
            for (std::size_t n = 0; n <= a.n; ++n) {
                auto cc = check_count(m, s, n);
                auto b = count_bounds(summary, n);
                const double eps = 1e-6 * b.upper;
                const bool in = b.lower - eps <= static_cast<double>(cc.enumerated) &&
                                static_cast<double>(cc.enumerated) <= b.upper + eps;
                agree = agree && cc.agree() && in;
                rows.push_back({{"s0", s}, {"n", n}, {"enumerated", cc.enumerated}, {"formula", cc.formula},
                                {"lower", report::rounded(b.lower)}, {"upper", report::rounded(b.upper)},
                                {"agree", cc.agree() && in}});
                text << "s0=" << s << " n=" << n << "  enumerated " << cc.enumerated << "  formula " << cc.formula
                     << "  bounds [" << fmt(b.lower, 8) << ", " << fmt(b.upper, 8) << "]"
                     << (cc.agree() && in ? "" : "  MISMATCH") << '\n';
            }
        }
        result["rows"] = std::move(rows);
    } else if (a.check == "confusability") {
        auto g = build_coupled(m);
        std::uint64_t total = 1, pairs = 0, confusable_pairs = 0, mismatches = 0;
        for (std::size_t i = 0; i < a.n; ++i) {
            total *= m.q();
            if (total > c.max_words) throw ResourceError("q^n exceeds --max-words");
        }
        for (std::uint64_t i = 0; i < total; ++i) {
            auto x = word_from_index(i, a.n, m.q());
            for (std::uint64_t j = i; j < total; ++j) {
                auto x2 = word_from_index(j, a.n, m.q());
                const bool fast = confusable(g, x, x2);
                const bool slow = confusable_by_enumeration(m, x, x2);
                ++pairs;
                confusable_pairs += fast;
                if (fast != slow) {
                    ++mismatches;
                    text << "MISMATCH " << report::word_string(x) << " | " << report::word_string(x2) << '\n';
                }
            }
        }
        agree = mismatches == 0;
        result = {{"n", a.n}, {"pairs", pairs}, {"confusable_pairs", confusable_pairs}, {"mismatches", mismatches}};
        text << "n=" << a.n << "  pairs " << pairs << "  confusable " << confusable_pairs << "  mismatches "
             << mismatches << '\n';
    } else if (a.check == "universality") {
        auto v = zero_capacity_test(m, c.zero_test());
        auto u = universality_oracle(m, a.max_len);
        // Up to max_len the oracle must find exactly the witness, or nothing if the witness is longer.
        std::optional<Word> expected;
        if (v.witness && v.witness->size() <= a.max_len) expected = v.witness;
        agree = u.counterexample == expected;
        result = report::to_json(v);
        result["max_len"] = a.max_len;
        result["oracle_counterexample"] = u.counterexample ? report::word(*u.counterexample) : nlohmann::json(nullptr);
        result["sequences_checked"] = u.sequences_checked;
        text << "zero test  " << to_string(v.verdict)
             << (v.witness ? "  witness " + report::word_string(*v.witness) : "") << '\n'
             << "oracle     "
             << (u.counterexample ? "counterexample " + report::word_string(*u.counterexample)
                                  : "every sequence of length <= " + std::to_string(a.max_len) + " realizable")
             << '\n';
    } else if (a.check == "codebook") {
        const double c0f = capacity_report(m, {c.perron(), c.zero_test()}).c0f_bits;
        auto rows = nlohmann::json::array();
        for (std::size_t n = 1; n <= a.n; ++n) {
            auto cb = max_codebook(m, n, c.codebook());
            const bool below = cb.rate_bits() <= c0f + 1e-9;
            agree = agree && below;
            auto row = report::to_json(cb);
            row["upper_bound"] = codebook_upper_bound(m, n);
            rows.push_back(std::move(row));
            text << "n=" << n << "  size " << cb.size() << "  rate " << fmt(cb.rate_bits(), 8) << "  (c0f "
                 << fmt(c0f, 8) << ")" << (below ? "" : "  EXCEEDS") << '\n';
        }
        result["c0f_bits"] = report::rounded(c0f);
        result["codebooks"] = std::move(rows);
    } else {
        throw PreconditionError("unknown check '" + a.check + "'");
    }

    result["agree"] = agree;
    if (c.json)
        emit(out, c, "oracle", {{"check", a.check}, {"n", a.n}, {"max_len", a.max_len}}, std::move(result));
    else
        out << text.str() << (agree ? "agree\n" : "DISAGREE\n");
    return agree ? ok : disagreement;
}

struct SimulateArgs {
    std::size_t k = 2;
    std::uint64_t message = 0;
    State initial = 0;
    std::string noise = "random:1";
};

/// Noise from a file: whitespace-separated symbols, one per channel use.
inline NoiseSchedule file_noise(const std::string& path) {
    auto text = read_file(path);
    auto symbols = std::make_shared<std::vector<Symbol>>();
    std::istringstream in(text);
    long long v;
    while (in >> v) {
        if (v < 0) throw PreconditionError("noise file holds a negative symbol");
        symbols->push_back(static_cast<Symbol>(v));
    }
    if (!in.eof()) throw PreconditionError("noise file '" + path + "' holds a non-integer token");
    auto pos = std::make_shared<std::size_t>(0);
    return [symbols, pos](State, std::span<const Edge>) {
        if (*pos == symbols->size()) throw PreconditionError("noise file ran out of symbols");
        return (*symbols)[(*pos)++];
    };
}

inline NoiseSchedule random_noise(std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng](State, std::span<const Edge> out) {
        std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
        return out[pick(*rng)].noise;
    };
}

inline int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
    auto m = load(c);
    SchemeOptions opts;
    opts.codebook = c.codebook();
    opts.zero_test = c.zero_test();
    auto scheme = build_scheme(m, a.k, opts);
    const double rate = achieved_rate(scheme);
    const std::size_t worst = worst_case_uses(scheme);
    const double c0f = capacity_report(m, {c.perron(), c.zero_test()}).c0f_bits;
    nlohmann::json params = {{"k", a.k}, {"message", a.message}, {"initial", a.initial}, {"noise", a.noise}};
    nlohmann::json result = {{"base_n", scheme.base.n}, {"base_size", scheme.base.size()},
                             {"worst_case_uses", worst}, {"achieved_rate_bits", report::rounded(rate)},
                             {"c0f_bits", report::rounded(c0f)}};

    if (a.noise == "exhaustive") {
        auto v = verify_exhaustive(scheme);
        result["verification"] = report::to_json(v);
        if (c.json) {
            emit(out, c, "simulate", std::move(params), std::move(result));
        } else {
            out << "runs " << v.runs << "  failures " << v.failures << "  uses " << v.min_uses << ".." << v.max_uses
                << '\n'
                << "worst_case_uses " << worst << "  achieved_rate " << fmt(rate, 8) << "  c0f " << fmt(c0f, 8)
                << '\n';
        }
        return v.failures == 0 ? ok : disagreement;
    }

    NoiseSchedule noise;
    if (a.noise.rfind("random:", 0) == 0) {
        std::uint64_t seed = 0;
        try {
            seed = std::stoull(a.noise.substr(7));
        } catch (const std::exception&) {
            throw PreconditionError("bad seed in '" + a.noise + "'");
        }
        noise = random_noise(seed);
    } else if (a.noise.rfind("file:", 0) == 0) {
        noise = file_noise(a.noise.substr(5));
    } else {
        throw PreconditionError("--noise must be exhaustive, random:SEED or file:PATH");
    }

    auto r = transmit(scheme, a.message, a.initial, noise);
    if (c.json) {
        auto j = report::to_json(r);
        for (auto& [k, v] : result.items()) j[k] = v;
        emit(out, c, "simulate", std::move(params), std::move(j));
    } else {
        out << "# t x z y from to\n";
        for (std::size_t t = 0; t < r.transcript.size(); ++t) {
            const auto& u = r.transcript[t];
            out << t << ' ' << u.x << ' ' << u.z << ' ' << u.y << ' ' << u.from << ' ' << u.to << '\n';
        }
        out << "# message " << a.message << " decoded " << r.decoded << " uses " << r.uses << '\n';
    }
    return r.decoded == a.message ? ok : disagreement;
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zero-error capacity toolkit for finite-state additive noise channels", "zecap"};
    app.require_subcommand(1);

    Common common;
    MinfcArgs minfc;
    OracleArgs oracle;
    SimulateArgs simulate;

    auto* validate_cmd = app.add_subcommand("validate", "check a machine file against every invariant");
    auto* entropy_cmd = app.add_subcommand("entropy", "Perron value, topological entropy, alpha and beta");
    auto* capacity_cmd = app.add_subcommand("capacity", "zero-error feedback capacity and zero-error bounds");
    auto* zerotest_cmd = app.add_subcommand("zerotest", "decide whether the zero-error capacity is zero");
    auto* minfc_cmd = app.add_subcommand("minfc", "minimize feedback capacity over Markov parametrizations");
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force cross-checks");
    auto* simulate_cmd = app.add_subcommand("simulate", "run the zero-error feedback codec");
    for (auto* sub : {validate_cmd, entropy_cmd, capacity_cmd, zerotest_cmd, minfc_cmd, oracle_cmd, simulate_cmd})
        add_common(sub, common);

    minfc_cmd->add_option("--grid", minfc.grid, "grid points per free parameter")->capture_default_str();
    minfc_cmd->add_option("--refine-tol", minfc.refine_tol, "refinement tolerance")->capture_default_str();

    oracle_cmd->add_option("--check", oracle.check, "counts|confusability|universality|codebook")
        ->check(CLI::IsMember({"counts", "confusability", "universality", "codebook"}))
        ->capture_default_str();
    oracle_cmd->add_option("--n", oracle.n, "block length (max length for counts and codebook)")
        ->capture_default_str();
    oracle_cmd->add_option("--max-len", oracle.max_len, "longest label sequence for universality")
        ->capture_default_str();

    simulate_cmd->add_option("--k", simulate.k, "data symbols per message")->capture_default_str();
    simulate_cmd->add_option("--message", simulate.message, "message index below q^k")->capture_default_str();
    simulate_cmd->add_option("--initial", simulate.initial, "initial channel state")->capture_default_str();
    simulate_cmd->add_option("--noise", simulate.noise, "exhaustive | random:SEED | file:PATH")
        ->capture_default_str();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return invalid;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(common, out);
        if (entropy_cmd->parsed()) return cmd_entropy(common, out);
        if (capacity_cmd->parsed()) return cmd_capacity(common, out);
        if (zerotest_cmd->parsed()) return cmd_zerotest(common, out);
        if (minfc_cmd->parsed()) return cmd_minfc(common, minfc, out);
        if (oracle_cmd->parsed()) return cmd_oracle(common, oracle, out);
        if (simulate_cmd->parsed()) return cmd_simulate(common, simulate, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return invalid;
    } catch (const ValidationError& e) {
        err << "error: invalid machine: " << e.what() << '\n';
        return invalid;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return resource;
    } catch (const OverflowError& e) {
        err << "error: " << e.what() << '\n';
        return resource;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return resource;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}

} // namespace zecap::cli
