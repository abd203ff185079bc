#pragma once

// Zero-error transmission over a finite-state additive noise channel with
// ideal output feedback.
//
// Encoder and decoder share a list of candidate messages, each paired with the
// set of channel states it could have left the channel in. Every stage assigns
// one codeword to each candidate, the encoder sends the true candidate's word,
// and both ends drop every candidate whose word cannot explain the received
// block under any feasible noise from its state set. The first stage sends the
// k message digits; the survivors are exactly the table of noise sequences
// consistent with the output, ordered by noise sequence, and their index is
// re-sent in ceil(log_q N) digits. Once at most |base| candidates remain, a
// terminal stage gives them pairwise non-confusable codewords. Every stage
// strictly shrinks the list, and the true message always survives.

#include <zecap/capacity.hpp>
#include <zecap/coupled.hpp>
#include <zecap/errors.hpp>
#include <zecap/machine.hpp>
#include <zecap/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace zecap {

using StateSet = std::uint64_t;

struct Candidate {
    std::uint64_t message = 0;
    StateSet states = 0;
};

enum class StageKind { Round, Separate, BaseBlock };

inline const char* to_string(StageKind k) {
    switch (k) {
    case StageKind::Round: return "round";
    case StageKind::Separate: return "separate";
    case StageKind::BaseBlock: return "base";
    }
    return "?";
}

struct Stage {
    StageKind kind = StageKind::Round;
    std::size_t length = 0;
    std::vector<Word> words; ///< one codeword per candidate, in candidate order
};

struct SchemeOptions {
    CodebookOptions codebook;
    ZeroTestOptions zero_test;
    std::uint64_t separation_budget = 1'000'000; ///< backtracking nodes per terminal stage
    std::uint64_t max_messages = std::uint64_t{1} << 20;
};

/// Noise sequences of length L feasible from some state in a set, each with the
/// set of states it can end in. Sorted by noise sequence.
class SupportCache {
public:
    explicit SupportCache(const NoiseMachine& m) : m_(&m) {}

    const std::vector<std::pair<Word, StateSet>>& get(StateSet from, std::size_t length) {
        auto key = std::make_pair(from, length);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::map<Word, StateSet> acc;
        Word z;
        for (State s = 0; s < m_->num_states(); ++s)
            if ((from >> s) & 1u) walk(s, length, z, acc);
        std::vector<std::pair<Word, StateSet>> out(acc.begin(), acc.end());
        return cache_.emplace(key, std::move(out)).first->second;
    }

    /// End states reachable from `from` along noise `z`; empty if infeasible.
    StateSet advance(StateSet from, std::span<const Symbol> z) const {
        StateSet cur = from;
        for (auto sym : z) {
            StateSet next = 0;
            for (State s = 0; s < m_->num_states(); ++s) {
                if (!((cur >> s) & 1u)) continue;
                if (auto t = m_->next(s, sym)) next |= StateSet{1} << *t;
            }
            cur = next;
            if (!cur) break;
        }
        return cur;
    }

private:
    void walk(State s, std::size_t left, Word& z, std::map<Word, StateSet>& acc) const {
        if (left == 0) {
            acc[z] |= StateSet{1} << s;
            return;
        }
        for (const auto& e : m_->out_edges(s)) {
            z.push_back(e.noise);
            walk(e.to, left - 1, z, acc);
            z.pop_back();
        }
    }

    const NoiseMachine* m_;
    std::map<std::pair<StateSet, std::size_t>, std::vector<std::pair<Word, StateSet>>> cache_;
};

/// Machine, data block length and the base zero-error codebook.
struct FeedbackScheme {
    NoiseMachine machine;
    std::size_t k = 0;
    Codebook base;
    SchemeOptions options;

    std::uint64_t message_count() const {
        std::uint64_t m = 1;
        for (std::size_t i = 0; i < k; ++i) m *= machine.q();
        return m;
    }
};

/// Builds the scheme for k data symbols.
///
/// The base blocklength is the smallest n0 with a codebook of two or more
/// words. Realizability is prefix closed, so that is the length of the zero
/// test's witness; the base codebook is the exact maximum codebook at n0.
inline FeedbackScheme build_scheme(const NoiseMachine& m, std::size_t k, const SchemeOptions& opts = {}) {
    if (k == 0) throw PreconditionError("build_scheme: k must be at least 1");
    if (m.num_states() > 64) throw ResourceError("build_scheme: at most 64 states are supported");
    auto zero = zero_capacity_test(m, opts.zero_test);
    if (zero.verdict == Verdict::CapacityZero)
        throw PreconditionError("build_scheme: zero-error capacity is zero (CapacityZero); no zero-error scheme exists");
    FeedbackScheme s{m, k, max_codebook(m, zero.witness->size(), opts.codebook), opts};
    if (s.base.size() < 2) throw Error("build_scheme: base codebook has fewer than two words");
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (count > opts.max_messages / m.q()) throw ResourceError("build_scheme: q^k exceeds the message guard");
        count *= m.q();
    }
    return s;
}

namespace detail {

inline std::size_t digits_needed(std::uint64_t count, std::uint64_t radix) {
    std::size_t d = 0;
    std::uint64_t cap = 1;
    while (cap < count) {
        cap *= radix;
        ++d;
    }
    return d;
}

// Length-L differences the coupled graph realizes from start pairs A x B.
inline std::vector<bool> confusing_differences(const CoupledGraph& g, StateSet a, StateSet b, std::size_t length) {
    const std::uint32_t q = g.q();
    std::vector<bool> start(g.num_vertices(), false);
    for (State i = 0; i < g.num_states(); ++i)
        for (State j = 0; j < g.num_states(); ++j)
            if (((a >> i) & 1u) && ((b >> j) & 1u)) start[g.vertex(i, j)] = true;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < length; ++i) total *= q;
    std::vector<bool> out(total, false);
    for (std::uint64_t d = 0; d < total; ++d) {
        auto w = word_from_index(d, length, q);
        auto end = propagate(g, start, w);
        out[d] = std::find(end.begin(), end.end(), true) != end.end();
    }
    return out;
}

// Lexicographically least pairwise non-confusable assignment with the first
// word fixed to zero (confusability only depends on differences).
inline std::optional<std::vector<Word>> separate(const CoupledGraph& g, std::span<const Candidate> cands,
                                                 std::size_t length, std::uint64_t budget) {
    const std::uint32_t q = g.q();
    const std::size_t n = cands.size();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < length; ++i) total *= q;
    if (total < n) return std::nullopt;

    std::vector<std::vector<std::vector<bool>>> bad(n, std::vector<std::vector<bool>>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            bad[i][j] = confusing_differences(g, cands[i].states, cands[j].states, length);

    std::vector<std::uint64_t> pick(n, 0);
    std::vector<Word> words(n);
    std::uint64_t nodes = 0;
    auto ok = [&](std::size_t j) {
        const auto wj = word_from_index(pick[j], length, q);
        for (std::size_t i = 0; i < j; ++i) {
            auto d = difference(wj, word_from_index(pick[i], length, q), q);
            if (bad[i][j][index_of_word(d, q)]) return false;
        }
        return true;
    };
    auto rec = [&](auto&& self, std::size_t j) -> bool {
        if (j == n) return true;
        for (std::uint64_t v = (j == 0 ? 0 : 1); v < (j == 0 ? 1 : total); ++v) {
            if (++nodes > budget) return false;
            pick[j] = v;
            if (ok(j) && self(self, j + 1)) return true;
        }
        return false;
    };
    if (!rec(rec, 0)) return std::nullopt;
    for (std::size_t i = 0; i < n; ++i) words[i] = word_from_index(pick[i], length, q);
    return words;
}

} // namespace detail

/// Shared protocol logic; the encoder and the decoder each run their own copy
/// and stay in lockstep because both only use the received outputs.
///
/// For a candidate list the protocol picks, among the stages it considers, the
/// one with the fewest worst-case channel uses until a single candidate is
/// left. Small lists consider terminal separations of every length and rounds
/// with a searched index assignment; large lists send the index digits.
/// Costs are memoized on the list of state sets, which is all a plan depends on.
class Protocol {
public:
    static constexpr std::size_t small_list = 8;
    static constexpr std::uint64_t assignment_limit = 50'000;

    explicit Protocol(const FeedbackScheme& scheme)
        : scheme_(&scheme), coupled_(scheme.machine), supports_(scheme.machine) {}

    std::vector<Candidate> initial_candidates() const {
        const StateSet all = scheme_->machine.num_states() == 64
                                 ? ~StateSet{0}
                                 : (StateSet{1} << scheme_->machine.num_states()) - 1;
        std::vector<Candidate> c(scheme_->message_count());
        for (std::uint64_t i = 0; i < c.size(); ++i) c[i] = {i, all};
        return c;
    }

    /// Codewords for the next stage. Requires at least two candidates.
    Stage plan(std::span<const Candidate> cands) {
        if (cands.size() < 2) throw PreconditionError("plan: nothing left to resolve");
        return best(cands).stage;
    }

    /// Worst-case channel uses until one candidate remains.
    std::size_t cost(std::span<const Candidate> cands) { return cands.size() < 2 ? 0 : best(cands).cost; }

    /// Candidates consistent with the received block, ordered by the noise
    /// sequence that explains them (then by previous order).
    std::vector<Candidate> update(std::span<const Candidate> cands, const Stage& stage,
                                  std::span<const Symbol> received) {
        const std::uint32_t q = scheme_->machine.q();
        std::vector<std::pair<Word, Candidate>> keep;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            auto z = difference(received, stage.words[i], q);
            StateSet end = supports_.advance(cands[i].states, z);
            if (end) keep.push_back({std::move(z), {cands[i].message, end}});
        }
        std::stable_sort(keep.begin(), keep.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Candidate> out;
        out.reserve(keep.size());
        for (auto& [z, c] : keep) out.push_back(c);
        return out;
    }

    /// Distinct output blocks the stage can produce.
    std::vector<Word> reachable_outputs(std::span<const Candidate> cands, const Stage& stage) {
        const std::uint32_t q = scheme_->machine.q();
        std::vector<Word> ys;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (const auto& [z, end] : supports_.get(cands[i].states, stage.length)) {
                Word y(z.size());
                for (std::size_t t = 0; t < z.size(); ++t) y[t] = add_mod(stage.words[i][t], z[t], q);
                ys.push_back(std::move(y));
            }
        }
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        return ys;
    }

private:
    static constexpr std::size_t infinite = std::numeric_limits<std::size_t>::max();

    struct Plan {
        Stage stage;
        std::size_t cost = 0;
    };

    // Stage length plus the worst cost over every output; infinite when some
    // output leaves the list no smaller.
    std::size_t stage_cost(std::span<const Candidate> cands, const Stage& stage, std::size_t give_up) {
        std::size_t worst = 0;
        for (const auto& y : reachable_outputs(cands, stage)) {
            auto next = update(cands, stage, y);
            if (next.size() >= cands.size()) return infinite;
            worst = std::max(worst, cost(next));
            if (stage.length + worst >= give_up) return infinite;
        }
        return stage.length + worst;
    }

    // Injective index assignments with the first word fixed at zero; keeps the
    // first assignment of least cost.
    std::optional<Plan> searched_round(std::span<const Candidate> cands, std::size_t length, std::size_t give_up) {
        const std::uint32_t q = scheme_->machine.q();
        std::uint64_t words = 1;
        for (std::size_t i = 0; i < length; ++i) words *= q;
        std::uint64_t count = 1;
        for (std::size_t i = 1; i < cands.size(); ++i) {
            if (words <= i) return std::nullopt;
            count *= words - i;
            if (count > assignment_limit) return std::nullopt;
        }
        std::optional<Plan> found;
        std::vector<std::uint64_t> pick(cands.size(), 0);
        std::vector<bool> used(words, false);
        used[0] = true;
        auto rec = [&](auto&& self, std::size_t j) -> void {
            if (j == cands.size()) {
                Stage s{StageKind::Round, length, {}};
                for (auto v : pick) s.words.push_back(word_from_index(v, length, q));
                const std::size_t limit = found ? found->cost : give_up;
                std::size_t c = stage_cost(cands, s, limit);
                if (c < limit) found = Plan{std::move(s), c};
                return;
            }
            for (std::uint64_t v = 1; v < words; ++v) {
                if (used[v]) continue;
                used[v] = true;
                pick[j] = v;
                self(self, j + 1);
                used[v] = false;
            }
        };
        rec(rec, 1);
        return found;
    }

    const Plan& best(std::span<const Candidate> cands) {
        std::vector<StateSet> key;
        key.reserve(cands.size());
        for (const auto& c : cands) key.push_back(c.states);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        const auto& base = scheme_->base;
        const std::uint32_t q = scheme_->machine.q();
        const std::size_t n = cands.size();
        const std::size_t round_length = detail::digits_needed(n, q);
        std::optional<Plan> chosen;
        auto consider = [&](Stage s, std::size_t c) {
            if (c != infinite && (!chosen || c < chosen->cost)) chosen = Plan{std::move(s), c};
        };

        if (n <= small_list || n <= base.size()) {
            const std::size_t max_len = n <= base.size() ? std::max(base.n, round_length) : round_length;
            for (std::size_t len = 1; len <= max_len; ++len) {
                auto words = detail::separate(coupled_, cands, len, scheme_->options.separation_budget);
                if (words) {
                    consider({StageKind::Separate, len, std::move(*words)}, len);
                    break;
                }
            }
            if (!chosen && n <= base.size()) {
                Stage s{StageKind::Separate, base.n, {}};
                for (std::size_t i = 0; i < n; ++i) s.words.push_back(base.words[i]);
                consider(std::move(s), base.n);
            }
        }

        if (!chosen || chosen->cost > round_length) {
            std::optional<Plan> searched;
            if (n <= small_list) searched = searched_round(cands, round_length, chosen ? chosen->cost : infinite);
            if (searched) {
                consider(std::move(searched->stage), searched->cost);
            } else {
                Stage round{StageKind::Round, round_length, {}};
                for (std::size_t i = 0; i < n; ++i) round.words.push_back(word_from_index(i, round_length, q));
                std::size_t c = stage_cost(cands, round, chosen ? chosen->cost : infinite);
                consider(std::move(round), c);
            }
        }

        if (!chosen && n > base.size()) {
            // Send the leading base-|base| digit of the index; always progresses.
            const std::uint64_t radix = base.size();
            const std::size_t digits = detail::digits_needed(n, radix);
            std::uint64_t lead = 1;
            for (std::size_t i = 1; i < digits; ++i) lead *= radix;
            Stage s{StageKind::BaseBlock, base.n, {}};
            for (std::size_t i = 0; i < n; ++i) s.words.push_back(base.words[i / lead]);
            std::size_t c = stage_cost(cands, s, infinite);
            consider(std::move(s), c);
        }
        if (!chosen) throw Error("protocol: no stage makes progress");
        return memo_.emplace(std::move(key), std::move(*chosen)).first->second;
    }

    const FeedbackScheme* scheme_;
    CoupledGraph coupled_;
    SupportCache supports_;
    std::map<std::vector<StateSet>, Plan> memo_;
};

/// Chooses the noise symbol for the next channel use, given the current state
/// and its outgoing edges.
using NoiseSchedule = std::function<Symbol(State, std::span<const Edge>)>;

struct StageRecord {
    StageKind kind = StageKind::Round;
    std::size_t length = 0;
    std::size_t candidates_before = 0;
    std::size_t candidates_after = 0;
};

struct TransmitResult {
    std::uint64_t decoded = 0;
    std::size_t uses = 0;
    std::vector<ChannelUse> transcript;
    std::vector<StageRecord> stages;
};

namespace detail {

// Encoder and decoder keep separate protocol instances; both derive every
// stage from the shared candidate list alone. Instances may be reused across
// runs since their memo depends only on the scheme.
inline TransmitResult transmit_with(const FeedbackScheme& scheme, Protocol& encoder, Protocol& decoder,
                                    std::uint64_t message, State initial, const NoiseSchedule& noise) {
    if (message >= scheme.message_count())
        throw PreconditionError("message " + std::to_string(message) + " is not below q^k");
    ChannelSession channel(scheme.machine, initial);
    auto enc_view = encoder.initial_candidates();
    auto dec_view = decoder.initial_candidates();
    TransmitResult r;

    while (dec_view.size() > 1) {
        Stage stage = decoder.plan(dec_view);
        Stage enc_stage = encoder.plan(enc_view);
        auto pos = std::find_if(enc_view.begin(), enc_view.end(),
                                [&](const Candidate& c) { return c.message == message; });
        if (pos == enc_view.end()) throw Error("transmit: encoder lost track of its own message");
        const Word& x = enc_stage.words[static_cast<std::size_t>(pos - enc_view.begin())];

        Word y;
        for (Symbol sym : x) {
            Symbol z = noise(channel.state(), channel.machine().out_edges(channel.state()));
            y.push_back(channel.step(sym, z));
        }
        r.uses += y.size();
        StageRecord rec{stage.kind, stage.length, dec_view.size(), 0};
        enc_view = encoder.update(enc_view, enc_stage, y);
        dec_view = decoder.update(dec_view, stage, y);
        rec.candidates_after = dec_view.size();
        r.stages.push_back(rec);
        if (dec_view.empty()) throw Error("transmit: decoder eliminated every candidate");
    }
    r.decoded = dec_view.front().message;
    r.transcript = channel.transcript();
    return r;
}

} // namespace detail

/// Sends `message` from channel state `initial`, drawing noise from `noise`.
inline TransmitResult transmit(const FeedbackScheme& scheme, std::uint64_t message, State initial,
                               const NoiseSchedule& noise) {
    Protocol encoder(scheme), decoder(scheme);
    return detail::transmit_with(scheme, encoder, decoder, message, initial, noise);
}

struct VerificationSummary {
    std::uint64_t runs = 0;
    std::uint64_t failures = 0;
    std::size_t min_uses = 0;
    std::size_t max_uses = 0;
};

/// Replays every message from every initial state under every feasible noise
/// schedule, enumerating schedules as branch choices of the noise adversary.
inline VerificationSummary verify_exhaustive(const FeedbackScheme& scheme,
                                             std::uint64_t max_runs = std::uint64_t{1} << 26) {
    VerificationSummary v;
    Protocol encoder(scheme), decoder(scheme);
    v.min_uses = std::numeric_limits<std::size_t>::max();
    for (std::uint64_t msg = 0; msg < scheme.message_count(); ++msg) {
        for (State s0 = 0; s0 < scheme.machine.num_states(); ++s0) {
            std::vector<std::size_t> choice, degree;
            for (;;) {
                std::size_t t = 0;
                NoiseSchedule src = [&](State, std::span<const Edge> out) {
                    if (t == choice.size()) {
                        choice.push_back(0);
                        degree.push_back(out.size());
                    }
                    degree[t] = out.size();
                    return out[choice[t++]].noise;
                };
                auto r = detail::transmit_with(scheme, encoder, decoder, msg, s0, src);
                choice.resize(t);
                degree.resize(t);
                if (++v.runs > max_runs) throw ResourceError("verify_exhaustive: run budget exceeded");
                if (r.decoded != msg) ++v.failures;
                v.min_uses = std::min(v.min_uses, r.uses);
                v.max_uses = std::max(v.max_uses, r.uses);

                // Odometer over adversary choices, last step fastest.
                while (!choice.empty() && choice.back() + 1 >= degree.back()) {
                    choice.pop_back();
                    degree.pop_back();
                }
                if (choice.empty()) break;
                ++choice.back();
            }
        }
    }
    return v;
}

/// Worst-case channel uses over all messages, initial states and noise
/// schedules: the protocol's cost of the initial candidate list, which ranges
/// over every output block the decoder can observe.
inline std::size_t worst_case_uses(const FeedbackScheme& scheme) {
    Protocol p(scheme);
    return p.cost(p.initial_candidates());
}

/// k log2(q) divided by the worst-case number of channel uses.
inline double achieved_rate(const FeedbackScheme& scheme) {
    const std::size_t uses = worst_case_uses(scheme);
    if (uses == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(scheme.k) * std::log2(static_cast<double>(scheme.machine.q())) /
           static_cast<double>(uses);
}

} // namespace zecap
