#pragma once

// Brute-force ground truth: noise enumeration, confusability, exact maximum
// zero-error codebooks and a direct universality check.

#include <zecap/coupled.hpp>
#include <zecap/errors.hpp>
#include <zecap/machine.hpp>
#include <zecap/spectral.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zecap {

struct EnumerationLimits {
    std::size_t max_sequences = std::size_t{1} << 22;
};

namespace detail {

inline void enumerate_from(const NoiseMachine& m, State s, std::size_t n, Word& prefix, std::vector<Word>& out,
                           std::size_t cap) {
    if (prefix.size() == n) {
        if (out.size() >= cap)
            throw ResourceError("noise enumeration exceeded " + std::to_string(cap) + " sequences");
        out.push_back(prefix);
        return;
    }
    for (const auto& e : m.out_edges(s)) {
        prefix.push_back(e.noise);
        enumerate_from(m, e.to, n, prefix, out, cap);
        prefix.pop_back();
    }
}

inline std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

} // namespace detail

/// Every noise sequence of length n the machine can emit from s0, in
/// lexicographic order. Labels are distinct per state, so there are no repeats.
inline std::vector<Word> enumerate_noise(const NoiseMachine& m, State s0, std::size_t n,
                                         const EnumerationLimits& lim = {}) {
    if (s0 >= m.num_states()) throw PreconditionError("enumerate_noise: no such state");
    std::vector<Word> out;
    Word prefix;
    detail::enumerate_from(m, s0, n, prefix, out, lim.max_sequences);
    return out;
}

/// Union over all start states of the length-n noise supports, sorted and deduplicated.
inline std::vector<Word> noise_union(const NoiseMachine& m, std::size_t n, const EnumerationLimits& lim = {}) {
    std::vector<Word> all;
    for (State s = 0; s < m.num_states(); ++s) {
        auto part = enumerate_noise(m, s, n, lim);
        all.insert(all.end(), part.begin(), part.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

struct CountCheck {
    std::uint64_t enumerated = 0;
    std::uint64_t formula = 0;
    bool agree() const { return enumerated == formula; }
};

/// Compares the enumerated support size with the matrix-power count.
inline CountCheck check_count(const NoiseMachine& m, State s0, std::size_t n, const EnumerationLimits& lim = {}) {
    return {enumerate_noise(m, s0, n, lim).size(), count_noise_sequences(m, s0, n)};
}

inline Word difference(std::span<const Symbol> a, std::span<const Symbol> b, std::uint32_t q) {
    if (a.size() != b.size()) throw PreconditionError("words must have equal length");
    Word d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = sub_mod(a[i], b[i], q);
    return d;
}

/// True iff some pair of start states and feasible noise sequences sends x and
/// x2 to a common output. Decided as realizability of x2 - x on the coupled graph.
inline bool confusable(const CoupledGraph& g, std::span<const Symbol> x, std::span<const Symbol> x2) {
    auto d = difference(x2, x, g.q());
    return realizable(g, d);
}

inline bool confusable(const NoiseMachine& m, std::span<const Symbol> x, std::span<const Symbol> x2) {
    return confusable(CoupledGraph(m), x, x2);
}

/// Same relation decided by intersecting the explicit output sets.
inline bool confusable_by_enumeration(const NoiseMachine& m, std::span<const Symbol> x,
                                      std::span<const Symbol> x2) {
    if (x.size() != x2.size()) throw PreconditionError("words must have equal length");
    const auto q = m.q();
    auto noise = noise_union(m, x.size());
    std::set<Word> outputs;
    for (const auto& z : noise) {
        Word y(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) y[i] = add_mod(x[i], z[i], q);
        outputs.insert(std::move(y));
    }
    for (const auto& z : noise) {
        Word y(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) y[i] = add_mod(x2[i], z[i], q);
        if (outputs.contains(y)) return true;
    }
    return false;
}

/// Words of length n are indexed by their base-q value, first symbol most
/// significant, so index order is lexicographic order.
inline Word word_from_index(std::uint64_t index, std::size_t n, std::uint32_t q) {
    Word w(n);
    for (std::size_t i = n; i-- > 0;) {
        w[i] = static_cast<Symbol>(index % q);
        index /= q;
    }
    return w;
}

inline std::uint64_t index_of_word(std::span<const Symbol> w, std::uint32_t q) {
    std::uint64_t v = 0;
    for (auto s : w) v = v * q + s;
    return v;
}

/// realizable(d) for every length-n label sequence d, indexed as above.
inline std::vector<bool> realizable_table(const CoupledGraph& g, std::size_t n) {
    const std::uint32_t q = g.q();
    const std::uint64_t total = detail::checked_pow(q, n, std::uint64_t{1} << 32);
    if (total > (std::uint64_t{1} << 32)) throw ResourceError("realizable_table: q^n too large");
    std::vector<bool> table(total, false);
    // Depth-first over prefixes, carrying the set of vertices the prefix can end in.
    std::vector<std::vector<bool>> level(n + 1);
    level[0].assign(g.num_vertices(), true);
    auto rec = [&](auto&& self, std::size_t depth, std::uint64_t index) -> void {
        if (depth == n) {
            table[index] = true;
            return;
        }
        for (Symbol d = 0; d < q; ++d) {
            auto& next = level[depth + 1];
            next.assign(g.num_vertices(), false);
            bool any = false;
            for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
                if (!level[depth][v]) continue;
                for (auto t : g.successors(v, d)) {
                    next[t] = true;
                    any = true;
                }
            }
            if (any) self(self, depth + 1, index * q + d);
        }
    };
    rec(rec, 0, 0);
    return table;
}

/// A set of pairwise non-confusable input words of common length n.
struct Codebook {
    std::size_t n = 0;
    std::uint32_t q = 0;
    std::vector<Word> words;

    std::size_t size() const { return words.size(); }
    double rate_bits() const {
        return words.empty() || n == 0 ? 0.0 : std::log2(static_cast<double>(words.size())) / static_cast<double>(n);
    }
};

struct CodebookOptions {
    std::uint64_t max_words = 4096;          ///< guard on q^n
    std::uint64_t node_budget = 20'000'000;  ///< branch-and-bound nodes before giving up
};

/// Thrown when the exact search runs out of its node budget. Carries the best
/// codebook found and a proven upper bound on the maximum size.
class CodebookSearchExhausted : public ResourceError {
public:
    CodebookSearchExhausted(const std::string& what, Codebook best, std::size_t upper)
        : ResourceError(what), best_(std::move(best)), upper_(upper) {}

    const Codebook& best() const noexcept { return best_; }
    std::size_t upper_bound() const noexcept { return upper_; }

private:
    Codebook best_;
    std::size_t upper_;
};

/// Upper bound on the size of any zero-error codebook of length n.
///
/// Confusability depends only on the difference of two words, so the
/// confusability graph is vertex-transitive, and every support Z(s0, n) is a
/// clique (two sequences from one start state differ by a label sequence of a
/// walk from (s0, s0)). Each translate of a clique holds at most one codeword
/// and each word lies in |clique| translates, hence size <= q^n / |clique|.
inline std::size_t codebook_upper_bound(const NoiseMachine& m, std::size_t n) {
    std::uint64_t clique = 1;
    for (State s = 0; s < m.num_states(); ++s) clique = std::max(clique, count_noise_sequences(m, s, n));
    const std::uint64_t total = detail::checked_pow(m.q(), n, std::numeric_limits<std::uint64_t>::max() / 2);
    return static_cast<std::size_t>(total / clique);
}

namespace detail {

class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : w_((n + 63) / 64, 0) {}

    void set(std::size_t i) { w_[i / 64] |= std::uint64_t{1} << (i % 64); }
    void reset(std::size_t i) { w_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
    bool test(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1u; }

    bool none() const {
        for (auto w : w_)
            if (w) return false;
        return true;
    }

    std::size_t first() const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(w_[i]));
        return npos;
    }

    Bits& operator&=(const Bits& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
        return *this;
    }

    Bits& and_not(const Bits& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
        return *this;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<std::uint64_t> w_;
};

class IndependentSetSearch {
public:
    IndependentSetSearch(std::vector<Bits> adj, std::size_t upper, std::uint64_t budget)
        : adj_(std::move(adj)), upper_(upper), budget_(budget) {}

    // Branches on the lowest candidate, include before exclude, and accepts
    // only strictly larger sets: the first maximum found is lexicographically
    // least among all maximum independent sets containing `root`.
    std::vector<std::size_t> run(std::size_t root) {
        const std::size_t n = adj_.size();
        Bits cand(n);
        for (std::size_t v = root + 1; v < n; ++v)
            if (!adj_[root].test(v)) cand.set(v);
        chosen_ = {root};
        best_ = chosen_;
        expand(cand);
        return best_;
    }

    bool exhausted() const { return exhausted_; }
    const std::vector<std::size_t>& best() const { return best_; }
    std::uint64_t nodes() const { return nodes_; }

private:
    // Greedy clique cover of `cand`; stops once it exceeds `limit` cliques.
    std::size_t cover(Bits cand, std::size_t limit) const {
        std::size_t count = 0;
        while (!cand.none()) {
            if (++count > limit) return count;
            std::size_t v = cand.first();
            cand.reset(v);
            Bits clique = cand;
            clique &= adj_[v];
            while (!clique.none()) {
                std::size_t u = clique.first();
                cand.reset(u);
                clique.reset(u);
                clique &= adj_[u];
            }
        }
        return count;
    }

    void expand(Bits cand) {
        for (;;) {
            if (done_) return;
            if (++nodes_ > budget_) {
                exhausted_ = done_ = true;
                return;
            }
            if (cand.none()) {
                if (chosen_.size() > best_.size()) {
                    best_ = chosen_;
                    if (best_.size() >= upper_) done_ = true;
                }
                return;
            }
            const std::size_t need = best_.size() - chosen_.size();
            if (best_.size() >= chosen_.size() && cover(cand, need) <= need) return;

            std::size_t v = cand.first();
            cand.reset(v);
            Bits with = cand;
            with.and_not(adj_[v]);
            chosen_.push_back(v);
            expand(with);
            chosen_.pop_back();
            // Exclude v: continue with the remaining candidates.
        }
    }

    std::vector<Bits> adj_;
    std::size_t upper_;
    std::uint64_t budget_;
    std::uint64_t nodes_ = 0;
    bool exhausted_ = false;
    bool done_ = false;
    std::vector<std::size_t> chosen_;
    std::vector<std::size_t> best_;
};

} // namespace detail

/// Exact maximum zero-error codebook of length n: a maximum independent set of
/// the confusability graph on all q^n words, lexicographically least among
/// maximum ones.
///
/// Branch and bound over bit-vector adjacency with a greedy clique-cover bound.
/// Confusability is translation invariant, so the lexicographically least
/// maximum set contains the all-zero word and the search is rooted there.
/// Throws ResourceError when q^n exceeds `max_words` and CodebookSearchExhausted
/// when the node budget runs out.
inline Codebook max_codebook(const NoiseMachine& m, std::size_t n, const CodebookOptions& opts = {}) {
    if (n == 0) throw PreconditionError("max_codebook: blocklength must be positive");
    const std::uint32_t q = m.q();
    const std::uint64_t total = detail::checked_pow(q, n, opts.max_words);
    if (total > opts.max_words)
        throw ResourceError("confusability graph on q^n words exceeds the guard of " +
                            std::to_string(opts.max_words) + " words");

    CoupledGraph g(m);
    auto confusing = realizable_table(g, n);
    std::vector<detail::Bits> adj(total, detail::Bits(total));
    for (std::uint64_t v = 0; v < total; ++v) {
        auto wv = word_from_index(v, n, q);
        for (std::uint64_t d = 1; d < total; ++d) {
            if (!confusing[d]) continue;
            auto wd = word_from_index(d, n, q);
            for (std::size_t i = 0; i < n; ++i) wd[i] = add_mod(wd[i], wv[i], q);
            adj[v].set(index_of_word(wd, q));
        }
    }

    const std::size_t upper = std::min<std::size_t>(codebook_upper_bound(m, n), total);
    detail::IndependentSetSearch search(std::move(adj), upper, opts.node_budget);
    auto best = search.run(0);

    Codebook cb{n, q, {}};
    for (auto v : best) cb.words.push_back(word_from_index(v, n, q));
    if (search.exhausted())
        throw CodebookSearchExhausted("exact codebook search for n=" + std::to_string(n) + " exhausted its budget of " +
                                          std::to_string(opts.node_budget) + " nodes (best found " +
                                          std::to_string(cb.size()) + ", proven upper bound " +
                                          std::to_string(upper) + ")",
                                      cb, upper);
    return cb;
}

struct UniversalityResult {
    bool all_realizable = true;
    std::optional<Word> counterexample; ///< shortest, then lexicographically least
    std::uint64_t sequences_checked = 0;
};

/// Checks every label sequence of length 1..max_len directly on pairs of
/// machine states, without the coupled graph or the subset search.
inline UniversalityResult universality_oracle(const NoiseMachine& m, std::size_t max_len) {
    const auto n = m.num_states();
    const auto q = m.q();
    using PairSet = std::vector<char>;
    UniversalityResult r;

    auto step = [&](const PairSet& cur, Symbol d) {
        PairSet next(static_cast<std::size_t>(n) * n, 0);
        for (State i = 0; i < n; ++i)
            for (State j = 0; j < n; ++j) {
                if (!cur[static_cast<std::size_t>(i) * n + j]) continue;
                for (const auto& a : m.out_edges(i))
                    for (const auto& b : m.out_edges(j))
                        if (sub_mod(a.noise, b.noise, q) == d) next[static_cast<std::size_t>(a.to) * n + b.to] = 1;
            }
        return next;
    };

    Word prefix;
    auto rec = [&](auto&& self, const PairSet& cur) -> void {
        if (prefix.size() == max_len) return;
        if (r.counterexample && prefix.size() + 1 > r.counterexample->size()) return;
        for (Symbol d = 0; d < q; ++d) {
            prefix.push_back(d);
            ++r.sequences_checked;
            auto next = step(cur, d);
            if (std::find(next.begin(), next.end(), 1) == next.end()) {
                if (!r.counterexample || prefix.size() < r.counterexample->size()) r.counterexample = prefix;
            } else {
                self(self, next);
            }
            prefix.pop_back();
        }
    };
    rec(rec, PairSet(static_cast<std::size_t>(n) * n, 1));
    r.all_realizable = !r.counterexample.has_value();
    return r;
}

} // namespace zecap
