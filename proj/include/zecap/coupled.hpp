#pragma once

// The coupled (tensor product) graph of a noise machine and the decision
// procedure for zero zero-error capacity.
//
// A label sequence d is realizable when some walk of the coupled graph, from
// any start pair, carries it. Capacity is zero iff every finite d is
// realizable, i.e. iff the subset automaton started from the full vertex set
// never reaches the empty set.

#include <zecap/errors.hpp>
#include <zecap/machine.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace zecap {

struct CoupledEdge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    Symbol label = 0;

    friend bool operator==(const CoupledEdge&, const CoupledEdge&) = default;
    friend auto operator<=>(const CoupledEdge&, const CoupledEdge&) = default;
};

/// Vertex (i, j) of S x S has index i * |S| + j. Edge ((i,j) -> (k,m), z - z')
/// for each machine edge pair i -z-> k and j -z'-> m; duplicates removed.
class CoupledGraph {
public:
    explicit CoupledGraph(const NoiseMachine& m) : q_(m.q()), n_(m.num_states()) {
        for (State i = 0; i < n_; ++i) {
            for (State j = 0; j < n_; ++j) {
                for (const auto& a : m.out_edges(i)) {
                    for (const auto& b : m.out_edges(j))
                        edges_.push_back({vertex(i, j), vertex(a.to, b.to), sub_mod(a.noise, b.noise, q_)});
                }
            }
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

        succ_.assign(static_cast<std::size_t>(num_vertices()) * q_, {});
        for (const auto& e : edges_) succ_[slot(e.from, e.label)].push_back(e.to);
    }

    std::uint32_t q() const noexcept { return q_; }
    std::uint32_t num_states() const noexcept { return n_; }
    std::uint32_t num_vertices() const noexcept { return n_ * n_; }
    std::uint32_t vertex(State i, State j) const noexcept { return i * n_ + j; }
    std::pair<State, State> pair(std::uint32_t v) const noexcept { return {v / n_, v % n_}; }
    const std::vector<CoupledEdge>& edges() const noexcept { return edges_; }

    /// Targets of the edges leaving `v` with label `d`, ascending.
    const std::vector<std::uint32_t>& successors(std::uint32_t v, Symbol d) const { return succ_[slot(v, d)]; }

    /// Sorted distinct labels on edges leaving `v`.
    std::vector<Symbol> out_labels(std::uint32_t v) const {
        std::vector<Symbol> out;
        for (Symbol d = 0; d < q_; ++d)
            if (!successors(v, d).empty()) out.push_back(d);
        return out;
    }

private:
    std::size_t slot(std::uint32_t v, Symbol d) const { return static_cast<std::size_t>(v) * q_ + d; }

    std::uint32_t q_;
    std::uint32_t n_;
    std::vector<CoupledEdge> edges_;
    std::vector<std::vector<std::uint32_t>> succ_;
};

inline CoupledGraph build_coupled(const NoiseMachine& m) { return CoupledGraph(m); }

/// Vertices reachable from `start` along a walk labeled `d`.
inline std::vector<bool> propagate(const CoupledGraph& g, std::vector<bool> current, std::span<const Symbol> d) {
    std::vector<bool> next(g.num_vertices());
    for (Symbol s : d) {
        if (s >= g.q()) throw PreconditionError("label " + std::to_string(s) + " is not below q");
        std::fill(next.begin(), next.end(), false);
        bool any = false;
        for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
            if (!current[v]) continue;
            for (auto t : g.successors(v, s)) {
                next[t] = true;
                any = true;
            }
        }
        current.swap(next);
        if (!any) break;
    }
    return current;
}

/// True iff some walk starting at any vertex pair carries the label sequence `d`.
inline bool realizable(const CoupledGraph& g, std::span<const Symbol> d) {
    auto end = propagate(g, std::vector<bool>(g.num_vertices(), true), d);
    return std::find(end.begin(), end.end(), true) != end.end();
}

enum class Verdict { CapacityZero, CapacityPositive };

inline const char* to_string(Verdict v) {
    return v == Verdict::CapacityZero ? "CapacityZero" : "CapacityPositive";
}

struct ZeroTestVerdict {
    Verdict verdict = Verdict::CapacityZero;
    /// Shortest, then lexicographically least, unrealizable label sequence.
    std::optional<Word> witness;
    std::size_t subsets_explored = 0;
};

struct ZeroTestOptions {
    std::size_t subset_cap = std::size_t{1} << 20;
};

namespace detail {

// Subsets of coupled vertices: one machine word when |S|^2 <= 64, a word
// vector otherwise.
inline bool set_empty(std::uint64_t s) { return s == 0; }
inline void set_or(std::uint64_t& a, std::uint64_t b) { a |= b; }
inline bool set_test(std::uint64_t s, std::uint32_t v) { return (s >> v) & 1u; }

using WideSet = std::vector<std::uint64_t>;
inline bool set_empty(const WideSet& s) {
    return std::all_of(s.begin(), s.end(), [](std::uint64_t w) { return w == 0; });
}
inline void set_or(WideSet& a, const WideSet& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] |= b[i];
}
inline bool set_test(const WideSet& s, std::uint32_t v) { return (s[v / 64] >> (v % 64)) & 1u; }

struct WideSetHash {
    std::size_t operator()(const WideSet& s) const noexcept {
        std::size_t h = 0xcbf29ce484222325ull;
        for (auto w : s) h = (h ^ std::hash<std::uint64_t>{}(w)) * 0x100000001b3ull;
        return h;
    }
};

template <class Set>
Set singleton(std::uint32_t v, std::uint32_t nv) {
    if constexpr (std::is_same_v<Set, std::uint64_t>) {
        (void)nv;
        return std::uint64_t{1} << v;
    } else {
        Set s((nv + 63) / 64, 0);
        s[v / 64] |= std::uint64_t{1} << (v % 64);
        return s;
    }
}

template <class Set>
Set empty_set(std::uint32_t nv) {
    if constexpr (std::is_same_v<Set, std::uint64_t>) {
        (void)nv;
        return 0;
    } else {
        return Set((nv + 63) / 64, 0);
    }
}

template <class Set>
Set full_set(std::uint32_t nv) {
    Set s = empty_set<Set>(nv);
    for (std::uint32_t v = 0; v < nv; ++v) set_or(s, singleton<Set>(v, nv));
    return s;
}

template <class Set, class Hash>
ZeroTestVerdict subset_bfs(const CoupledGraph& g, const ZeroTestOptions& opts) {
    const auto nv = g.num_vertices();
    const auto q = g.q();
    std::vector<Set> mask(static_cast<std::size_t>(nv) * q, empty_set<Set>(nv));
    for (std::uint32_t v = 0; v < nv; ++v)
        for (Symbol d = 0; d < q; ++d)
            for (auto t : g.successors(v, d)) set_or(mask[static_cast<std::size_t>(v) * q + d], singleton<Set>(t, nv));

    struct Parent {
        std::size_t from;
        Symbol label;
    };
    std::vector<Set> nodes;
    std::vector<Parent> parents;
    std::unordered_map<Set, std::size_t, Hash> index;

    nodes.push_back(full_set<Set>(nv));
    parents.push_back({0, 0});
    index.emplace(nodes.front(), 0);

    auto path_to = [&](std::size_t id) {
        Word w;
        while (id != 0) {
            w.push_back(parents[id].label);
            id = parents[id].from;
        }
        std::reverse(w.begin(), w.end());
        return w;
    };

    // FIFO order with ascending labels visits label paths in shortlex order.
    for (std::size_t head = 0; head < nodes.size(); ++head) {
        for (Symbol d = 0; d < q; ++d) {
            Set next = empty_set<Set>(nv);
            const Set& cur = nodes[head];
            for (std::uint32_t v = 0; v < nv; ++v)
                if (set_test(cur, v)) set_or(next, mask[static_cast<std::size_t>(v) * q + d]);
            if (set_empty(next)) {
                Word w = path_to(head);
                w.push_back(d);
                return {Verdict::CapacityPositive, std::move(w), nodes.size()};
            }
            if (index.contains(next)) continue;
            if (nodes.size() >= opts.subset_cap)
                throw ResourceError("zero-capacity test exceeded the cap of " + std::to_string(opts.subset_cap) +
                                    " explored subsets");
            index.emplace(next, nodes.size());
            nodes.push_back(std::move(next));
            parents.push_back({head, d});
        }
    }
    return {Verdict::CapacityZero, std::nullopt, nodes.size()};
}

} // namespace detail

/// Decides whether the zero-error (feedback) capacity is zero.
///
/// Breadth-first search over subsets of coupled vertices, starting from the
/// full set. Reaching the empty set yields CapacityPositive with the label path
/// as witness; exhausting the reachable family yields CapacityZero. Throws
/// ResourceError once more than `subset_cap` subsets would be stored.
inline ZeroTestVerdict zero_capacity_test(const CoupledGraph& g, const ZeroTestOptions& opts = {}) {
    if (g.num_vertices() <= 64) return detail::subset_bfs<std::uint64_t, std::hash<std::uint64_t>>(g, opts);
    return detail::subset_bfs<detail::WideSet, detail::WideSetHash>(g, opts);
}

inline ZeroTestVerdict zero_capacity_test(const NoiseMachine& m, const ZeroTestOptions& opts = {}) {
    return zero_capacity_test(CoupledGraph(m), opts);
}

} // namespace zecap
