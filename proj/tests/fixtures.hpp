#pragma once

#include <zecap/machine.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fixtures {

using zecap::MachineDescription;
using zecap::NoiseMachine;

inline NoiseMachine corpus(const std::string& name, std::uint32_t q = 0) {
    std::ifstream in(std::filesystem::path(ZECAP_CORPUS_DIR) / (name + ".json"));
    std::ostringstream ss;
    ss << in.rdbuf();
    auto m = zecap::parse_machine(ss.str());
    return q ? m.with_alphabet(q) : m;
}

inline NoiseMachine fig1(std::uint32_t q = 3) { return corpus("fig1", q); }
inline NoiseMachine fig2(std::uint32_t q = 3) { return corpus("fig2", q); }
inline NoiseMachine fig6() { return corpus("fig6"); }

/// One state, one zero self-loop.
inline NoiseMachine noiseless(std::uint32_t q = 2) { return NoiseMachine({q, 1, {{0, 0, 0}}}); }

/// One state with a self-loop for every symbol.
inline NoiseMachine full_noise(std::uint32_t q) {
    MachineDescription d{q, 1, {}};
    for (std::uint32_t z = 0; z < q; ++z) d.edges.push_back({0, 0, z});
    return NoiseMachine(d);
}

/// 0 -> 1 -> ... -> n-1 -> 0, every edge labeled 0.
inline NoiseMachine cycle(std::uint32_t n, std::uint32_t q = 2) {
    MachineDescription d{q, n, {}};
    for (std::uint32_t s = 0; s < n; ++s) d.edges.push_back({s, (s + 1) % n, 0});
    return NoiseMachine(d);
}

/// Random valid machine: a Hamiltonian cycle through a shuffled state order
/// guarantees strong connectivity, extra edges take fresh labels per state.
inline NoiseMachine random_machine(std::mt19937& rng, std::uint32_t max_states = 4, std::uint32_t max_q = 4) {
    std::uniform_int_distribution<std::uint32_t> states(1, max_states), alphabet(2, max_q);
    const std::uint32_t n = states(rng), q = alphabet(rng);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<std::uint32_t>> free_labels(n);
    for (auto& f : free_labels) {
        f.resize(q);
        std::iota(f.begin(), f.end(), 0u);
        std::shuffle(f.begin(), f.end(), rng);
    }
    MachineDescription d{q, n, {}};
    auto add = [&](std::uint32_t from, std::uint32_t to) {
        d.edges.push_back({from, to, free_labels[from].back()});
        free_labels[from].pop_back();
    };
    for (std::uint32_t i = 0; i < n; ++i) add(order[i], order[(i + 1) % n]);

    std::uniform_int_distribution<std::uint32_t> pick(0, n - 1), extra(0, n * (q - 1));
    for (std::uint32_t k = extra(rng); k > 0; --k) {
        std::uint32_t from = pick(rng);
        if (!free_labels[from].empty()) add(from, pick(rng));
    }
    return NoiseMachine(d);
}

/// Noise sequences of length n from s0 by direct walk enumeration.
inline std::vector<zecap::Word> walks(const NoiseMachine& m, zecap::State s0, std::size_t n) {
    std::vector<zecap::Word> out;
    zecap::Word z;
    auto rec = [&](auto&& self, zecap::State s) -> void {
        if (z.size() == n) {
            out.push_back(z);
            return;
        }
        for (const auto& e : m.edges()) {
            if (e.from != s) continue;
            z.push_back(e.noise);
            self(self, e.to);
            z.pop_back();
        }
    };
    rec(rec, s0);
    std::sort(out.begin(), out.end());
    return out;
}

/// d is realizable iff d = z - z' for feasible z, z' from any two start states.
inline bool realizable_by_walks(const NoiseMachine& m, const zecap::Word& d) {
    std::vector<zecap::Word> all;
    for (zecap::State s = 0; s < m.num_states(); ++s) {
        auto w = walks(m, s, d.size());
        all.insert(all.end(), w.begin(), w.end());
    }
    for (const auto& z : all)
        for (const auto& z2 : all) {
            bool match = true;
            for (std::size_t i = 0; i < d.size() && match; ++i) match = zecap::sub_mod(z[i], z2[i], m.q()) == d[i];
            if (match) return true;
        }
    return false;
}

/// All words of length n over 0..q-1 in lexicographic order.
inline std::vector<zecap::Word> all_words(std::uint32_t q, std::size_t n) {
    std::vector<zecap::Word> out;
    zecap::Word w(n, 0);
    for (;;) {
        out.push_back(w);
        std::size_t i = n;
        while (i > 0 && ++w[i - 1] == q) w[--i] = 0;
        if (i == 0) break;
    }
    return out;
}

} // namespace fixtures
