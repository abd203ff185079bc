#pragma once

// Perron value, topological entropy and exact noise-sequence counts.

#include <zecap/errors.hpp>
#include <zecap/machine.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace zecap {

using CountMatrix = std::vector<std::vector<std::uint64_t>>;

/// A[i][j] = number of edges i -> j.
inline CountMatrix adjacency(const NoiseMachine& m) {
    CountMatrix a(m.num_states(), std::vector<std::uint64_t>(m.num_states(), 0));
    for (const auto& e : m.edges()) ++a[e.from][e.to];
    return a;
}

struct PerronOptions {
    double tol = 1e-12;
    std::size_t max_iterations = 1'000'000;
};

struct PerronResult {
    double value = 0.0;
    std::vector<double> vector; ///< strictly positive, max component 1
    std::size_t iterations = 0;
};

/// Perron value and vector of an irreducible nonnegative matrix.
///
/// Iterates on A + I, which is primitive whenever A is irreducible, so periodic
/// graphs converge too; the Perron value of A is that of A + I minus one.
/// Stops once successive normalized iterates differ by less than `tol` in the
/// max norm, and throws ConvergenceError after `max_iterations`.
inline PerronResult perron(const CountMatrix& a, const PerronOptions& opts = {}) {
    const std::size_t n = a.size();
    if (n == 0) throw PreconditionError("perron: empty matrix");
    if (!(opts.tol > 0)) throw PreconditionError("perron: tolerance must be positive");

    std::vector<double> v(n, 1.0), w(n);
    double mu = 0.0;
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = v[i];
            for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(a[i][j]) * v[j];
            w[i] = s;
        }
        mu = *std::max_element(w.begin(), w.end());
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] /= mu;
            change = std::max(change, std::abs(w[i] - v[i]));
        }
        v.swap(w);
        if (change < opts.tol) {
            if (*std::min_element(v.begin(), v.end()) <= 0.0)
                throw PreconditionError("perron: matrix is not irreducible");
            return {mu - 1.0, v, it};
        }
    }
    throw ConvergenceError("power iteration did not reach tolerance " + std::to_string(opts.tol) + " within " +
                           std::to_string(opts.max_iterations) + " iterations");
}

struct SpectralSummary {
    CountMatrix adjacency;
    double perron_value = 0.0;
    std::vector<double> perron_vector;
    double entropy_bits = 0.0;
    double alpha = 0.0; ///< v_min / v_max
    double beta = 0.0;  ///< v_max / v_min
};

inline SpectralSummary spectral_summary(const NoiseMachine& m, const PerronOptions& opts = {}) {
    SpectralSummary s;
    s.adjacency = adjacency(m);
    auto p = perron(s.adjacency, opts);
    s.perron_value = p.value;
    s.perron_vector = std::move(p.vector);
    s.entropy_bits = std::log2(s.perron_value);
    double vmin = *std::min_element(s.perron_vector.begin(), s.perron_vector.end());
    s.alpha = vmin;
    s.beta = 1.0 / vmin;
    return s;
}

/// h(Z) = log2 of the Perron value, in bits per channel use.
inline double topological_entropy(const NoiseMachine& m, const PerronOptions& opts = {}) {
    return std::log2(perron(adjacency(m), opts).value);
}

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("noise sequence count exceeds 64 bits");
    return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("noise sequence count exceeds 64 bits");
    return r;
}

} // namespace detail

/// Number of noise sequences of length n from s0, i.e. the row sum of A^n at s0.
///
/// Exact: uses checked 64-bit arithmetic and throws OverflowError rather than wrap.
inline std::uint64_t count_noise_sequences(const NoiseMachine& m, State s0, std::size_t n) {
    if (s0 >= m.num_states()) throw PreconditionError("count_noise_sequences: no such state");
    const auto a = adjacency(m);
    const std::size_t k = a.size();
    // paths[i] = number of length-t paths starting at i; start from the all-ones vector.
    std::vector<std::uint64_t> paths(k, 1), next(k);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < k; ++i) {
            std::uint64_t s = 0;
            for (std::size_t j = 0; j < k; ++j)
                if (a[i][j]) s = detail::checked_add(s, detail::checked_mul(a[i][j], paths[j]));
            next[i] = s;
        }
        paths.swap(next);
    }
    return paths[s0];
}

struct CountBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// (alpha * lambda^n, beta * lambda^n): bounds on the count from every start state.
inline CountBounds count_bounds(const SpectralSummary& s, std::size_t n) {
    const double growth = std::pow(s.perron_value, static_cast<double>(n));
    return {s.alpha * growth, s.beta * growth};
}

inline CountBounds count_bounds(const NoiseMachine& m, std::size_t n, const PerronOptions& opts = {}) {
    return count_bounds(spectral_summary(m, opts), n);
}

} // namespace zecap
