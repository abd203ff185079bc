#pragma once

// Zero-error capacities from topological entropy, and the ordinary feedback
// capacity log2(q) - H(Z) of stochastic Markov parametrizations.

#include <zecap/coupled.hpp>
#include <zecap/errors.hpp>
#include <zecap/machine.hpp>
#include <zecap/spectral.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zecap {

struct CapacityOptions {
    PerronOptions perron;
    ZeroTestOptions zero_test;
};

/// All quantities in bits per channel use.
struct CapacityReport {
    std::uint32_t q = 0;
    double perron_value = 0.0;
    double entropy_bits = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    Verdict verdict = Verdict::CapacityZero;
    std::optional<Word> witness;
    double c0f_bits = 0.0;
    double c0_lower_bits = 0.0;
    double c0_upper_bits = 0.0;
};

/// C0f = log2 q - h(Z) and max(0, log2 q - 2 h(Z)) <= C0 <= C0f, or all zero
/// when the coupled graph realizes every label sequence.
inline CapacityReport capacity_report(const NoiseMachine& m, const CapacityOptions& opts = {}) {
    auto spectral = spectral_summary(m, opts.perron);
    auto zero = zero_capacity_test(m, opts.zero_test);

    CapacityReport r;
    r.q = m.q();
    r.perron_value = spectral.perron_value;
    r.entropy_bits = spectral.entropy_bits;
    r.alpha = spectral.alpha;
    r.beta = spectral.beta;
    r.verdict = zero.verdict;
    r.witness = std::move(zero.witness);
    if (r.verdict == Verdict::CapacityPositive) {
        const double log_q = std::log2(static_cast<double>(m.q()));
        r.c0f_bits = log_q - r.entropy_bits;
        r.c0_lower_bits = std::max(0.0, log_q - 2.0 * r.entropy_bits);
        r.c0_upper_bits = r.c0f_bits;
    }
    return r;
}

/// A noise machine with a stationary transition probability on each edge.
///
/// `probabilities[i]` belongs to `machine().edges()[i]`. Every edge must have
/// positive probability and each state's outgoing probabilities sum to one.
class MarkovChannel {
public:
    static constexpr double sum_tolerance = 1e-12;

    MarkovChannel(NoiseMachine machine, std::vector<double> probabilities)
        : machine_(std::move(machine)), prob_(std::move(probabilities)) {
        const auto& edges = machine_.edges();
        if (prob_.size() != edges.size())
            throw ValidationError("expected " + std::to_string(edges.size()) + " edge probabilities, got " +
                                  std::to_string(prob_.size()));
        std::vector<double> sums(machine_.num_states(), 0.0);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (!(prob_[i] > 0.0) || prob_[i] > 1.0)
                throw ValidationError("edge probability must lie in (0, 1], got " + std::to_string(prob_[i]));
            sums[edges[i].from] += prob_[i];
        }
        for (State s = 0; s < sums.size(); ++s)
            if (std::abs(sums[s] - 1.0) > sum_tolerance)
                throw ValidationError("outgoing probabilities of state " + std::to_string(s) + " sum to " +
                                      std::to_string(sums[s]));
    }

    const NoiseMachine& machine() const noexcept { return machine_; }
    const std::vector<double>& probabilities() const noexcept { return prob_; }

    Eigen::MatrixXd transition_matrix() const {
        const auto n = machine_.num_states();
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
        const auto& edges = machine_.edges();
        for (std::size_t i = 0; i < edges.size(); ++i) p(edges[i].from, edges[i].to) += prob_[i];
        return p;
    }

private:
    NoiseMachine machine_;
    std::vector<double> prob_;
};

/// Solves pi P = pi with sum(pi) = 1.
inline Eigen::VectorXd stationary_distribution(const MarkovChannel& mc) {
    const Eigen::MatrixXd p = mc.transition_matrix();
    const auto n = p.rows();
    Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw Error("stationary distribution is not unique: chain is not irreducible");
    return lu.solve(b);
}

/// Entropy rate of the stationary noise process in bits per use.
///
/// Each edge carries a distinct noise label within its state, so the noise
/// entropy rate equals the edge-process entropy rate sum_s pi_s H(P(s, .)).
inline double entropy_rate(const MarkovChannel& mc) {
    const auto pi = stationary_distribution(mc);
    const auto& edges = mc.machine().edges();
    const auto& prob = mc.probabilities();
    double h = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (prob[i] < 1.0) h -= pi(edges[i].from) * prob[i] * std::log2(prob[i]);
    return h;
}

inline double feedback_capacity(const MarkovChannel& mc) {
    return std::log2(static_cast<double>(mc.machine().q())) - entropy_rate(mc);
}

struct MinimizeOptions {
    std::size_t grid_points = 99; ///< per free parameter, evenly spaced on [grid_lo, grid_hi]
    double grid_lo = 0.01;
    double grid_hi = 0.99;
    double refine_tol = 1e-6;
    std::size_t max_free_parameters = 4;
};

struct MinimizationResult {
    double min_bits = 0.0;
    std::vector<double> parameters;        ///< stick-breaking coordinates, one per free parameter
    std::vector<double> edge_probabilities; ///< argmin, aligned with machine.edges()
    std::size_t evaluations = 0;
};

/// Number of free transition parameters: sum over states of (out-degree - 1).
inline std::size_t free_parameter_count(const NoiseMachine& m) {
    std::size_t k = 0;
    for (State s = 0; s < m.num_states(); ++s) k += m.out_degree(s) - 1;
    return k;
}

/// Maps stick-breaking coordinates t in (0,1)^k to edge probabilities: within a
/// state, edges in label order get t1, (1-t1) t2, ..., and the remainder.
inline std::vector<double> edge_probabilities_from(const NoiseMachine& m, const std::vector<double>& t) {
    std::vector<double> p(m.edges().size());
    std::size_t next = 0;
    std::size_t base = 0;
    for (State s = 0; s < m.num_states(); ++s) {
        const auto d = m.out_degree(s);
        double rest = 1.0;
        for (std::size_t i = 0; i + 1 < d; ++i) {
            p[base + i] = rest * t[next];
            rest -= p[base + i];
            ++next;
        }
        p[base + d - 1] = rest;
        base += d;
    }
    return p;
}

/// Minimizes the feedback capacity over stationary Markov parametrizations of
/// the machine's edges: grid search, then coordinate-wise golden-section
/// refinement around the best grid point. Ties keep the lexicographically
/// smallest parameter vector.
inline MinimizationResult minimize_feedback_capacity(const NoiseMachine& m, const MinimizeOptions& opts = {}) {
    const std::size_t k = free_parameter_count(m);
    if (k > opts.max_free_parameters)
        throw ResourceError("machine has " + std::to_string(k) + " free transition parameters; the limit is " +
                            std::to_string(opts.max_free_parameters));
    if (opts.grid_points < 2 || !(opts.grid_lo > 0.0) || !(opts.grid_hi < 1.0) || opts.grid_lo >= opts.grid_hi)
        throw PreconditionError("invalid minimization grid");

    MinimizationResult best;
    auto objective = [&](const std::vector<double>& t) {
        ++best.evaluations;
        return feedback_capacity(MarkovChannel(m, edge_probabilities_from(m, t)));
    };

    if (k == 0) {
        best.min_bits = objective({});
        best.edge_probabilities = edge_probabilities_from(m, {});
        return best;
    }

    const double step = (opts.grid_hi - opts.grid_lo) / static_cast<double>(opts.grid_points - 1);
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> t(k);
    best.min_bits = std::numeric_limits<double>::infinity();
    for (;;) {
        for (std::size_t i = 0; i < k; ++i) t[i] = opts.grid_lo + step * static_cast<double>(idx[i]);
        double v = objective(t);
        if (v < best.min_bits) {
            best.min_bits = v;
            best.parameters = t;
        }
        std::size_t i = k;
        while (i > 0 && ++idx[i - 1] == opts.grid_points) idx[--i] = 0;
        if (i == 0) break;
    }

    constexpr double edge = 1e-9;
    constexpr double inv_phi = 0.6180339887498949;
    t = best.parameters;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double a = std::max(edge, t[i] - step), b = std::min(1.0 - edge, t[i] + step);
            auto at = [&](double x) {
                auto u = t;
                u[i] = x;
                return objective(u);
            };
            double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
            double fc = at(c), fd = at(d);
            while (b - a > opts.refine_tol * 1e-2) {
                if (fc <= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = at(d);
                }
            }
            double x = 0.5 * (a + b);
            double fx = at(x);
            if (fx < best.min_bits) {
                moved = std::max(moved, std::abs(x - t[i]));
                t[i] = x;
                best.min_bits = fx;
                best.parameters = t;
            }
        }
        if (moved < opts.refine_tol) break;
    }
    best.edge_probabilities = edge_probabilities_from(m, best.parameters);
    return best;
}

} // namespace zecap
