#include "fixtures.hpp"

#include <zecap/spectral.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace zecap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

// Largest real root of x^3 - x^2 - x - 1 by bisection on [1, 2].
double tribonacci_root() {
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid * mid * mid - mid * mid - mid - 1.0 < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double residual(const CountMatrix& a, const PerronResult& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += static_cast<double>(a[i][j]) * p.vector[j];
        r = std::max(r, std::abs(s - p.value * p.vector[i]));
    }
    return r;
}

} // namespace

TEST_CASE("perron of small matrices") {
    SECTION("golden ratio") {
        auto p = perron({{1, 1}, {1, 0}});
        CHECK_THAT(p.value, WithinAbs(phi, 1e-10));
        CHECK_THAT(p.vector[0], WithinAbs(1.0, 1e-12));
        CHECK_THAT(p.vector[1], WithinAbs(1.0 / phi, 1e-10));
    }
    SECTION("single noiseless state") {
        auto p = perron({{1}});
        CHECK_THAT(p.value, WithinAbs(1.0, 1e-12));
        CHECK(p.vector == std::vector<double>{1.0});
    }
    SECTION("tribonacci") {
        auto p = perron({{1, 1, 0}, {1, 0, 1}, {1, 0, 0}});
        CHECK_THAT(p.value, WithinAbs(tribonacci_root(), 1e-9));
        CHECK_THAT(p.value, WithinAbs(1.8392868, 1e-7));
    }
    SECTION("periodic graph converges") {
        auto p = perron({{0, 1}, {1, 0}});
        CHECK_THAT(p.value, WithinAbs(1.0, 1e-10));
        auto q = perron({{0, 2}, {2, 0}});
        CHECK_THAT(q.value, WithinAbs(2.0, 1e-10));
    }
}

TEST_CASE("perron errors") {
    CHECK_THROWS_AS(perron({}), PreconditionError);
    CHECK_THROWS_AS(perron({{1}}, {0.0, 10}), PreconditionError);
    CHECK_THROWS_AS(perron({{1, 1, 0}, {1, 0, 1}, {1, 0, 0}}, {1e-300, 3}), ConvergenceError);
}

TEST_CASE("perron matches closed forms on the corpus") {
    CHECK_THAT(spectral_summary(fixtures::fig2()).perron_value, WithinAbs(phi, 1e-9));
    CHECK_THAT(spectral_summary(fixtures::fig1()).perron_value, WithinAbs(tribonacci_root(), 1e-9));
    CHECK_THAT(spectral_summary(fixtures::fig6()).perron_value, WithinAbs(phi, 1e-9));
}

TEST_CASE("topological entropy") {
    CHECK_THAT(topological_entropy(fixtures::fig2()), WithinAbs(std::log2(phi), 1e-9));
    CHECK_THAT(topological_entropy(fixtures::fig2()), WithinAbs(0.6942419, 1e-7));
    CHECK_THAT(topological_entropy(fixtures::noiseless()), WithinAbs(0.0, 1e-12));
    CHECK_THAT(topological_entropy(fixtures::full_noise(4)), WithinAbs(2.0, 1e-12));
}

TEST_CASE("spectral summary invariants") {
    std::vector<NoiseMachine> ms{fixtures::fig1(), fixtures::fig2(), fixtures::fig6(), fixtures::cycle(5)};
    std::mt19937 rng(3);
    for (int i = 0; i < 40; ++i) ms.push_back(fixtures::random_machine(rng));
    const PerronOptions opts;
    for (const auto& m : ms) {
        auto s = spectral_summary(m, opts);
        auto p = perron(s.adjacency, opts);
        CHECK(residual(s.adjacency, p) <= 10 * opts.tol);
        CHECK(*std::max_element(s.perron_vector.begin(), s.perron_vector.end()) == 1.0);
        for (double v : s.perron_vector) CHECK(v > 0.0);
        CHECK(s.alpha > 0.0);
        CHECK(s.alpha <= 1.0);
        CHECK(s.beta >= 1.0);
        CHECK_THAT(s.alpha * s.beta, WithinAbs(1.0, 1e-12));
        CHECK(s.perron_value >= 1.0 - 1e-12);
        CHECK(s.perron_value <= m.q() + 1e-12);
    }
}

TEST_CASE("exact noise sequence counts") {
    CHECK(count_noise_sequences(fixtures::fig2(), 0, 3) == 5);
    CHECK(count_noise_sequences(fixtures::fig1(), 2, 1) == 1);
    CHECK(count_noise_sequences(fixtures::fig1(), 0, 0) == 1);
    CHECK(count_noise_sequences(fixtures::fig6(), 1, 0) == 1);
    // Fibonacci from either state of the golden-ratio machine.
    std::uint64_t a = 1, b = 2;
    for (std::size_t n = 1; n <= 60; ++n) {
        CHECK(count_noise_sequences(fixtures::fig2(), 0, n) == b);
        CHECK(count_noise_sequences(fixtures::fig2(), 1, n) == a);
        std::tie(a, b) = std::pair{b, a + b};
    }
    CHECK_THROWS_AS(count_noise_sequences(fixtures::fig2(), 2, 1), PreconditionError);
}

TEST_CASE("count overflow is detected, never wrapped") {
    auto m = fixtures::full_noise(4);
    CHECK(count_noise_sequences(m, 0, 31) == (std::uint64_t{1} << 62));
    CHECK_THROWS_AS(count_noise_sequences(m, 0, 32), OverflowError);
    CHECK_THROWS_AS(count_noise_sequences(fixtures::fig2(), 0, 200), OverflowError);
}

TEST_CASE("count bounds") {
    auto b = count_bounds(fixtures::fig2(), 3);
    CHECK(b.lower <= 5.0);
    CHECK(5.0 <= b.upper);

    for (std::size_t n : {0u, 1u, 7u}) {
        auto c = count_bounds(fixtures::noiseless(), n);
        CHECK_THAT(c.lower, WithinAbs(1.0, 1e-12));
        CHECK_THAT(c.upper, WithinAbs(1.0, 1e-12));
    }

    auto f1 = fixtures::fig1();
    auto d = count_bounds(f1, 6);
    for (State s = 0; s < 3; ++s) {
        auto count = static_cast<double>(count_noise_sequences(f1, s, 6));
        CHECK(d.lower <= count);
        CHECK(count <= d.upper);
    }
}

TEST_CASE("counts lie within the spectral bounds and grow") {
    std::vector<NoiseMachine> ms{fixtures::fig1(), fixtures::fig2(), fixtures::fig6()};
    std::mt19937 rng(17);
    for (int i = 0; i < 20; ++i) ms.push_back(fixtures::random_machine(rng));
    for (const auto& m : ms) {
        auto s = spectral_summary(m);
        for (State s0 = 0; s0 < m.num_states(); ++s0) {
            std::uint64_t prev = 0;
            for (std::size_t n = 0; n <= 12; ++n) {
                const auto c = count_noise_sequences(m, s0, n);
                const auto b = count_bounds(s, n);
                const double eps = 1e-6 * b.upper;
                CHECK(b.lower - eps <= static_cast<double>(c));
                CHECK(static_cast<double>(c) <= b.upper + eps);
                CHECK(c >= prev);
                prev = c;
            }
        }
    }
}

TEST_CASE("adjacency counts parallel edges") {
    auto m = NoiseMachine({3, 2, {{0, 1, 0}, {0, 1, 1}, {1, 0, 0}}});
    auto a = adjacency(m);
    CHECK(a[0][1] == 2);
    CHECK(a[1][0] == 1);
    CHECK(a[0][0] == 0);
    CHECK_THAT(spectral_summary(m).perron_value, WithinRel(std::sqrt(2.0), 1e-10));
}
