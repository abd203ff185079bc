#include "fixtures.hpp"

#include <zecap/coupled.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <tuple>

using namespace zecap;

namespace {

std::vector<Symbol> labels(const CoupledGraph& g, State i, State j) { return g.out_labels(g.vertex(i, j)); }

// Shortest, then lexicographically least, sequence with no realizing pair of walks.
std::optional<Word> brute_witness(const NoiseMachine& m, std::size_t max_len) {
    for (std::size_t n = 1; n <= max_len; ++n)
        for (const auto& d : fixtures::all_words(m.q(), n))
            if (!fixtures::realizable_by_walks(m, d)) return d;
    return std::nullopt;
}

} // namespace

TEST_CASE("coupled graph structure") {
    SECTION("fig2, q=3") {
        auto g = build_coupled(fixtures::fig2());
        CHECK(g.num_vertices() == 4);
        CHECK(labels(g, 0, 0) == std::vector<Symbol>{0, 1, 2});
        CHECK(labels(g, 1, 1) == std::vector<Symbol>{0});
        CHECK(labels(g, 0, 1) == std::vector<Symbol>{0, 1});
        CHECK(labels(g, 1, 0) == std::vector<Symbol>{0, 2});
    }
    SECTION("noiseless") {
        auto g = build_coupled(fixtures::noiseless());
        CHECK(g.num_vertices() == 1);
        REQUIRE(g.edges().size() == 1);
        CHECK(g.edges()[0] == CoupledEdge{0, 0, 0});
    }
    SECTION("fig1, q=3") {
        auto g = build_coupled(fixtures::fig1());
        CHECK(g.num_vertices() == 9);
        CHECK(labels(g, 2, 2) == std::vector<Symbol>{0});
        CHECK(g.pair(g.vertex(2, 1)) == std::pair<State, State>{2, 1});
    }
}

TEST_CASE("coupled edges match the definition") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        auto m = fixtures::random_machine(rng);
        auto g = build_coupled(m);
        std::set<std::tuple<std::uint32_t, std::uint32_t, Symbol>> want;
        for (const auto& a : m.edges())
            for (const auto& b : m.edges())
                want.insert({g.vertex(a.from, b.from), g.vertex(a.to, b.to), sub_mod(a.noise, b.noise, m.q())});
        std::set<std::tuple<std::uint32_t, std::uint32_t, Symbol>> got;
        for (const auto& e : g.edges()) got.insert({e.from, e.to, e.label});
        CHECK(got == want);
        CHECK(got.size() == g.edges().size());
        CHECK(g.edges().size() <= m.edges().size() * m.edges().size());
        for (State s = 0; s < m.num_states(); ++s) CHECK(!g.successors(g.vertex(s, s), 0).empty());
    }
}

TEST_CASE("realizable label sequences") {
    auto g3 = build_coupled(fixtures::fig2());
    CHECK(realizable(g3, Word(12, 0)));
    CHECK(realizable(g3, Word{}));
    CHECK_FALSE(realizable(g3, Word{1, 1}));
    CHECK(realizable(g3, Word{1, 2}));
    CHECK_THROWS_AS(realizable(g3, Word{3}), PreconditionError);

    auto g2 = build_coupled(fixtures::fig2(2));
    for (std::size_t n = 1; n <= 8; ++n)
        for (const auto& d : fixtures::all_words(2, n)) CHECK(realizable(g2, d));
}

TEST_CASE("realizable agrees with explicit walk pairs") {
    std::mt19937 rng(29);
    std::vector<NoiseMachine> ms{fixtures::fig1(), fixtures::fig2(), fixtures::fig6()};
    for (int i = 0; i < 15; ++i) ms.push_back(fixtures::random_machine(rng, 3, 3));
    for (const auto& m : ms) {
        auto g = build_coupled(m);
        const std::size_t max_n = m.q() <= 3 ? 4 : 3;
        for (std::size_t n = 1; n <= max_n; ++n)
            for (const auto& d : fixtures::all_words(m.q(), n)) CHECK(realizable(g, d) == fixtures::realizable_by_walks(m, d));
    }
}

TEST_CASE("zero-capacity verdicts") {
    SECTION("fig2, q=2") {
        auto v = zero_capacity_test(fixtures::fig2(2));
        CHECK(v.verdict == Verdict::CapacityZero);
        CHECK_FALSE(v.witness.has_value());
    }
    SECTION("fig2, q=3") {
        auto v = zero_capacity_test(fixtures::fig2());
        CHECK(v.verdict == Verdict::CapacityPositive);
        CHECK(v.witness == Word{1, 1});
    }
    SECTION("fig1, q=2") {
        CHECK(zero_capacity_test(fixtures::fig1(2)).verdict == Verdict::CapacityZero);
    }
    SECTION("fig1, q=3") {
        auto v = zero_capacity_test(fixtures::fig1());
        CHECK(v.verdict == Verdict::CapacityPositive);
        CHECK(v.witness == Word{1, 1, 1});
    }
    SECTION("fig6") {
        CHECK(zero_capacity_test(fixtures::fig6()).witness == Word{2});
    }
    SECTION("noiseless") {
        CHECK(zero_capacity_test(fixtures::noiseless()).witness == Word{1});
    }
    SECTION("full noise") {
        CHECK(zero_capacity_test(fixtures::full_noise(3)).verdict == Verdict::CapacityZero);
    }
}

TEST_CASE("witnesses are minimal and agree with brute force") {
    std::mt19937 rng(31);
    std::vector<NoiseMachine> ms{fixtures::fig1(), fixtures::fig2(), fixtures::fig6(), fixtures::fig2(2),
                                 fixtures::fig1(2)};
    for (int i = 0; i < 25; ++i) ms.push_back(fixtures::random_machine(rng, 3, 3));
    for (const auto& m : ms) {
        auto g = build_coupled(m);
        auto v = zero_capacity_test(g);
        const std::size_t limit = m.q() <= 2 ? 8 : 5;
        auto brute = brute_witness(m, limit);
        if (v.verdict == Verdict::CapacityZero) {
            CHECK_FALSE(brute.has_value());
            continue;
        }
        REQUIRE(v.witness.has_value());
        CHECK_FALSE(realizable(g, *v.witness));
        CHECK(realizable(g, std::span<const Symbol>(*v.witness).first(v.witness->size() - 1)));
        if (v.witness->size() <= limit) CHECK(brute == v.witness);
        else CHECK_FALSE(brute.has_value());
    }
}

TEST_CASE("corpus verdicts match an exhaustive check up to length 8") {
    for (const auto& m : {fixtures::fig2(2), fixtures::fig1(2)}) {
        auto g = build_coupled(m);
        REQUIRE(zero_capacity_test(g).verdict == Verdict::CapacityZero);
        for (std::size_t n = 1; n <= 8; ++n)
            for (const auto& d : fixtures::all_words(m.q(), n)) CHECK(realizable(g, d));
    }
}

TEST_CASE("subset successors are monotone") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        auto m = fixtures::random_machine(rng);
        auto g = build_coupled(m);
        std::bernoulli_distribution coin(0.5);
        std::uniform_int_distribution<Symbol> sym(0, m.q() - 1);
        std::vector<bool> small(g.num_vertices()), big(g.num_vertices());
        for (std::size_t v = 0; v < small.size(); ++v) {
            big[v] = coin(rng);
            small[v] = big[v] && coin(rng);
        }
        Word d{sym(rng), sym(rng)};
        auto a = propagate(g, small, d);
        auto b = propagate(g, big, d);
        for (std::size_t v = 0; v < a.size(); ++v)
            if (a[v]) CHECK(b[v]);
    }
}

TEST_CASE("subset cap is an explicit error") {
    CHECK_THROWS_AS(zero_capacity_test(fixtures::fig1(), {1}), ResourceError);
    CHECK_NOTHROW(zero_capacity_test(fixtures::fig1(), {64}));
}

TEST_CASE("more than 64 coupled vertices use the wide subsets") {
    // 9 states: 81 coupled vertices.
    auto det = fixtures::cycle(9);
    auto v = zero_capacity_test(det);
    CHECK(v.verdict == Verdict::CapacityPositive);
    CHECK(v.witness == Word{1});

    MachineDescription d{2, 9, {}};
    for (State s = 0; s < 9; ++s) {
        d.edges.push_back({s, (s + 1) % 9, 0});
        d.edges.push_back({s, (s + 1) % 9, 1});
    }
    CHECK(zero_capacity_test(NoiseMachine(d)).verdict == Verdict::CapacityZero);

    // Slow cycle with one noisy state: walks from (i, j) drift apart, which
    // the wide search must resolve like the narrow one on a smaller copy.
    for (std::uint32_t n : {4u, 9u}) {
        MachineDescription e{3, n, {}};
        for (State s = 0; s < n; ++s) e.edges.push_back({s, (s + 1) % n, 0});
        e.edges.push_back({0, 0, 1});
        auto m = NoiseMachine(e);
        auto w = zero_capacity_test(m);
        REQUIRE(w.verdict == Verdict::CapacityPositive);
        CHECK_FALSE(realizable(build_coupled(m), *w.witness));
        CHECK(w.witness == brute_witness(m, w.witness->size()));
    }
}
