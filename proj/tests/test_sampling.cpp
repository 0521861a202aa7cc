#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>

#include "mfshift/measures.hpp"
#include "mfshift/partition.hpp"
#include "mfshift/sampling.hpp"
#include "mfshift/transfer.hpp"

using namespace mfshift;

namespace {

MarkovMeasure parity_chain(double s) {
    ShiftParams sp{2, 2, 2};
    Eigen::ArrayXd vals(4);
    vals << 1, -1, -1, 1;
    Potential p = make_potential(sp, vals);
    return markov_from_fixed_point(solve_fixed_point(p, s, SolverConfig{1e-14, 20000}));
}

}  // namespace

TEST_CASE("counter generator is deterministic and seed-sensitive") {
    CounterRng a = CounterRng::from_seed(123);
    CounterRng b = CounterRng::from_seed(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng c = CounterRng::from_seed(124);
    int diff = 0;
    CounterRng a2 = CounterRng::from_seed(123);
    for (int i = 0; i < 64; ++i) diff += (a2.next_u64() != c.next_u64());
    CHECK(diff == 64);

    // Substreams of one seed do not collide with each other or the base.
    std::set<std::uint64_t> firsts;
    firsts.insert(CounterRng::from_seed(9).next_u64());
    for (std::uint64_t cell = 1; cell <= 64; ++cell)
        firsts.insert(CounterRng::substream(9, cell).next_u64());
    CHECK(firsts.size() == 65);
}

TEST_CASE("uniform doubles stay in range with the right mean") {
    CounterRng rng = CounterRng::from_seed(2024);
    double sum = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        const double x = rng.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    // SE of the mean is 1/sqrt(12 N) ~ 6.5e-4; allow 5 sigma.
    CHECK(std::fabs(sum / N - 0.5) < 3.3e-3);
}

TEST_CASE("chain sampler matches the stationary frequencies") {
    MarkovMeasure mm = parity_chain(1.0);
    const std::int64_t n = 200000;
    Word x = sample_markov(mm, n, std::uint64_t{77});
    REQUIRE(x.size() == static_cast<size_t>(n));

    double ones = 0, stay = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        ones += x[static_cast<size_t>(i)];
        if (i + 1 < n && x[static_cast<size_t>(i)] == x[static_cast<size_t>(i + 1)])
            ++stay;
    }
    // pi = (1/2, 1/2); P(x_{k+1} = x_k) = e / (e + 1/e).
    const double p_stay = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
    CHECK(std::fabs(ones / n - 0.5) < 4.0 / (2 * std::sqrt(double(n))));
    CHECK(std::fabs(stay / (n - 1) - p_stay) <
          4.0 * std::sqrt(p_stay * (1 - p_stay) / double(n)));

    // Same seed reproduces the word exactly; a different one does not.
    Word y = sample_markov(mm, n, std::uint64_t{77});
    CHECK(x == y);
    Word z = sample_markov(mm, n, std::uint64_t{78});
    CHECK(x != z);
}

TEST_CASE("telescopic sampler restricts to independent cell samples") {
    MarkovMeasure mm = parity_chain(0.6);
    const int q = 2;
    const std::int64_t n = 600;
    const std::uint64_t seed = 4242;
    Word x = sample_telescopic(mm, q, n, seed);
    REQUIRE(x.size() == static_cast<size_t>(n));

    for (const PartitionCell& cell : partition_cells(n, q)) {
        CounterRng sub = CounterRng::substream(seed, static_cast<std::uint64_t>(cell.generator));
        Word expect = sample_markov(mm, static_cast<std::int64_t>(cell.positions.size()), sub);
        for (size_t t = 0; t < cell.positions.size(); ++t)
            CHECK(x[static_cast<size_t>(cell.positions[t] - 1)] == expect[t]);
    }
}

TEST_CASE("long-run averages concentrate near their targets") {
    ShiftParams sp{2, 2, 2};
    Eigen::ArrayXd vals(4);
    vals << 1, -1, -1, 1;
    Potential p = make_potential(sp, vals);

    LlnReport rep = lln_experiment(p, 1.0, 20000, 12, 99, 1);
    REQUIRE(rep.rows.size() == 12);
    CHECK(rep.target_average == doctest::Approx(std::tanh(1.0)).epsilon(1e-9));
    CHECK(rep.target_dimension == doctest::Approx(0.7635326705015807).epsilon(1e-9));
    const double se = rep.sd_average / std::sqrt(12.0);
    CHECK(std::fabs(rep.mean_average - rep.target_average) < 5 * se);
    CHECK(std::fabs(rep.mean_dimension - rep.target_dimension) < 0.05);

    // Thread count changes scheduling only, never the numbers.
    LlnReport rep3 = lln_experiment(p, 1.0, 20000, 12, 99, 3);
    for (int t = 0; t < 12; ++t) {
        CHECK(rep.rows[static_cast<size_t>(t)].ergodic_average ==
              rep3.rows[static_cast<size_t>(t)].ergodic_average);
        CHECK(rep.rows[static_cast<size_t>(t)].local_dimension ==
              rep3.rows[static_cast<size_t>(t)].local_dimension);
    }

    const std::string csv = rep.to_csv();
    CHECK(csv.find("trial,ergodic_average,local_dimension") != std::string::npos);
    // Header plus three comment lines plus one row per trial.
    size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 16);
}
