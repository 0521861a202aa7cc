#pragma once

// Counter-based sampling. Every draw is a pure function of (key, counter),
// so per-cell substreams keyed by (seed, generator) make the telescopic
// sampler reproducible independently of evaluation order and thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "mfshift/measures.hpp"
#include "mfshift/potential.hpp"

namespace mfshift {

struct CounterRng {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;

    static CounterRng from_seed(std::uint64_t seed);
    static CounterRng substream(std::uint64_t seed, std::uint64_t cell);

    std::uint64_t next_u64();
    double next_double();  // uniform in [0, 1)
};

Word sample_markov(const MarkovMeasure& mm, std::int64_t length, CounterRng& rng);
Word sample_markov(const MarkovMeasure& mm, std::int64_t length, std::uint64_t seed);

// x_1..x_n from the telescopic product of the chain: cell of generator i is
// an independent chain sample from substream (seed, i) scattered to
// positions i, iq, iq^2, ...
Word sample_telescopic(const MarkovMeasure& base, int q, std::int64_t n,
                       std::uint64_t seed);

struct LlnTrial {
    double ergodic_average = 0;
    double local_dimension = 0;
};

struct LlnReport {
    double s = 0;
    std::int64_t n = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<LlnTrial> rows;
    double target_average = 0;    // P'(s)
    double mean_average = 0;
    double sd_average = 0;
    double target_dimension = 0;  // (-s P'(s) + P(s)) / (q^(ell-1) log m)
    double mean_dimension = 0;
    double sd_dimension = 0;

    std::string to_csv() const;
};

// Per trial t: sample x_1..x_N, N = n q^(ell-1), from the telescopic product
// of the parameter-s chain with substream seed (seed, t); record A_n phi(x)
// and the empirical local dimension -log_m P([x_1..x_N]) / N.
LlnReport lln_experiment(const Potential& p, double s, std::int64_t n,
                         int trials, std::uint64_t seed, int threads = 1);

}  // namespace mfshift
