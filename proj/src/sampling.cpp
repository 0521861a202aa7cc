#include "mfshift/sampling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mfshift/pressure_analysis.hpp"
#include "mfshift/text.hpp"
#include "mfshift/transfer.hpp"

namespace mfshift {

namespace {

// splitmix64 finalizer: bijective, passes the usual avalanche batteries.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int draw_index(const double* row, int count, double u) {
    double acc = 0;
    for (int j = 0; j < count; ++j) {
        acc += row[j];
        if (u < acc) return j;
    }
    return count - 1;  // guard against rounding in the cumulative sum
}

}  // namespace

CounterRng CounterRng::from_seed(std::uint64_t seed) {
    return CounterRng{mix64(seed), 0};
}

CounterRng CounterRng::substream(std::uint64_t seed, std::uint64_t cell) {
    return CounterRng{mix64(mix64(seed) ^ mix64(~cell)), 0};
}

std::uint64_t CounterRng::next_u64() {
    return mix64(key + 0x9E3779B97F4A7C15ull * ++counter);
}

double CounterRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1p-53;
}

Word sample_markov(const MarkovMeasure& mm, std::int64_t length, CounterRng& rng) {
    if (length < 0) throw std::invalid_argument("sample_markov: negative length");
    const int m = mm.params.m;
    const int ell = mm.params.ell;
    const std::int64_t tail = mm.params.state_count() / m;
    Word w;
    w.reserve(static_cast<size_t>(length));

    // First min(length, ell-1) symbols from the prefix-marginal conditionals
    // p(j | w) = exp(log_prefix[k][w.j] - log_prefix[k-1][w]).
    std::int64_t prefix = 0;
    std::vector<double> cond(static_cast<size_t>(m));
    for (int k = 1; k <= std::min<std::int64_t>(length, ell - 1); ++k) {
        const Eigen::ArrayXd& cur = mm.log_prefix[static_cast<size_t>(k)];
        const double parent = mm.log_prefix[static_cast<size_t>(k - 1)][prefix];
        for (int j = 0; j < m; ++j)
            cond[static_cast<size_t>(j)] = std::exp(cur[prefix * m + j] - parent);
        const int j = draw_index(cond.data(), m, rng.next_double());
        w.push_back(j);
        prefix = prefix * m + j;
    }
    if (static_cast<std::int64_t>(w.size()) == length) return w;

    std::int64_t state = prefix;  // full (ell-1)-word now
    std::vector<double> row(static_cast<size_t>(m));
    while (static_cast<std::int64_t>(w.size()) < length) {
        for (int j = 0; j < m; ++j) row[static_cast<size_t>(j)] = mm.transition(state, j);
        const int j = draw_index(row.data(), m, rng.next_double());
        w.push_back(j);
        state = (state % tail) * m + j;
    }
    return w;
}

Word sample_markov(const MarkovMeasure& mm, std::int64_t length, std::uint64_t seed) {
    CounterRng rng = CounterRng::from_seed(seed);
    return sample_markov(mm, length, rng);
}

Word sample_telescopic(const MarkovMeasure& base, int q, std::int64_t n,
                       std::uint64_t seed) {
    if (q < 2) throw std::invalid_argument("sample_telescopic: q must be >= 2");
    if (n < 0) throw std::invalid_argument("sample_telescopic: negative length");
    Word x(static_cast<size_t>(n), 0);
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i % q == 0) continue;
        CounterRng rng = CounterRng::substream(seed, static_cast<std::uint64_t>(i));
        std::int64_t len = 0;
        for (std::int64_t pos = i; pos <= n; pos *= q) {
            ++len;
            if (pos > n / q) break;
        }
        Word cell = sample_markov(base, len, rng);
        std::int64_t pos = i;
        for (std::int64_t t = 0; t < len; ++t) {
            x[static_cast<size_t>(pos - 1)] = cell[static_cast<size_t>(t)];
            pos *= q;
        }
    }
    return x;
}

std::string LlnReport::to_csv() const {
    std::ostringstream out;
    out << "# s=" << format_double(s) << " n=" << n << " trials=" << trials
        << " seed=" << seed << "\n";
    out << "# target_average=" << format_double(target_average)
        << " mean_average=" << format_double(mean_average)
        << " sd_average=" << format_double(sd_average) << "\n";
    out << "# target_dimension=" << format_double(target_dimension)
        << " mean_dimension=" << format_double(mean_dimension)
        << " sd_dimension=" << format_double(sd_dimension) << "\n";
    out << "trial,ergodic_average,local_dimension\n";
    for (size_t t = 0; t < rows.size(); ++t)
        out << t << "," << format_double(rows[t].ergodic_average) << ","
            << format_double(rows[t].local_dimension) << "\n";
    return out.str();
}

LlnReport lln_experiment(const Potential& p, double s, std::int64_t n, int trials,
                         std::uint64_t seed, int threads) {
    if (n < 1) throw std::invalid_argument("lln_experiment: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("lln_experiment: trials must be >= 1");
    if (threads < 1) threads = 1;

    FixedPoint fp = solve_fixed_point(p, s);
    if (!fp.converged)
        throw std::runtime_error("transfer solver did not converge");
    MarkovMeasure mm = markov_from_fixed_point(fp);
    const int q = p.params.q;
    const std::int64_t N = n * checked_pow(q, p.params.ell - 1);
    const double scale =
        static_cast<double>(checked_pow(q, p.params.ell - 1)) * std::log(p.params.m);

    LlnReport rep;
    rep.s = s;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    rep.rows.resize(static_cast<size_t>(trials));
    rep.target_average = ruelle_derivative(p, s);
    rep.target_dimension = (-s * rep.target_average + pressure(fp)) / scale;

    const MarkovOracle oracle(mm);
    auto run = [&](int first, int stride) {
        for (int t = first; t < trials; t += stride) {
            const std::uint64_t trial_seed =
                mix64(seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(t) + 1));
            Word x = sample_telescopic(mm, q, N, trial_seed);
            rep.rows[static_cast<size_t>(t)].ergodic_average =
                multiple_ergodic_sum(p, x, n).average;
            rep.rows[static_cast<size_t>(t)].local_dimension =
                -telescopic_log_cylinder(oracle, q, x) /
                (static_cast<double>(N) * std::log(p.params.m));
        }
    };
    if (threads == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
        for (auto& th : pool) th.join();
    }

    double sum_a = 0, sum_d = 0;
    for (const LlnTrial& r : rep.rows) {
        sum_a += r.ergodic_average;
        sum_d += r.local_dimension;
    }
    rep.mean_average = sum_a / trials;
    rep.mean_dimension = sum_d / trials;
    double var_a = 0, var_d = 0;
    for (const LlnTrial& r : rep.rows) {
        var_a += (r.ergodic_average - rep.mean_average) *
                 (r.ergodic_average - rep.mean_average);
        var_d += (r.local_dimension - rep.mean_dimension) *
                 (r.local_dimension - rep.mean_dimension);
    }
    if (trials > 1) {
        rep.sd_average = std::sqrt(var_a / (trials - 1));
        rep.sd_dimension = std::sqrt(var_d / (trials - 1));
    }
    return rep;
}

}  // namespace mfshift
