#include "mfshift/pressure_analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace mfshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SolverConfig tight(double tol) {
    SolverConfig cfg;
    cfg.tol = std::fmin(tol, 1e-12);
    return cfg;
}

// Tail of the double series sum_{k>K} k x^(k+1), times (q-1)^2 * weight:
// rigorous bound on everything discarded after K terms when each window
// expectation is bounded by weight.
double series_tail(int q, int K, double weight) {
    const double x = 1.0 / q;
    const double one_minus = 1.0 - x;
    const double qq = static_cast<double>(q - 1) * static_cast<double>(q - 1);
    return qq * weight * std::pow(x, K + 2) * ((K + 1) * one_minus + x) /
           (one_minus * one_minus);
}

int pick_truncation(int q, double weight, double tol) {
    for (int K = 1; K < 2000; ++K)
        if (series_tail(q, K, weight) < tol) return K;
    return 2000;
}

struct Chain {
    Eigen::ArrayXd dist;               // over S^(ell-1)
    Eigen::MatrixXd trans;             // states x m
    std::int64_t tail = 1;             // m^(ell-2)
    int m = 2;

    void evolve() {
        Eigen::ArrayXd next = Eigen::ArrayXd::Zero(dist.size());
        for (std::int64_t a = 0; a < dist.size(); ++a) {
            if (dist[a] == 0) continue;
            const std::int64_t base = (a % tail) * m;
            for (int j = 0; j < m; ++j) next[base + j] += dist[a] * trans(a, j);
        }
        dist = std::move(next);
    }
};

// Initial law and transition kernel of the fixed-point chain, probabilities
// in the linear domain (each entry is a ratio of psi values, always <= ~1).
Chain chain_from(const FixedPoint& fp) {
    const ShiftParams& sp = fp.potential.params;
    const int m = sp.m;
    const int q = sp.q;
    const std::int64_t states = sp.state_count();
    Chain ch;
    ch.m = m;
    ch.tail = states / m;
    const Eigen::ArrayXd& u = fp.log_psi[static_cast<size_t>(sp.ell - 1)];

    ch.dist.resize(states);
    for (std::int64_t a = 0; a < states; ++a) {
        double acc = 0;
        // prefix indices of the state word, length 1..ell-1
        std::int64_t rev = a;
        std::vector<int> word(static_cast<size_t>(sp.ell - 1));
        for (int t = sp.ell - 2; t >= 0; --t) {
            word[static_cast<size_t>(t)] = static_cast<int>(rev % m);
            rev /= m;
        }
        std::int64_t prefix = 0;
        for (int t = 0; t < sp.ell - 1; ++t) {
            const double prev = fp.log_psi[static_cast<size_t>(t)][prefix];
            prefix = prefix * m + word[static_cast<size_t>(t)];
            const double here = fp.log_psi[static_cast<size_t>(t + 1)][prefix];
            acc += here - q * prev;
        }
        ch.dist[a] = std::exp(acc);
    }
    ch.dist /= ch.dist.sum();

    ch.trans.resize(states, m);
    for (std::int64_t a = 0; a < states; ++a) {
        const std::int64_t base = (a % ch.tail) * m;
        for (int j = 0; j < m; ++j) {
            const double lg =
                fp.s * fp.potential.values[a * m + j] + u[base + j] - q * u[a];
            ch.trans(a, j) = std::exp(lg);
        }
    }
    return ch;
}

double window_mean(const Chain& ch, const Potential& p) {
    double e = 0;
    for (std::int64_t a = 0; a < ch.dist.size(); ++a) {
        if (ch.dist[a] == 0) continue;
        for (int j = 0; j < ch.m; ++j)
            e += ch.dist[a] * ch.trans(a, j) * p.values[a * ch.m + j];
    }
    return e;
}

}  // namespace

double ruelle_derivative(const Potential& p, double s, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    FixedPoint fp = solve_fixed_point(p, s, tight(tol));
    if (!fp.converged)
        throw std::runtime_error("transfer solver did not converge; cannot differentiate");
    const int q = p.params.q;
    const double norm = std::fmax(std::fabs(p.min_value), std::fabs(p.max_value));
    const int K = pick_truncation(q, norm, tol);

    Chain ch = chain_from(fp);
    double total = 0;
    double prefix = 0;
    double weight = 1.0 / (static_cast<double>(q) * q);  // q^-(k+1) at k=1
    for (int k = 1; k <= K; ++k) {
        prefix += window_mean(ch, p);  // adds E_{k-1}
        total += weight * prefix;
        weight /= q;
        if (k < K) ch.evolve();
    }
    return static_cast<double>(q - 1) * static_cast<double>(q - 1) * total;
}

double fd_derivative(const Potential& p, double s, double h) {
    if (!(h > 0)) throw std::invalid_argument("step h must be > 0");
    const double hi = pressure_value(p, s + h);
    const double lo = pressure_value(p, s - h);
    return (hi - lo) / (2 * h);
}

TailValue derivative_at_infinity(const Potential& p, int direction, double tol) {
    if (direction != 1 && direction != -1)
        throw std::invalid_argument("direction must be +1 or -1");
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    const double rtol = std::fmin(1e-12, tol * 1e-2);
    TailValue out;
    double prev = kNaN;
    for (int t = 0; t <= 6; ++t) {
        const double s = direction * 4.0 * std::pow(2.0, t);
        const double val = ruelle_derivative(p, s, rtol);
        out.value = val;
        out.s_reached = s;
        if (t > 0) {
            out.last_delta = std::fabs(val - prev);
            if (out.last_delta < tol) {
                out.converged = true;
                return out;
            }
        }
        prev = val;
    }
    out.converged = false;
    return out;
}

ExtremalResult extremal_attained(const Potential& p, Extremum which) {
    const int m = p.params.m;
    const std::int64_t states = p.params.state_count();
    const std::int64_t tail = states / m;
    const double target =
        (which == Extremum::minimum) ? p.min_value : p.max_value;

    // Depth-first search for a cycle in the graph that keeps every window
    // exactly on the target value. Colors: 0 unseen, 1 on stack, 2 done.
    std::vector<char> color(static_cast<size_t>(states), 0);
    struct Frame {
        std::int64_t node;
        int next_j;
        int via;  // symbol that led here, -1 at a root
    };
    std::vector<Frame> stack;
    for (std::int64_t root = 0; root < states; ++root) {
        if (color[static_cast<size_t>(root)] != 0) continue;
        stack.push_back({root, 0, -1});
        color[static_cast<size_t>(root)] = 1;
        while (!stack.empty()) {
            Frame& fr = stack.back();
            if (fr.next_j == m) {
                color[static_cast<size_t>(fr.node)] = 2;
                stack.pop_back();
                continue;
            }
            const int j = fr.next_j++;
            if (p.values[fr.node * m + j] != target) continue;
            const std::int64_t nxt = (fr.node % tail) * m + j;
            if (color[static_cast<size_t>(nxt)] == 1) {
                // Cycle: emitted symbols from the occurrence of nxt on the
                // stack down to here, plus the closing edge.
                ExtremalResult r;
                r.attained = true;
                size_t at = stack.size();
                while (at > 0 && stack[at - 1].node != nxt) --at;
                for (size_t i = at; i < stack.size(); ++i)
                    r.witness.push_back(stack[i].via);
                r.witness.push_back(j);
                return r;
            }
            if (color[static_cast<size_t>(nxt)] == 0) {
                color[static_cast<size_t>(nxt)] = 1;
                stack.push_back({nxt, 0, j});
            }
        }
    }
    return {};
}

SpectrumDomain spectrum_domain(const Potential& p, double tol) {
    SpectrumDomain dom;
    dom.lower = derivative_at_infinity(p, -1, tol);
    dom.upper = derivative_at_infinity(p, +1, tol);
    ExtremalResult lo = extremal_attained(p, Extremum::minimum);
    ExtremalResult hi = extremal_attained(p, Extremum::maximum);
    dom.lower_attains_min = lo.attained;
    dom.upper_attains_max = hi.attained;
    dom.min_witness = std::move(lo.witness);
    dom.max_witness = std::move(hi.witness);
    return dom;
}

namespace {

double dim_scale(const ShiftParams& sp) {
    return static_cast<double>(checked_pow(sp.q, sp.ell - 1)) * std::log(sp.m);
}

// lim of -s alpha + P(s) along the doubling ladder in the given direction.
SpectrumPoint endpoint_point(const Potential& p, double alpha, int direction,
                             double tol, LevelStatus status) {
    SpectrumPoint pt;
    pt.alpha = alpha;
    pt.status = status;
    pt.s_star = direction > 0 ? kInf : -kInf;
    double prev = kNaN;
    double value = kNaN;
    double pressure_last = kNaN;
    for (int t = 0; t <= 6; ++t) {
        const double s = direction * 4.0 * std::pow(2.0, t);
        pressure_last = pressure_value(p, s, tight(tol));
        value = -s * alpha + pressure_last;
        if (t > 0 && std::fabs(value - prev) < std::fmax(tol, 1e-12)) break;
        prev = value;
    }
    pt.pressure_at_s = pressure_last;
    pt.legendre = value;
    pt.dimension = value / dim_scale(p.params);
    return pt;
}

}  // namespace

SpectrumPoint legendre_point(const Potential& p, const SpectrumDomain& dom,
                             double alpha, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    SpectrumPoint pt;
    pt.alpha = alpha;
    pt.s_star = kNaN;
    pt.pressure_at_s = kNaN;
    pt.legendre = kNaN;
    pt.dimension = kNaN;
    pt.status = LevelStatus::empty;

    // Constant potential: P is affine, the level set is everything or nothing.
    if (p.max_value == p.min_value) {
        if (std::fabs(alpha - p.min_value) <= std::fmax(tol, 1e-12)) {
            pt.status = LevelStatus::interior;
            pt.s_star = 0;
            pt.pressure_at_s = pressure_value(p, 0, tight(tol));
            pt.legendre = pt.pressure_at_s;
            pt.dimension = 1.0;
        }
        return pt;
    }

    const double lo_tol = std::fmax(tol, dom.lower.last_delta);
    const double hi_tol = std::fmax(tol, dom.upper.last_delta);
    if (alpha < dom.lower.value - lo_tol || alpha > dom.upper.value + hi_tol)
        return pt;
    if (std::fabs(alpha - dom.lower.value) <= lo_tol)
        return endpoint_point(p, alpha, -1, tol, LevelStatus::endpoint_lower);
    if (std::fabs(alpha - dom.upper.value) <= hi_tol)
        return endpoint_point(p, alpha, +1, tol, LevelStatus::endpoint_upper);

    // Interior: P' is strictly increasing; bisect P'(s) = alpha.
    const double rtol = std::fmin(1e-12, tol * 1e-2);
    double lo = -4, hi = 4;
    double flo = ruelle_derivative(p, lo, rtol);
    double fhi = ruelle_derivative(p, hi, rtol);
    for (int t = 0; t < 7 && flo > alpha; ++t) {
        lo *= 2;
        flo = ruelle_derivative(p, lo, rtol);
    }
    for (int t = 0; t < 7 && fhi < alpha; ++t) {
        hi *= 2;
        fhi = ruelle_derivative(p, hi, rtol);
    }
    if (flo > alpha || fhi < alpha) {
        // The ladder says interior but the bracket failed; treat as the
        // nearer endpoint rather than inventing an answer.
        return endpoint_point(p, alpha, flo > alpha ? -1 : +1, tol,
                              flo > alpha ? LevelStatus::endpoint_lower
                                          : LevelStatus::endpoint_upper);
    }
    double mid = 0.5 * (lo + hi);
    double fmid = 0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 240; ++it) {
        mid = 0.5 * (lo + hi);
        fmid = ruelle_derivative(p, mid, rtol);
        if (std::fabs(fmid - alpha) <= 0.5 * tol) break;
        if (hi - lo <= 8 * eps * (1 + std::fabs(mid))) break;
        if (fmid < alpha)
            lo = mid;
        else
            hi = mid;
    }
    pt.status = LevelStatus::interior;
    pt.s_star = mid;
    pt.pressure_at_s = pressure_value(p, mid, tight(tol));
    pt.legendre = -mid * alpha + pt.pressure_at_s;
    pt.dimension = pt.legendre / dim_scale(p.params);
    return pt;
}

SpectrumPoint legendre_point(const Potential& p, double alpha, double tol) {
    return legendre_point(p, spectrum_domain(p, std::fmax(std::fmin(tol, 1e-6), 1e-9)),
                          alpha, tol);
}

std::vector<SpectrumPoint> spectrum_curve(const Potential& p,
                                          std::span<const double> alphas,
                                          double tol, int threads) {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    SpectrumDomain dom = spectrum_domain(p, std::fmax(std::fmin(tol, 1e-6), 1e-9));
    std::vector<SpectrumPoint> out(alphas.size());
    if (threads == 1 || alphas.size() < 2) {
        for (size_t i = 0; i < alphas.size(); ++i)
            out[i] = legendre_point(p, dom, alphas[i], tol);
        return out;
    }
    const size_t nth = std::min<size_t>(static_cast<size_t>(threads), alphas.size());
    std::vector<std::thread> pool;
    for (size_t t = 0; t < nth; ++t) {
        pool.emplace_back([&, t]() {
            for (size_t i = t; i < alphas.size(); i += nth)
                out[i] = legendre_point(p, dom, alphas[i], tol);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

double translate_pressure_check(const Potential& p, double beta, double s) {
    if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
    Potential shifted = make_potential(p.params, p.values - beta);
    const double lhs = pressure_value(p, s);
    const double rhs = beta * s + pressure_value(shifted, s);
    return std::fabs(lhs - rhs);
}

}  // namespace mfshift
