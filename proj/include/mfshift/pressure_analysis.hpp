#pragma once

// Pressure as a function of the parameter s: exact series derivative through
// the induced Markov chain, limits at +-infinity along a doubling ladder,
// attainment of the extremes by periodic orbits, and the Legendre transform
//   P*(alpha) = inf_s ( -s alpha + P(s) ),
// whose normalization P*(alpha) / (q^(ell-1) log m) is the Hausdorff
// spectrum of the level sets of the sparse ergodic average.

#include <span>
#include <vector>

#include "mfshift/potential.hpp"
#include "mfshift/transfer.hpp"

namespace mfshift {

// P'(s) = (q-1) sum_{j>=0} q^(-(j+1)) E_j, where E_j is the expectation of
// phi over the window at offset j under the induced chain; truncated with a
// rigorous tail bound below tol.
double ruelle_derivative(const Potential& p, double s, double tol = 1e-12);

double fd_derivative(const Potential& p, double s, double h);

struct TailValue {
    double value = 0;
    double s_reached = 0;    // last ladder point evaluated
    double last_delta = 0;   // |value - previous ladder value|
    bool converged = false;
};

// Limit of P' along s = direction * 4 * 2^t, t = 0..6; converged when two
// successive ladder values differ by less than tol. direction is +1 or -1.
TailValue derivative_at_infinity(const Potential& p, int direction,
                                 double tol = 1e-6);

enum class Extremum { minimum, maximum };

struct ExtremalResult {
    bool attained = false;
    // Cyclic symbol pattern c realizing the extreme: the sequence with
    // x_{i q^d} = c[d mod |c|] makes every window of the average hit the
    // extreme value, because every cyclic ell-window of c does. Empty when
    // not attained.
    Word witness;
};

ExtremalResult extremal_attained(const Potential& p, Extremum which);

struct SpectrumDomain {
    TailValue lower;   // P'(-inf)
    TailValue upper;   // P'(+inf)
    bool lower_attains_min = false;
    bool upper_attains_max = false;
    Word min_witness;
    Word max_witness;
};

SpectrumDomain spectrum_domain(const Potential& p, double tol = 1e-6);

enum class LevelStatus { interior, endpoint_lower, endpoint_upper, empty };

struct SpectrumPoint {
    double alpha = 0;
    double s_star = 0;        // +-inf at the endpoints, NaN when empty
    double pressure_at_s = 0; // NaN when empty
    double legendre = 0;      // NaN when empty
    double dimension = 0;     // legendre / (q^(ell-1) log m); NaN when empty
    LevelStatus status = LevelStatus::empty;
};

SpectrumPoint legendre_point(const Potential& p, double alpha,
                             double tol = 1e-10);
SpectrumPoint legendre_point(const Potential& p, const SpectrumDomain& dom,
                             double alpha, double tol = 1e-10);

std::vector<SpectrumPoint> spectrum_curve(const Potential& p,
                                          std::span<const double> alphas,
                                          double tol = 1e-10, int threads = 1);

// | P_phi(s) - (beta s + P_{phi - beta}(s)) |; identically ~0.
double translate_pressure_check(const Potential& p, double beta, double s);

}  // namespace mfshift
