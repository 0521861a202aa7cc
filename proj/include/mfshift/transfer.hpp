#pragma once

// Nonlinear transfer operator on positive tables over S^(ell-1):
//   (N_s y)(a) = ( sum_j e^{s phi(a.j)} y(Ta.j) )^(1/q),   Ta = drop first symbol.
// N_s is monotone and 1/q-homogeneous, hence a 1/q-contraction in sup norm
// on log y; the unique positive fixed point psi_s is found by iterating from
// log y = 0. All internal work is in the log domain so arbitrarily large |s|
// stays finite; linear-domain views are exponentials of the stored tables.
//
// The fixed point extends to shorter words by psi(w) = (sum_j psi(w.j))^(1/q),
// down to the empty word. Pressure: P(s) = (q-1) q^(ell-2) log sum_j psi_s(j).

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mfshift/potential.hpp"

namespace mfshift {

struct SolverConfig {
    double tol = 1e-12;
    int max_iter = 10000;
};

struct FixedPoint {
    Potential potential;
    double s = 0;
    // log_psi[k] tabulates log psi_s over words of length k, k = 0..ell-1.
    std::vector<Eigen::ArrayXd> log_psi;
    int iterations = 0;
    double final_step = 0;      // last sup-norm step of the log iteration
    double log_residual = 0;    // sup |log N_s psi - log psi| on S^(ell-1)
    double residual = 0;        // linear-domain residual; overflows for extreme s
    bool converged = false;

    double log_psi_at(std::span<const int> w) const;
    double psi_at(std::span<const int> w) const;
};

// Linear-domain application on a full-length table y > 0 (throws otherwise).
Eigen::ArrayXd apply_transfer(const Potential& p, double s,
                              const Eigen::ArrayXd& y);

// Same map acting on u = log y.
Eigen::ArrayXd apply_transfer_log(const Potential& p, double s,
                                  const Eigen::ArrayXd& log_y);

FixedPoint solve_fixed_point(const Potential& p, double s,
                             const SolverConfig& cfg = {});

// Start the iteration from a caller-supplied log table (uniqueness checks).
FixedPoint solve_fixed_point_from(const Potential& p, double s,
                                  Eigen::ArrayXd log_y0,
                                  const SolverConfig& cfg = {});

double pressure(const FixedPoint& fp);
double pressure_value(const Potential& p, double s, const SolverConfig& cfg = {});

// Sup over S^(ell-1) of |N_s psi - psi| combined with the sup over shorter
// words of the extension defect |(sum_j psi(w.j))^(1/q) - psi(w)|. Computed
// in the linear domain, so only meaningful where e^{log psi} is representable.
double residual(const Potential& p, double s, const FixedPoint& fp);

double log_sum_exp(const Eigen::ArrayXd& v);

}  // namespace mfshift
