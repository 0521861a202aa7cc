#pragma once

// Spectrum over invariant measures for rank-one product potentials
// phi(x, y) = f(x) g(y): among product (i.i.d.) measures nu with
// (int f dnu)(int g dnu) = alpha, maximize entropy / log m. The inner
// problem fixes the pair of means and is solved in the exponential family
// p_i proportional to exp(t1 f_i + t2 g_i).

#include <Eigen/Dense>

#include "mfshift/potential.hpp"

namespace mfshift {

struct ProductPotential {
    Eigen::ArrayXd f;
    Eigen::ArrayXd g;  // same size as f
};

Potential to_potential(const ProductPotential& pp, int q);

// Recover f, g from a two-coordinate potential whose table has rank one,
// phi(x, y) = f(x) g(y). Throws when ell != 2 or the table is not rank one.
ProductPotential factor_product(const Potential& p);

struct MaxEntropyResult {
    bool feasible = false;
    double entropy = 0;        // natural log units
    Eigen::ArrayXd p;
    double residual = 0;       // sup norm of the final moment mismatch
    int iterations = 0;
};

// Maximize -sum p log p subject to sum p f = beta1, sum p g = beta2.
// Infeasible when (beta1, beta2) lies outside the convex hull of the
// pairs (f_i, g_i).
MaxEntropyResult max_entropy_given_means(const Eigen::ArrayXd& f,
                                         const Eigen::ArrayXd& g,
                                         double beta1, double beta2);

struct InvariantPoint {
    double alpha = 0;
    bool feasible = false;
    double value = 0;    // entropy / log m of the maximizer
    double entropy = 0;  // natural log units
    double beta1 = 0;
    double beta2 = 0;
    Eigen::ArrayXd maximizer;
};

// sup over beta1 * beta2 = alpha of max_entropy_given_means, normalized by
// log m. beta1 = 0 (beta2 free) and beta2 = 0 branches cover alpha = 0;
// affinely dependent f, g collapse the scan to the roots of a quadratic.
InvariantPoint invariant_spectrum(const ProductPotential& pp, double alpha,
                                  double tol = 1e-10);

}  // namespace mfshift
