#pragma once

// Cylinder measures and the telescopic product construction. A base measure
// mu on the full shift over S induces a measure on sequences by drawing the
// restriction to each multiplicative cell Lambda_i independently from mu:
//   P_mu([u]) = prod_{i <= n, q !| i} mu([u restricted to Lambda_i(n)]).
// Its Hausdorff dimension is (q-1)^2 / log m * sum_k H_k(mu) / q^(k+1).
//
// Masses are accumulated in log space throughout.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfshift/potential.hpp"
#include "mfshift/transfer.hpp"

namespace mfshift {

class CylinderOracle {
  public:
    virtual ~CylinderOracle() = default;

    virtual int alphabet_size() const = 0;
    virtual double log_mass(std::span<const int> w) const = 0;
    double mass(std::span<const int> w) const;

    // H_k = - sum over length-k cylinders of mass * log mass. The default
    // enumerates all m^k words and is guarded by max_entropy_depth().
    virtual double entropy(int k) const;

    // E phi(x_{1+j} .. x_{ell+j}) for j = 0..count-1. The default
    // enumerates length-(ell+j) cylinders under the same guard.
    virtual std::vector<double> window_means(const Potential& p, int count) const;

    // Largest k the oracle can handle in entropy()/window_means();
    // numeric_limits<int>::max() for structured oracles with closed forms.
    virtual int max_entropy_depth() const;
};

class LebesgueOracle final : public CylinderOracle {
  public:
    explicit LebesgueOracle(int m);
    int alphabet_size() const override { return m_; }
    double log_mass(std::span<const int> w) const override;
    double entropy(int k) const override;
    std::vector<double> window_means(const Potential& p, int count) const override;
    int max_entropy_depth() const override;

  private:
    int m_;
};

class BernoulliOracle final : public CylinderOracle {
  public:
    explicit BernoulliOracle(Eigen::ArrayXd probs);  // nonnegative, sums to 1
    int alphabet_size() const override;
    double log_mass(std::span<const int> w) const override;
    double entropy(int k) const override;
    std::vector<double> window_means(const Potential& p, int count) const override;
    int max_entropy_depth() const override;
    const Eigen::ArrayXd& probs() const { return probs_; }

  private:
    Eigen::ArrayXd probs_;
    Eigen::ArrayXd log_probs_;
};

// Explicit masses for every word of a fixed depth; shorter words marginalize,
// longer words extend uniformly (each child takes 1/m of its parent).
class TableOracle final : public CylinderOracle {
  public:
    TableOracle(int m, int depth, Eigen::ArrayXd masses);
    int alphabet_size() const override { return m_; }
    double log_mass(std::span<const int> w) const override;
    int depth() const { return depth_; }

  private:
    int m_;
    int depth_;
    std::vector<Eigen::ArrayXd> level_mass_;  // [k] masses of length-k words
};

// {"m":..,"depth":..,"masses":[..]} with m^depth masses in word order.
TableOracle parse_table_oracle(const std::string& json_text);
TableOracle load_table_oracle(const std::string& path);

// (ell-1)-step chain induced by a transfer fixed point: initial law on
// S^(ell-1) from the telescoped psi ratios, transitions
//   Q(a, Ta.j) = e^{s phi(a.j)} psi(Ta.j) / psi(a)^q.
struct MarkovMeasure {
    ShiftParams params;
    double s = 0;
    Eigen::ArrayXd log_initial;      // size m^(ell-1)
    Eigen::MatrixXd log_transition;  // m^(ell-1) x m, column j = emitted symbol
    Eigen::ArrayXd initial;
    Eigen::MatrixXd transition;
    // log marginal mass of words shorter than ell-1; [k] covers length k,
    // [0] = {0}, [ell-1] = log_initial. The suffix sums telescope away, so
    // these are plain prefix products of psi ratios.
    std::vector<Eigen::ArrayXd> log_prefix;
};

MarkovMeasure markov_from_fixed_point(const FixedPoint& fp);

double markov_log_cylinder(const MarkovMeasure& mm, std::span<const int> w);
double markov_cylinder(const MarkovMeasure& mm, std::span<const int> w);

class MarkovOracle final : public CylinderOracle {
  public:
    explicit MarkovOracle(MarkovMeasure mm);
    int alphabet_size() const override;
    double log_mass(std::span<const int> w) const override;
    // Chain rule over the state marginals: exact for every k, no enumeration.
    double entropy(int k) const override;
    std::vector<double> window_means(const Potential& p, int count) const override;
    int max_entropy_depth() const override;
    const MarkovMeasure& measure() const { return mm_; }

  private:
    MarkovMeasure mm_;
};

struct TelescopicMeasure {
    const CylinderOracle* base = nullptr;  // non-owning
    int q = 2;
};

double telescopic_log_cylinder(const CylinderOracle& base, int q,
                               std::span<const int> w);
double telescopic_log_cylinder(const TelescopicMeasure& tm, std::span<const int> w);

struct SeriesResult {
    double value = 0;
    double tail_bound = 0;  // rigorous bound on the discarded tail
    int terms = 0;
    bool tol_met = false;   // false when the enumeration guard cut the series
};

// Dimension of the telescopic product of base: series over H_k with tail
// bound (q-1)^2 sum_{k>K} k log m / q^(k+1) (divided by log m).
SeriesResult telescopic_dimension(const CylinderOracle& base, int q,
                                  double tol = 1e-9);

// Average-of-windows functional M(nu); for the chain of parameter s it
// equals P'(s). Tail bound uses max |phi|.
SeriesResult m_functional(const CylinderOracle& base, const Potential& p,
                          double tol = 1e-9);

// (-s P'(s) + P(s)) / (q^(ell-1) log m), the dimension of the telescopic
// product of the parameter-s chain.
double markov_dimension_formula(const Potential& p, double s,
                                double tol = 1e-12);

// Defect of the closed form for log P_{mu_s}([w]): the direct per-cell sum
// against s * (window sums) - (n - floor(n/q)) q log psi(empty)
// - q B_{floor(n/q)} + B_n with B counting log psi over truncated columns.
double gibbs_identity_defect(const FixedPoint& fp, std::span<const int> w);
double gibbs_identity_defect(const Potential& p, double s, std::span<const int> w);

}  // namespace mfshift
