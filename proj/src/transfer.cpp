#include "mfshift/transfer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfshift {

double log_sum_exp(const Eigen::ArrayXd& v) {
    const double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;  // all -inf, or a stray inf/nan
    return mx + std::log((v - mx).exp().sum());
}

namespace {

// One log-domain application: u'(a) = (1/q) lse_j( s phi(a.j) + u(Ta.j) ).
Eigen::ArrayXd step_log(const Potential& p, double s, const Eigen::ArrayXd& u) {
    const int m = p.params.m;
    const int q = p.params.q;
    const std::int64_t states = p.params.state_count();
    const std::int64_t tail = states / m;  // m^(ell-2)
    Eigen::ArrayXd out(states);
    for (std::int64_t a = 0; a < states; ++a) {
        const std::int64_t phi_base = a * m;
        const std::int64_t succ_base = (a % tail) * m;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            const double arg = s * p.values[phi_base + j] + u[succ_base + j];
            if (arg > mx) mx = arg;
        }
        double acc = 0;
        for (int j = 0; j < m; ++j) {
            const double arg = s * p.values[phi_base + j] + u[succ_base + j];
            acc += std::exp(arg - mx);
        }
        out[a] = (mx + std::log(acc)) / static_cast<double>(q);
    }
    return out;
}

FixedPoint run_solver(const Potential& p, double s, Eigen::ArrayXd u,
                      const SolverConfig& cfg) {
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(cfg.tol > 0)) throw std::invalid_argument("tol must be > 0");
    if (!std::isfinite(s)) throw std::invalid_argument("s must be finite");

    constexpr double eps = std::numeric_limits<double>::epsilon();
    FixedPoint fp;
    fp.potential = p;
    fp.s = s;

    double step = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cfg.max_iter) {
        Eigen::ArrayXd next = step_log(p, s, u);
        step = (next - u).abs().maxCoeff();
        u = std::move(next);
        ++it;
        // Floor adapts to the table scale: roundoff keeps steps near
        // eps * |u| even after the geometric phase has converged.
        const double floor_tol = 4 * eps * (1 + u.abs().maxCoeff());
        const double stop = std::fmax(cfg.tol * 0.05, floor_tol);
        if (step <= stop) break;
    }

    fp.iterations = it;
    fp.final_step = step;
    fp.log_residual = (step_log(p, s, u) - u).abs().maxCoeff();
    {
        const double floor_tol = 16 * eps * (1 + u.abs().maxCoeff());
        fp.converged = fp.log_residual <= std::fmax(cfg.tol, floor_tol);
    }

    // Extend to shorter words: psi(w) = (sum_j psi(w.j))^(1/q).
    const int m = p.params.m;
    const int q = p.params.q;
    fp.log_psi.assign(static_cast<size_t>(p.params.ell), Eigen::ArrayXd());
    fp.log_psi[static_cast<size_t>(p.params.ell - 1)] = std::move(u);
    for (int k = p.params.ell - 2; k >= 0; --k) {
        const Eigen::ArrayXd& child = fp.log_psi[static_cast<size_t>(k + 1)];
        const std::int64_t sz = checked_pow(m, k);
        Eigen::ArrayXd tbl(sz);
        for (std::int64_t w = 0; w < sz; ++w) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) mx = std::fmax(mx, child[w * m + j]);
            double acc = 0;
            for (int j = 0; j < m; ++j) acc += std::exp(child[w * m + j] - mx);
            tbl[w] = (mx + std::log(acc)) / static_cast<double>(q);
        }
        fp.log_psi[static_cast<size_t>(k)] = std::move(tbl);
    }

    fp.residual = residual(p, s, fp);
    return fp;
}

}  // namespace

double FixedPoint::log_psi_at(std::span<const int> w) const {
    const int len = static_cast<int>(w.size());
    if (len >= potential.params.ell)
        throw std::invalid_argument("fixed point tables stop at length ell-1");
    return log_psi[static_cast<size_t>(len)][word_index(w, potential.params.m)];
}

double FixedPoint::psi_at(std::span<const int> w) const {
    return std::exp(log_psi_at(w));
}

Eigen::ArrayXd apply_transfer(const Potential& p, double s, const Eigen::ArrayXd& y) {
    if (y.size() != p.params.state_count())
        throw std::invalid_argument("table must have m^(ell-1) entries");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!(y[i] > 0) || !std::isfinite(y[i]))
            throw std::invalid_argument("transfer operator needs a positive finite table");
    return step_log(p, s, y.log()).exp();
}

Eigen::ArrayXd apply_transfer_log(const Potential& p, double s, const Eigen::ArrayXd& log_y) {
    if (log_y.size() != p.params.state_count())
        throw std::invalid_argument("table must have m^(ell-1) entries");
    for (Eigen::Index i = 0; i < log_y.size(); ++i)
        if (!std::isfinite(log_y[i]))
            throw std::invalid_argument("log table entries must be finite");
    return step_log(p, s, log_y);
}

FixedPoint solve_fixed_point(const Potential& p, double s, const SolverConfig& cfg) {
    return run_solver(p, s, Eigen::ArrayXd::Zero(p.params.state_count()), cfg);
}

FixedPoint solve_fixed_point_from(const Potential& p, double s, Eigen::ArrayXd log_y0,
                                  const SolverConfig& cfg) {
    if (log_y0.size() != p.params.state_count())
        throw std::invalid_argument("starting table must have m^(ell-1) entries");
    for (Eigen::Index i = 0; i < log_y0.size(); ++i)
        if (!std::isfinite(log_y0[i]))
            throw std::invalid_argument("starting table entries must be finite");
    return run_solver(p, s, std::move(log_y0), cfg);
}

double pressure(const FixedPoint& fp) {
    const ShiftParams& sp = fp.potential.params;
    const double lse = log_sum_exp(fp.log_psi[1]);
    return static_cast<double>(sp.q - 1) *
           static_cast<double>(checked_pow(sp.q, sp.ell - 2)) * lse;
}

double pressure_value(const Potential& p, double s, const SolverConfig& cfg) {
    return pressure(solve_fixed_point(p, s, cfg));
}

double residual(const Potential& p, double s, const FixedPoint& fp) {
    if (fp.log_psi.size() != static_cast<size_t>(p.params.ell))
        throw std::invalid_argument("fixed point does not match the potential shape");
    const int m = p.params.m;
    const double qinv = 1.0 / p.params.q;
    double worst = 0;

    const Eigen::ArrayXd y = fp.log_psi.back().exp();
    bool representable = true;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!(y[i] > 0) || !std::isfinite(y[i])) representable = false;
    if (!representable) return std::numeric_limits<double>::infinity();
    const Eigen::ArrayXd ny = step_log(p, s, fp.log_psi.back()).exp();
    worst = (ny - y).abs().maxCoeff();

    for (int k = 0; k + 1 < p.params.ell; ++k) {
        const Eigen::ArrayXd& here = fp.log_psi[static_cast<size_t>(k)];
        const Eigen::ArrayXd& child = fp.log_psi[static_cast<size_t>(k + 1)];
        for (std::int64_t w = 0; w < here.size(); ++w) {
            double sum = 0;
            for (int j = 0; j < m; ++j) sum += std::exp(child[w * m + j]);
            const double defect = std::fabs(std::pow(sum, qinv) - std::exp(here[w]));
            worst = std::fmax(worst, defect);
        }
    }
    return worst;
}

}  // namespace mfshift
