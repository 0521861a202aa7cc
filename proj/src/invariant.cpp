#include "mfshift/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mfshift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_norm(const Eigen::ArrayXd& v) {
    return v.size() ? v.abs().maxCoeff() : 0.0;
}

// Exponential-family weights p_i proportional to exp(w_i), shifted for
// stability; returns log of the normalizer.
double softmax_into(const Eigen::ArrayXd& w, Eigen::ArrayXd& p) {
    const double shift = w.maxCoeff();
    p = (w - shift).exp();
    const double z = p.sum();
    p /= z;
    return shift + std::log(z);
}

struct ScalarMaxent {
    bool feasible = false;
    double entropy = kNegInf;
    double t = 0;
    double residual = 0;
    Eigen::ArrayXd p;
};

// Maximize entropy over the simplex subject to sum p h = beta. The
// maximizer is p proportional to exp(t h) with t matching the mean, which
// is strictly increasing in t.
ScalarMaxent scalar_maxent(const Eigen::ArrayXd& h, double beta) {
    ScalarMaxent r;
    const Eigen::Index n = h.size();
    const double hmin = h.minCoeff();
    const double hmax = h.maxCoeff();
    const double scale = std::fmax(1.0, std::fmax(std::fabs(hmin), std::fabs(hmax)));
    const double edge = 64 * std::numeric_limits<double>::epsilon() * scale;

    if (hmax - hmin <= edge) {  // constant observable
        if (std::fabs(beta - hmin) > 1e-9 * scale) return r;
        r.feasible = true;
        r.p = Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n));
        r.entropy = std::log(static_cast<double>(n));
        r.residual = std::fabs(beta - hmin);
        return r;
    }
    if (beta < hmin - edge || beta > hmax + edge) return r;

    auto vertex = [&](double target) {
        r.feasible = true;
        r.p = Eigen::ArrayXd::Zero(n);
        int hits = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::fabs(h[i] - target) <= edge) {
                r.p[i] = 1;
                ++hits;
            }
        r.p /= hits;
        r.entropy = std::log(static_cast<double>(hits));
        r.residual = std::fabs(beta - target);
    };
    if (std::fabs(beta - hmin) <= edge) {
        vertex(hmin);
        return r;
    }
    if (std::fabs(beta - hmax) <= edge) {
        vertex(hmax);
        return r;
    }

    Eigen::ArrayXd p(n);
    auto mean_at = [&](double t) {
        softmax_into(t * h, p);
        return (p * h).sum();
    };

    double lo = 0, hi = 0;
    const double m0 = mean_at(0.0);
    if (m0 < beta) {
        double step = 1;
        while (mean_at(hi + step) < beta) {
            hi += step;
            step *= 2;
            if (step > 1e18) break;
        }
        lo = hi;
        hi += step;
    } else {
        double step = 1;
        while (mean_at(lo - step) > beta) {
            lo -= step;
            step *= 2;
            if (step > 1e18) break;
        }
        hi = lo;
        lo -= step;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mv = mean_at(mid);
        if (mv < beta)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::fabs(mid)))
            break;
    }
    const double t = 0.5 * (lo + hi);
    const double logz = softmax_into(t * h, p);
    const double mean = (p * h).sum();
    r.feasible = true;
    r.t = t;
    r.p = p;
    r.entropy = logz - t * mean;
    r.residual = std::fabs(mean - beta);
    return r;
}

struct Pt {
    double x, y;
    bool operator<(const Pt& o) const { return x < o.x || (x == o.x && y < o.y); }
    bool operator==(const Pt& o) const { return x == o.x && y == o.y; }
};

double cross(const Pt& o, const Pt& a, const Pt& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone chain; returns the hull counterclockwise without repetition.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Pt> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

MaxEntropyResult infeasible_result() {
    MaxEntropyResult r;
    r.entropy = kNegInf;
    return r;
}

MaxEntropyResult from_scalar(const ScalarMaxent& s) {
    MaxEntropyResult r;
    if (!s.feasible) return infeasible_result();
    r.feasible = true;
    r.entropy = s.entropy;
    r.p = s.p;
    r.residual = s.residual;
    return r;
}

// Maxent on a hull face: every support point lies on the segment AB, so the
// problem is one-dimensional in the arclength coordinate.
MaxEntropyResult face_maxent(const Eigen::ArrayXd& f, const Eigen::ArrayXd& g,
                             double beta1, double beta2, Pt A, Pt B,
                             double cross_tol) {
    const double dx = B.x - A.x, dy = B.y - A.y;
    const double len = std::hypot(dx, dy);
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double c = (f[i] - A.x) * dy - (g[i] - A.y) * dx;
        if (std::fabs(c) <= cross_tol) support.push_back(i);
    }
    Eigen::ArrayXd h(static_cast<Eigen::Index>(support.size()));
    for (size_t k = 0; k < support.size(); ++k) {
        const Eigen::Index i = support[k];
        h[static_cast<Eigen::Index>(k)] = ((f[i] - A.x) * dx + (g[i] - A.y) * dy) / len;
    }
    const double beta_h = ((beta1 - A.x) * dx + (beta2 - A.y) * dy) / len;
    ScalarMaxent sm = scalar_maxent(h, beta_h);
    if (!sm.feasible) return infeasible_result();
    MaxEntropyResult r;
    r.feasible = true;
    r.entropy = sm.entropy;
    r.residual = sm.residual;
    r.p = Eigen::ArrayXd::Zero(f.size());
    for (size_t k = 0; k < support.size(); ++k)
        r.p[support[k]] = sm.p[static_cast<Eigen::Index>(k)];
    return r;
}

}  // namespace

Potential to_potential(const ProductPotential& pp, int q) {
    if (pp.f.size() != pp.g.size())
        throw std::invalid_argument("product potential needs matching factor sizes");
    const int m = static_cast<int>(pp.f.size());
    ShiftParams params{m, q, 2};
    Eigen::ArrayXd values(static_cast<Eigen::Index>(m) * m);
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < m; ++y) values[x * m + y] = pp.f[x] * pp.g[y];
    return make_potential(params, values);
}

ProductPotential factor_product(const Potential& p) {
    if (p.params.ell != 2)
        throw std::invalid_argument("factor_product: potential must have two coordinates");
    const int m = p.params.m;
    Eigen::MatrixXd M(m, m);
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < m; ++y) M(x, y) = p.values[x * m + y];
    const double scale = std::fmax(1.0, M.cwiseAbs().maxCoeff());

    // Pivot row/column factorization: phi = f g^T with f = column at the
    // pivot / pivot value, g = pivot row.
    int px = 0, py = 0;
    M.cwiseAbs().maxCoeff(&px, &py);
    ProductPotential pp;
    if (std::fabs(M(px, py)) <= 1e-14 * scale) {  // zero table
        pp.f = Eigen::ArrayXd::Zero(m);
        pp.g = Eigen::ArrayXd::Zero(m);
        return pp;
    }
    pp.g = M.row(px).array();
    pp.f = M.col(py).array() / M(px, py);
    const double resid = (M - (pp.f.matrix() * pp.g.matrix().transpose())).cwiseAbs().maxCoeff();
    if (resid > 1e-10 * scale)
        throw std::invalid_argument("factor_product: table does not split into f(x) g(y)");
    return pp;
}

MaxEntropyResult max_entropy_given_means(const Eigen::ArrayXd& f,
                                         const Eigen::ArrayXd& g, double beta1,
                                         double beta2) {
    if (f.size() != g.size() || f.size() < 2)
        throw std::invalid_argument("max_entropy_given_means: need matching sizes >= 2");
    const Eigen::Index n = f.size();
    const double fscale = std::fmax(1.0, sup_norm(f));
    const double gscale = std::fmax(1.0, sup_norm(g));

    const double frange = f.maxCoeff() - f.minCoeff();
    const double grange = g.maxCoeff() - g.minCoeff();
    if (frange <= 1e-13 * fscale) {  // f constant: only the g constraint binds
        if (std::fabs(beta1 - f[0]) > 1e-9 * fscale) return infeasible_result();
        return from_scalar(scalar_maxent(g, beta2));
    }
    if (grange <= 1e-13 * gscale) {
        if (std::fabs(beta2 - g[0]) > 1e-9 * gscale) return infeasible_result();
        return from_scalar(scalar_maxent(f, beta1));
    }

    // Affine dependence g = a f + b makes the second constraint redundant.
    {
        const double fm = f.mean(), gm = g.mean();
        const double vf = ((f - fm) * (f - fm)).sum();
        const double cfg = ((f - fm) * (g - gm)).sum();
        const double a = cfg / vf;
        const double b = gm - a * fm;
        if (sup_norm(g - (a * f + b)) <= 1e-12 * gscale) {
            if (std::fabs(beta2 - (a * beta1 + b)) > 1e-9 * gscale)
                return infeasible_result();
            return from_scalar(scalar_maxent(f, beta1));
        }
    }

    // Geometry of the moment pair: (beta1, beta2) must lie in the convex
    // hull of the observable pairs.
    std::vector<Pt> pts(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<size_t>(i)] = {f[i], g[i]};
    const std::vector<Pt> hull = convex_hull(std::move(pts));
    const double geo_scale = fscale * gscale;
    const double cross_tol = 1e-10 * geo_scale;

    int boundary_edge = -1;
    const Pt P{beta1, beta2};
    for (size_t e = 0; e < hull.size(); ++e) {
        const Pt& A = hull[e];
        const Pt& B = hull[(e + 1) % hull.size()];
        const double c = cross(A, B, P);
        if (c < -cross_tol) return infeasible_result();
        if (std::fabs(c) <= cross_tol) {
            const double dot = (P.x - A.x) * (B.x - A.x) + (P.y - A.y) * (B.y - A.y);
            const double len2 = (B.x - A.x) * (B.x - A.x) + (B.y - A.y) * (B.y - A.y);
            if (dot >= -cross_tol && dot <= len2 + cross_tol) boundary_edge = static_cast<int>(e);
        }
    }
    if (boundary_edge >= 0) {
        const Pt& A = hull[static_cast<size_t>(boundary_edge)];
        const Pt& B = hull[(static_cast<size_t>(boundary_edge) + 1) % hull.size()];
        return face_maxent(f, g, beta1, beta2, A, B, cross_tol);
    }

    // Interior: damped Newton on the dual variables, Jacobian = covariance.
    Eigen::Vector2d t = Eigen::Vector2d::Zero();
    Eigen::ArrayXd p(n);
    auto moments = [&](const Eigen::Vector2d& tv, Eigen::Vector2d& mean,
                       Eigen::Matrix2d& cov) {
        softmax_into(tv[0] * f + tv[1] * g, p);
        mean[0] = (p * f).sum();
        mean[1] = (p * g).sum();
        cov(0, 0) = (p * (f - mean[0]) * (f - mean[0])).sum();
        cov(1, 1) = (p * (g - mean[1]) * (g - mean[1])).sum();
        cov(0, 1) = cov(1, 0) = (p * (f - mean[0]) * (g - mean[1])).sum();
    };

    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
    moments(t, mean, cov);
    Eigen::Vector2d resid = mean - Eigen::Vector2d(beta1, beta2);
    double lambda = 0;
    int iterations = 0;
    const double rtol = 1e-13 * std::fmax(fscale, gscale);
    for (; iterations < 400 && resid.lpNorm<Eigen::Infinity>() > rtol; ++iterations) {
        Eigen::Matrix2d J = cov;
        J(0, 0) += lambda;
        J(1, 1) += lambda;
        const Eigen::Vector2d step = J.ldlt().solve(-resid);
        if (!step.allFinite()) {
            lambda = std::fmax(lambda * 4, 1e-10 * geo_scale);
            continue;
        }
        const Eigen::Vector2d t_new = t + step;
        Eigen::Vector2d mean_new;
        Eigen::Matrix2d cov_new;
        moments(t_new, mean_new, cov_new);
        const Eigen::Vector2d resid_new = mean_new - Eigen::Vector2d(beta1, beta2);
        if (resid_new.norm() < resid.norm()) {
            t = t_new;
            mean = mean_new;
            cov = cov_new;
            resid = resid_new;
            lambda *= 0.25;
        } else {
            lambda = std::fmax(lambda * 4, 1e-10 * geo_scale);
        }
    }

    MaxEntropyResult r;
    r.iterations = iterations;
    r.residual = resid.lpNorm<Eigen::Infinity>();
    if (r.residual > 1e-7 * std::fmax(fscale, gscale)) return infeasible_result();
    const double logz = softmax_into(t[0] * f + t[1] * g, p);
    r.feasible = true;
    r.p = p;
    r.entropy = logz - t[0] * mean[0] - t[1] * mean[1];
    return r;
}

namespace {

struct Interval {
    double lo, hi;
};

// beta1 ranges where beta1 in [fmin, fmax] and alpha / beta1 in
// [gmin, gmax], split by the sign of beta1 (alpha != 0).
std::vector<Interval> feasible_beta1(double alpha, double fmin, double fmax,
                                     double gmin, double gmax) {
    std::vector<Interval> out;
    auto push = [&](double lo, double hi) {
        if (lo <= hi) out.push_back({lo, hi});
    };
    if (alpha > 0) {
        if (fmax > 0 && gmax > 0) {  // both positive
            const double lo = std::fmax(alpha / gmax, 0.0);
            const double hi = gmin > 0 ? std::fmin(fmax, alpha / gmin) : fmax;
            push(std::fmax(lo, std::numeric_limits<double>::min()), hi);
        }
        if (fmin < 0 && gmin < 0) {  // both negative
            const double hi = std::fmin(alpha / gmin, 0.0);
            const double lo = gmax < 0 ? std::fmax(fmin, alpha / gmax) : fmin;
            push(lo, std::fmin(hi, -std::numeric_limits<double>::min()));
        }
    } else {  // alpha < 0: opposite signs
        if (fmax > 0 && gmin < 0) {  // beta1 > 0, beta2 < 0
            const double lo = std::fmax(alpha / gmin, 0.0);
            const double hi = gmax < 0 ? std::fmin(fmax, alpha / gmax) : fmax;
            push(std::fmax(lo, std::numeric_limits<double>::min()), hi);
        }
        if (fmin < 0 && gmax > 0) {  // beta1 < 0, beta2 > 0
            const double hi = std::fmin(alpha / gmax, 0.0);
            const double lo = gmin > 0 ? std::fmax(fmin, alpha / gmin) : fmin;
            push(lo, std::fmin(hi, -std::numeric_limits<double>::min()));
        }
    }
    return out;
}

}  // namespace

InvariantPoint invariant_spectrum(const ProductPotential& pp, double alpha,
                                  double tol) {
    if (pp.f.size() != pp.g.size() || pp.f.size() < 2)
        throw std::invalid_argument("invariant_spectrum: need matching factor sizes >= 2");
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    const Eigen::ArrayXd& f = pp.f;
    const Eigen::ArrayXd& g = pp.g;
    const double logm = std::log(static_cast<double>(f.size()));
    const double fscale = std::fmax(1.0, sup_norm(f));
    const double gscale = std::fmax(1.0, sup_norm(g));

    InvariantPoint best;
    best.alpha = alpha;
    best.value = kNegInf;
    best.entropy = kNegInf;
    auto offer = [&](double b1, double b2, const MaxEntropyResult& mr) {
        if (!mr.feasible || mr.entropy <= best.entropy) return;
        best.feasible = true;
        best.entropy = mr.entropy;
        best.value = mr.entropy / logm;
        best.beta1 = b1;
        best.beta2 = b2;
        best.maximizer = mr.p;
    };

    const double frange = f.maxCoeff() - f.minCoeff();
    const double grange = g.maxCoeff() - g.minCoeff();
    const bool f_const = frange <= 1e-13 * fscale;
    const bool g_const = grange <= 1e-13 * gscale;

    if (f_const || g_const) {
        if (f_const && g_const) {
            if (std::fabs(f[0] * g[0] - alpha) <= 1e-9 * fscale * gscale) {
                MaxEntropyResult mr;
                mr.feasible = true;
                mr.entropy = logm;
                mr.p = Eigen::ArrayXd::Constant(f.size(), 1.0 / f.size());
                offer(f[0], g[0], mr);
            }
        } else if (f_const) {
            const double c = f[0];
            if (std::fabs(c) > 1e-13 * fscale) {
                const double b2 = alpha / c;
                offer(c, b2, from_scalar(scalar_maxent(g, b2)));
            } else if (std::fabs(alpha) <= 1e-9 * fscale * gscale) {
                MaxEntropyResult mr;
                mr.feasible = true;
                mr.entropy = logm;
                mr.p = Eigen::ArrayXd::Constant(f.size(), 1.0 / f.size());
                offer(c, g.mean(), mr);
            }
        } else {
            const double c = g[0];
            if (std::fabs(c) > 1e-13 * gscale) {
                const double b1 = alpha / c;
                offer(b1, c, from_scalar(scalar_maxent(f, b1)));
            } else if (std::fabs(alpha) <= 1e-9 * fscale * gscale) {
                MaxEntropyResult mr;
                mr.feasible = true;
                mr.entropy = logm;
                mr.p = Eigen::ArrayXd::Constant(f.size(), 1.0 / f.size());
                offer(f.mean(), c, mr);
            }
        }
        return best;
    }

    // Affine dependence g = a f + b pins beta2 = a beta1 + b, so the
    // product constraint is the quadratic a beta1^2 + b beta1 = alpha.
    {
        const double fm = f.mean(), gm = g.mean();
        const double vf = ((f - fm) * (f - fm)).sum();
        const double a = ((f - fm) * (g - gm)).sum() / vf;
        const double b = gm - a * fm;
        if (sup_norm(g - (a * f + b)) <= 1e-12 * gscale) {
            std::vector<double> roots;
            if (std::fabs(a) <= 1e-13 * gscale / fscale) {
                if (std::fabs(b) > 1e-13 * gscale) roots.push_back(alpha / b);
                // b = 0 with g non-constant cannot reach here
            } else {
                const double disc = b * b + 4 * a * alpha;
                if (disc >= 0) {
                    const double sq = std::sqrt(disc);
                    roots.push_back((-b + sq) / (2 * a));
                    roots.push_back((-b - sq) / (2 * a));
                }
            }
            for (double r0 : roots)
                offer(r0, a * r0 + b, from_scalar(scalar_maxent(f, r0)));
            return best;
        }
    }

    if (alpha == 0) {
        // Either factor mean can vanish; the other is unconstrained.
        ScalarMaxent sf = scalar_maxent(f, 0.0);
        if (sf.feasible) offer(0.0, (sf.p * g).sum(), from_scalar(sf));
        ScalarMaxent sg = scalar_maxent(g, 0.0);
        if (sg.feasible) offer((sg.p * f).sum(), 0.0, from_scalar(sg));
        return best;
    }

    const std::vector<Interval> intervals =
        feasible_beta1(alpha, f.minCoeff(), f.maxCoeff(), g.minCoeff(), g.maxCoeff());
    auto value_at = [&](double b1) {
        return max_entropy_given_means(f, g, b1, alpha / b1);
    };

    for (const Interval& iv : intervals) {
        const int grid = 129;
        double best_c = iv.lo;
        double best_h = kNegInf;
        if (iv.hi - iv.lo <= 0) {
            MaxEntropyResult mr = value_at(iv.lo);
            offer(iv.lo, alpha / iv.lo, mr);
            continue;
        }
        std::vector<double> hs(grid);
        for (int i = 0; i < grid; ++i) {
            const double c = iv.lo + (iv.hi - iv.lo) * i / (grid - 1);
            MaxEntropyResult mr = value_at(c);
            hs[static_cast<size_t>(i)] = mr.feasible ? mr.entropy : kNegInf;
            if (hs[static_cast<size_t>(i)] > best_h) {
                best_h = hs[static_cast<size_t>(i)];
                best_c = c;
            }
        }
        if (best_h == kNegInf) continue;
        const double cell = (iv.hi - iv.lo) / (grid - 1);
        double lo = std::fmax(iv.lo, best_c - cell);
        double hi = std::fmin(iv.hi, best_c + cell);
        // Golden-section refinement of the bracketing cell pair.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo);
        double x2 = lo + gr * (hi - lo);
        auto ent = [&](double c) {
            MaxEntropyResult mr = value_at(c);
            return mr.feasible ? mr.entropy : kNegInf;
        };
        double h1 = ent(x1);
        double h2 = ent(x2);
        while (hi - lo > tol * std::fmax(1.0, std::fabs(best_c))) {
            if (h1 < h2) {
                lo = x1;
                x1 = x2;
                h1 = h2;
                x2 = lo + gr * (hi - lo);
                h2 = ent(x2);
            } else {
                hi = x2;
                x2 = x1;
                h2 = h1;
                x1 = hi - gr * (hi - lo);
                h1 = ent(x1);
            }
        }
        const double c_star = 0.5 * (lo + hi);
        MaxEntropyResult mr = value_at(c_star);
        offer(c_star, alpha / c_star, mr);
        MaxEntropyResult mg = value_at(best_c);  // keep the grid winner too
        offer(best_c, alpha / best_c, mg);
    }
    return best;
}

}  // namespace mfshift
