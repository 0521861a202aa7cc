#include "mfshift/measures.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "mfshift/partition.hpp"
#include "mfshift/pressure_analysis.hpp"

namespace mfshift {

namespace {

constexpr std::int64_t kEnumGuard = std::int64_t(1) << 24;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int guard_depth(int m) {
    int k = 0;
    std::int64_t sz = 1;
    while (sz <= kEnumGuard / m) {
        sz *= m;
        ++k;
    }
    return k;
}

void check_symbols(std::span<const int> w, int m, const char* who) {
    if (!valid_word(w, m))
        throw std::invalid_argument(std::string(who) + ": symbols outside [0, m)");
}

double xlogx(double p) { return p > 0 ? p * std::log(p) : 0.0; }

// Odometer over words of a fixed length; calls fn(word).
template <typename Fn>
void for_each_word(int m, int k, Fn&& fn) {
    Word w(static_cast<size_t>(k), 0);
    while (true) {
        fn(std::span<const int>(w));
        int t = k - 1;
        while (t >= 0 && w[static_cast<size_t>(t)] == m - 1) {
            w[static_cast<size_t>(t)] = 0;
            --t;
        }
        if (t < 0) return;
        ++w[static_cast<size_t>(t)];
    }
}

}  // namespace

double CylinderOracle::mass(std::span<const int> w) const {
    return std::exp(log_mass(w));
}

int CylinderOracle::max_entropy_depth() const { return guard_depth(alphabet_size()); }

double CylinderOracle::entropy(int k) const {
    if (k < 1) throw std::invalid_argument("entropy: k must be >= 1");
    if (k > max_entropy_depth())
        throw std::domain_error("entropy: depth exceeds the enumeration guard");
    double h = 0;
    for_each_word(alphabet_size(), k, [&](std::span<const int> w) {
        const double lm = log_mass(w);
        if (lm != kNegInf) h -= std::exp(lm) * lm;
    });
    return h;
}

std::vector<double> CylinderOracle::window_means(const Potential& p, int count) const {
    if (count < 0) throw std::invalid_argument("window_means: count must be >= 0");
    if (p.params.m != alphabet_size())
        throw std::invalid_argument("window_means: alphabet mismatch");
    const int ell = p.params.ell;
    std::vector<double> out;
    for (int j = 0; j < count; ++j) {
        if (j + ell > max_entropy_depth()) break;  // enumeration guard
        double e = 0;
        for_each_word(p.params.m, j + ell, [&](std::span<const int> w) {
            const double lm = log_mass(w);
            if (lm == kNegInf) return;
            e += std::exp(lm) * p.values[word_index(w.last(static_cast<size_t>(ell)),
                                                    p.params.m)];
        });
        out.push_back(e);
    }
    return out;
}

LebesgueOracle::LebesgueOracle(int m) : m_(m) {
    if (m < 2) throw std::invalid_argument("alphabet size must be >= 2");
}

double LebesgueOracle::log_mass(std::span<const int> w) const {
    check_symbols(w, m_, "LebesgueOracle");
    return -static_cast<double>(w.size()) * std::log(m_);
}

double LebesgueOracle::entropy(int k) const {
    if (k < 1) throw std::invalid_argument("entropy: k must be >= 1");
    return k * std::log(m_);
}

std::vector<double> LebesgueOracle::window_means(const Potential& p, int count) const {
    if (p.params.m != m_) throw std::invalid_argument("window_means: alphabet mismatch");
    return std::vector<double>(static_cast<size_t>(count), p.values.mean());
}

int LebesgueOracle::max_entropy_depth() const {
    return std::numeric_limits<int>::max();
}

BernoulliOracle::BernoulliOracle(Eigen::ArrayXd probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw std::invalid_argument("need at least two symbols");
    for (Eigen::Index i = 0; i < probs_.size(); ++i)
        if (!(probs_[i] >= 0) || !std::isfinite(probs_[i]))
            throw std::invalid_argument("probabilities must be finite and >= 0");
    if (std::fabs(probs_.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to 1");
    log_probs_ = probs_.log();  // log 0 = -inf is fine
}

int BernoulliOracle::alphabet_size() const { return static_cast<int>(probs_.size()); }

double BernoulliOracle::log_mass(std::span<const int> w) const {
    check_symbols(w, alphabet_size(), "BernoulliOracle");
    double acc = 0;
    for (int a : w) acc += log_probs_[a];
    return acc;
}

double BernoulliOracle::entropy(int k) const {
    if (k < 1) throw std::invalid_argument("entropy: k must be >= 1");
    double h1 = 0;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) h1 -= xlogx(probs_[i]);
    return k * h1;
}

std::vector<double> BernoulliOracle::window_means(const Potential& p, int count) const {
    if (p.params.m != alphabet_size())
        throw std::invalid_argument("window_means: alphabet mismatch");
    // Coordinates are independent, so every window has the same mean.
    double e = 0;
    for_each_word(p.params.m, p.params.ell, [&](std::span<const int> w) {
        double mass = 1;
        for (int a : w) mass *= probs_[a];
        if (mass > 0) e += mass * p.values[word_index(w, p.params.m)];
    });
    return std::vector<double>(static_cast<size_t>(count), e);
}

int BernoulliOracle::max_entropy_depth() const {
    return std::numeric_limits<int>::max();
}

TableOracle::TableOracle(int m, int depth, Eigen::ArrayXd masses)
    : m_(m), depth_(depth) {
    if (m < 2) throw std::invalid_argument("alphabet size must be >= 2");
    if (depth < 1) throw std::invalid_argument("table depth must be >= 1");
    const std::int64_t want = checked_pow(m, depth);
    if (want > kEnumGuard)
        throw std::invalid_argument("table size exceeds the enumeration guard");
    if (masses.size() != want)
        throw std::invalid_argument("table needs m^depth masses");
    double sum = 0;
    for (Eigen::Index i = 0; i < masses.size(); ++i) {
        if (!(masses[i] >= 0) || !std::isfinite(masses[i]))
            throw std::invalid_argument("cylinder masses must be finite and >= 0");
        sum += masses[i];
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("cylinder masses must sum to 1");
    level_mass_.assign(static_cast<size_t>(depth + 1), Eigen::ArrayXd());
    level_mass_[static_cast<size_t>(depth)] = std::move(masses);
    for (int k = depth - 1; k >= 0; --k) {
        const Eigen::ArrayXd& child = level_mass_[static_cast<size_t>(k + 1)];
        Eigen::ArrayXd tbl = Eigen::ArrayXd::Zero(checked_pow(m, k));
        for (std::int64_t w = 0; w < tbl.size(); ++w)
            for (int j = 0; j < m; ++j) tbl[w] += child[w * m + j];
        level_mass_[static_cast<size_t>(k)] = std::move(tbl);
    }
}

double TableOracle::log_mass(std::span<const int> w) const {
    check_symbols(w, m_, "TableOracle");
    const int k = static_cast<int>(w.size());
    if (k <= depth_) {
        const double mass = level_mass_[static_cast<size_t>(k)][word_index(w, m_)];
        return mass > 0 ? std::log(mass) : kNegInf;
    }
    // Beyond the stored depth each child splits its parent mass evenly.
    const double head =
        level_mass_[static_cast<size_t>(depth_)]
                   [word_index(w.first(static_cast<size_t>(depth_)), m_)];
    if (!(head > 0)) return kNegInf;
    return std::log(head) - static_cast<double>(k - depth_) * std::log(m_);
}

TableOracle parse_table_oracle(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("table document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("table document must be a JSON object");
    for (const char* key : {"m", "depth", "masses"})
        if (!doc.contains(key))
            throw std::invalid_argument(std::string("table document missing field '") + key + "'");
    for (const char* key : {"m", "depth"})
        if (!doc.at(key).is_number_integer())
            throw std::invalid_argument("fields m, depth must be integers");
    const int m = doc.at("m").get<int>();
    const int depth = doc.at("depth").get<int>();
    const auto& arr = doc.at("masses");
    if (!arr.is_array())
        throw std::invalid_argument("field 'masses' must be an array of numbers");
    Eigen::ArrayXd masses(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            throw std::invalid_argument("field 'masses' must contain numbers only");
        masses[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return TableOracle(m, depth, std::move(masses));
}

TableOracle load_table_oracle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table_oracle(buf.str());
}

MarkovMeasure markov_from_fixed_point(const FixedPoint& fp) {
    if (!fp.converged)
        throw std::runtime_error("transfer solver did not converge; no chain available");
    const ShiftParams& sp = fp.potential.params;
    const int m = sp.m;
    const int q = sp.q;
    const std::int64_t states = sp.state_count();
    const std::int64_t tail = states / m;
    const Eigen::ArrayXd& u = fp.log_psi[static_cast<size_t>(sp.ell - 1)];

    MarkovMeasure mm;
    mm.params = sp;
    mm.s = fp.s;

    mm.log_prefix.assign(static_cast<size_t>(sp.ell), Eigen::ArrayXd());
    mm.log_prefix[0] = Eigen::ArrayXd::Zero(1);
    for (int k = 1; k < sp.ell; ++k) {
        const Eigen::ArrayXd& parent = mm.log_prefix[static_cast<size_t>(k - 1)];
        const std::int64_t sz = checked_pow(m, k);
        Eigen::ArrayXd tbl(sz);
        for (std::int64_t w = 0; w < sz; ++w) {
            const std::int64_t par = w / m;
            tbl[w] = parent[par] + fp.log_psi[static_cast<size_t>(k)][w] -
                     q * fp.log_psi[static_cast<size_t>(k - 1)][par];
        }
        mm.log_prefix[static_cast<size_t>(k)] = std::move(tbl);
    }
    mm.log_initial = mm.log_prefix[static_cast<size_t>(sp.ell - 1)];
    mm.initial = mm.log_initial.exp();

    mm.log_transition.resize(states, m);
    for (std::int64_t a = 0; a < states; ++a) {
        const std::int64_t base = (a % tail) * m;
        for (int j = 0; j < m; ++j)
            mm.log_transition(a, j) =
                fp.s * fp.potential.values[a * m + j] + u[base + j] - q * u[a];
    }
    mm.transition = mm.log_transition.array().exp();
    return mm;
}

double markov_log_cylinder(const MarkovMeasure& mm, std::span<const int> w) {
    const int m = mm.params.m;
    const int ell = mm.params.ell;
    check_symbols(w, m, "markov_log_cylinder");
    const int n = static_cast<int>(w.size());
    if (n < ell)
        return mm.log_prefix[static_cast<size_t>(n)][word_index(w, m)];
    const std::int64_t tail = mm.params.state_count() / m;
    std::int64_t state = word_index(w.first(static_cast<size_t>(ell - 1)), m);
    double acc = mm.log_initial[state];
    for (int t = ell - 1; t < n; ++t) {
        const int j = w[static_cast<size_t>(t)];
        acc += mm.log_transition(state, j);
        state = (state % tail) * m + j;
    }
    return acc;
}

double markov_cylinder(const MarkovMeasure& mm, std::span<const int> w) {
    return std::exp(markov_log_cylinder(mm, w));
}

MarkovOracle::MarkovOracle(MarkovMeasure mm) : mm_(std::move(mm)) {}

int MarkovOracle::alphabet_size() const { return mm_.params.m; }

double MarkovOracle::log_mass(std::span<const int> w) const {
    return markov_log_cylinder(mm_, w);
}

double MarkovOracle::entropy(int k) const {
    if (k < 1) throw std::invalid_argument("entropy: k must be >= 1");
    const int m = mm_.params.m;
    const int ell = mm_.params.ell;
    if (k <= ell - 1) {
        double h = 0;
        for_each_word(m, k, [&](std::span<const int> w) {
            const double lm = markov_log_cylinder(mm_, w);
            if (lm != kNegInf) h -= std::exp(lm) * lm;
        });
        return h;
    }
    // Chain rule: H_k = H_{ell-1} + sum over emissions of the conditional
    // row entropy weighted by the evolving state marginal.
    double h = entropy(ell - 1);
    const std::int64_t states = mm_.params.state_count();
    const std::int64_t tail = states / m;
    Eigen::ArrayXd row_h(states);
    for (std::int64_t a = 0; a < states; ++a) {
        double rh = 0;
        for (int j = 0; j < m; ++j) rh -= xlogx(mm_.transition(a, j));
        row_h[a] = rh;
    }
    Eigen::ArrayXd d = mm_.initial;
    for (int t = ell; t <= k; ++t) {
        h += (d * row_h).sum();
        if (t == k) break;
        Eigen::ArrayXd next = Eigen::ArrayXd::Zero(states);
        for (std::int64_t a = 0; a < states; ++a) {
            if (d[a] == 0) continue;
            const std::int64_t base = (a % tail) * m;
            for (int j = 0; j < m; ++j) next[base + j] += d[a] * mm_.transition(a, j);
        }
        d = std::move(next);
    }
    return h;
}

std::vector<double> MarkovOracle::window_means(const Potential& p, int count) const {
    if (p.params.m != mm_.params.m)
        throw std::invalid_argument("window_means: alphabet mismatch");
    if (count < 0) throw std::invalid_argument("window_means: count must be >= 0");
    const int m = mm_.params.m;
    // Track the distribution of sliding words long enough for both the
    // chain state and the potential window.
    const int W = std::max(p.params.ell, mm_.params.ell);
    const int lead = W - p.params.ell;

    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    // Windows fully inside the first W-1 symbols come straight from the
    // short-word marginals.
    for (int j = 0; j < std::min(lead, count); ++j) {
        double e = 0;
        for_each_word(m, j + p.params.ell, [&](std::span<const int> w) {
            const double lm = markov_log_cylinder(mm_, w);
            if (lm == kNegInf) return;
            e += std::exp(lm) *
                 p.values[word_index(w.last(static_cast<size_t>(p.params.ell)), m)];
        });
        out.push_back(e);
    }
    if (count <= lead) return out;

    const std::int64_t words = checked_pow(m, W - 1);
    const std::int64_t state_size = mm_.params.state_count();
    Eigen::ArrayXd d(words);
    {
        Word w(static_cast<size_t>(W - 1), 0);
        for (std::int64_t idx = 0; idx < words; ++idx) {
            std::int64_t rev = idx;
            for (int t = W - 2; t >= 0; --t) {
                w[static_cast<size_t>(t)] = static_cast<int>(rev % m);
                rev /= m;
            }
            d[idx] = std::exp(markov_log_cylinder(mm_, w));
        }
    }
    const std::int64_t word_tail = words / m;  // drop the oldest symbol
    const std::int64_t phi_tail = checked_pow(m, p.params.ell);

    for (int j = lead; j < count; ++j) {
        double e = 0;
        Eigen::ArrayXd next = Eigen::ArrayXd::Zero(words);
        for (std::int64_t idx = 0; idx < words; ++idx) {
            if (d[idx] == 0) continue;
            const std::int64_t state = idx % state_size;
            const std::int64_t succ_word = (idx % word_tail) * m;
            const std::int64_t phi_base = (idx * m) % phi_tail;
            for (int sym = 0; sym < m; ++sym) {
                const double pr = d[idx] * mm_.transition(state, sym);
                if (pr == 0) continue;
                e += pr * p.values[phi_base + sym];
                next[succ_word + sym] += pr;
            }
        }
        out.push_back(e);
        d = std::move(next);
    }
    return out;
}

int MarkovOracle::max_entropy_depth() const {
    return std::numeric_limits<int>::max();
}

double telescopic_log_cylinder(const CylinderOracle& base, int q,
                               std::span<const int> w) {
    if (q < 2) throw std::invalid_argument("telescopic_log_cylinder: q must be >= 2");
    check_symbols(w, base.alphabet_size(), "telescopic_log_cylinder");
    const std::int64_t n = static_cast<std::int64_t>(w.size());
    double acc = 0;
    Word sub;
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i % q == 0) continue;
        sub.clear();
        for (std::int64_t pos = i; pos <= n; pos *= q) {
            sub.push_back(w[static_cast<size_t>(pos - 1)]);
            if (pos > n / q) break;
        }
        acc += base.log_mass(sub);
    }
    return acc;
}

double telescopic_log_cylinder(const TelescopicMeasure& tm, std::span<const int> w) {
    if (tm.base == nullptr) throw std::invalid_argument("telescopic measure has no base");
    return telescopic_log_cylinder(*tm.base, tm.q, w);
}

namespace {

double series_tail_nat(int q, int K, double weight) {
    const double x = 1.0 / q;
    const double one_minus = 1.0 - x;
    const double qq = static_cast<double>(q - 1) * static_cast<double>(q - 1);
    return qq * weight * std::pow(x, K + 2) * ((K + 1) * one_minus + x) /
           (one_minus * one_minus);
}

}  // namespace

SeriesResult telescopic_dimension(const CylinderOracle& base, int q, double tol) {
    if (q < 2) throw std::invalid_argument("telescopic_dimension: q must be >= 2");
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    const double logm = std::log(base.alphabet_size());
    const int depth_cap = base.max_entropy_depth();
    const double qq = static_cast<double>(q - 1) * static_cast<double>(q - 1);

    SeriesResult r;
    double value_nat = 0;
    double weight = 1.0 / (static_cast<double>(q) * q);  // q^-(k+1), k=1
    int k = 0;
    while (true) {
        const double tail_dim = series_tail_nat(q, k, logm) / logm;
        if (tail_dim < tol) {
            r.tail_bound = tail_dim;
            r.tol_met = true;
            break;
        }
        if (k >= depth_cap || k >= 1000) {
            r.tail_bound = tail_dim;
            r.tol_met = false;
            break;
        }
        ++k;
        value_nat += qq * weight * base.entropy(k);
        weight /= q;
    }
    r.terms = k;
    r.value = value_nat / logm;
    return r;
}

SeriesResult m_functional(const CylinderOracle& base, const Potential& p, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    if (p.params.m != base.alphabet_size())
        throw std::invalid_argument("m_functional: alphabet mismatch");
    const int q = p.params.q;
    const double norm = std::fmax(std::fabs(p.min_value), std::fabs(p.max_value));
    const double qq = static_cast<double>(q - 1) * static_cast<double>(q - 1);

    int K = 1;
    while (K < 1000 && series_tail_nat(q, K, norm) >= tol) ++K;
    std::vector<double> e = base.window_means(p, K);
    const int Kact = static_cast<int>(e.size());

    SeriesResult r;
    r.terms = Kact;
    r.tail_bound = series_tail_nat(q, Kact, norm);
    r.tol_met = r.tail_bound < tol;
    double total = 0;
    double prefix = 0;
    double weight = 1.0 / (static_cast<double>(q) * q);
    for (int k = 1; k <= Kact; ++k) {
        prefix += e[static_cast<size_t>(k - 1)];
        total += weight * prefix;
        weight /= q;
    }
    r.value = qq * total;
    return r;
}

double markov_dimension_formula(const Potential& p, double s, double tol) {
    FixedPoint fp = solve_fixed_point(p, s, SolverConfig{std::fmin(tol, 1e-12), 10000});
    if (!fp.converged)
        throw std::runtime_error("transfer solver did not converge");
    const double P = pressure(fp);
    const double dP = ruelle_derivative(p, s, tol);
    const double scale =
        static_cast<double>(checked_pow(p.params.q, p.params.ell - 1)) *
        std::log(p.params.m);
    return (-s * dP + P) / scale;
}

double gibbs_identity_defect(const FixedPoint& fp, std::span<const int> w) {
    const ShiftParams& sp = fp.potential.params;
    const int m = sp.m;
    const int q = sp.q;
    const int ell = sp.ell;
    check_symbols(w, m, "gibbs_identity_defect");
    const std::int64_t n = static_cast<std::int64_t>(w.size());
    if (n < 1) throw std::invalid_argument("gibbs_identity_defect: word must be nonempty");

    MarkovMeasure mm = markov_from_fixed_point(fp);
    MarkovOracle oracle(mm);
    const double lhs = telescopic_log_cylinder(oracle, q, w);

    // phi over full columns j, jq, ..., j q^(ell-1).
    const std::int64_t qpow = checked_pow(q, ell - 1);
    double phi_sum = 0;
    for (std::int64_t j = 1; j * qpow <= n; ++j) {
        std::int64_t idx = 0;
        std::int64_t pos = j;
        for (int t = 0; t < ell; ++t) {
            idx = idx * m + w[static_cast<size_t>(pos - 1)];
            pos *= q;
        }
        phi_sum += fp.potential.values[idx];
    }

    // B_t = sum_{k<=t} log psi over the last min(depth+1, ell-1) positions
    // of the column of k.
    auto b_sum = [&](std::int64_t t) {
        double acc = 0;
        for (std::int64_t k = 1; k <= t; ++k) {
            IndexDecomposition dec = index_decompose(k, q);
            const int len = static_cast<int>(std::min<std::int64_t>(dec.depth + 1, ell - 1));
            std::int64_t first = dec.generator;
            for (int skip = 0; skip < dec.depth - (len - 1); ++skip) first *= q;
            std::int64_t idx = 0;
            std::int64_t pos = first;
            for (int tt = 0; tt < len; ++tt) {
                idx = idx * m + w[static_cast<size_t>(pos - 1)];
                pos *= q;
            }
            acc += fp.log_psi[static_cast<size_t>(len)][idx];
        }
        return acc;
    };

    const double log_psi_empty = fp.log_psi[0][0];
    const std::int64_t nq = n / q;
    const double rhs = fp.s * phi_sum -
                       static_cast<double>(n - nq) * q * log_psi_empty -
                       q * b_sum(nq) + b_sum(n);
    return std::fabs(lhs - rhs);
}

double gibbs_identity_defect(const Potential& p, double s, std::span<const int> w) {
    FixedPoint fp = solve_fixed_point(p, s);
    if (!fp.converged)
        throw std::runtime_error("transfer solver did not converge");
    return gibbs_identity_defect(fp, w);
}

}  // namespace mfshift
