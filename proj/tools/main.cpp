// Command line front end: pressure curves, spectra, dimensions, samples.
// Every subcommand writes CSV (to --out or stdout) plus a one-line summary
// on the other stream, with 15-significant-digit floats for reproducibility.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfshift/invariant.hpp"
#include "mfshift/measures.hpp"
#include "mfshift/potential.hpp"
#include "mfshift/pressure_analysis.hpp"
#include "mfshift/sampling.hpp"
#include "mfshift/text.hpp"
#include "mfshift/transfer.hpp"

namespace {

using namespace mfshift;

void emit(const std::string& out_path, const std::string& csv,
          const std::string& summary) {
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << csv;
        if (!out) throw std::runtime_error("write failed: " + out_path);
        std::cout << summary << "\n";
    } else {
        std::cout << csv;
        std::cerr << summary << "\n";
    }
}

std::string status_name(LevelStatus st) {
    switch (st) {
        case LevelStatus::interior: return "interior";
        case LevelStatus::endpoint_lower: return "endpoint_lower";
        case LevelStatus::endpoint_upper: return "endpoint_upper";
        case LevelStatus::empty: return "empty";
    }
    return "unknown";
}

int run_solve(const std::string& pot_path, double s, double tol,
              const std::string& out_path) {
    Potential p = load_potential(pot_path);
    FixedPoint fp = solve_fixed_point(p, s, SolverConfig{tol, 10000});
    std::ostringstream csv;
    csv << "length,word,index,log_psi,psi\n";
    for (int k = 0; k < p.params.ell; ++k) {
        const Eigen::ArrayXd& tbl = fp.log_psi[static_cast<size_t>(k)];
        for (std::int64_t idx = 0; idx < tbl.size(); ++idx) {
            Word w = word_from_index(idx, k, p.params.m);
            csv << k << "," << word_string(w) << "," << idx << ","
                << format_double(tbl[idx]) << "," << format_double(std::exp(tbl[idx]))
                << "\n";
        }
    }
    std::ostringstream sum;
    sum << "pressure=" << format_double(pressure(fp)) << " iterations=" << fp.iterations
        << " log_residual=" << format_double(fp.log_residual)
        << " converged=" << (fp.converged ? "yes" : "no");
    emit(out_path, csv.str(), sum.str());
    return fp.converged ? 0 : 1;
}

int run_pressure(const std::string& pot_path, const std::string& grid, double tol,
                 const std::string& out_path) {
    Potential p = load_potential(pot_path);
    std::vector<double> ss = parse_grid(grid).values();
    std::ostringstream csv;
    csv << "s,pressure,derivative\n";
    for (double s : ss)
        csv << format_double(s) << ","
            << format_double(pressure_value(p, s, SolverConfig{tol, 10000})) << ","
            << format_double(ruelle_derivative(p, s, tol)) << "\n";
    std::ostringstream sum;
    sum << "rows=" << ss.size() << " s_lo=" << format_double(ss.front())
        << " s_hi=" << format_double(ss.back());
    emit(out_path, csv.str(), sum.str());
    return 0;
}

int run_spectrum(const std::string& pot_path, const std::string& grid, double tol,
                 int threads, const std::string& out_path) {
    Potential p = load_potential(pot_path);
    std::vector<double> alphas = parse_grid(grid).values();
    std::vector<SpectrumPoint> pts = spectrum_curve(p, alphas, tol, threads);
    std::ostringstream csv;
    csv << "alpha,s_star,pressure,legendre,dimension,status\n";
    for (const SpectrumPoint& pt : pts)
        csv << format_double(pt.alpha) << "," << format_double(pt.s_star) << ","
            << format_double(pt.pressure_at_s) << "," << format_double(pt.legendre)
            << "," << format_double(pt.dimension) << "," << status_name(pt.status)
            << "\n";
    SpectrumDomain dom = spectrum_domain(p);
    std::ostringstream sum;
    sum << "rows=" << pts.size() << " alpha_min=" << format_double(dom.lower.value)
        << " alpha_max=" << format_double(dom.upper.value);
    emit(out_path, csv.str(), sum.str());
    return 0;
}

int run_extremal(const std::string& pot_path, double tol,
                 const std::string& out_path) {
    Potential p = load_potential(pot_path);
    SpectrumDomain dom = spectrum_domain(p, tol);
    std::ostringstream text;
    text << "min: alpha=" << format_double(dom.lower.value)
         << " converged=" << (dom.lower.converged ? "yes" : "no")
         << " s_reached=" << format_double(dom.lower.s_reached)
         << " attained=" << (dom.lower_attains_min ? "yes" : "no") << " witness="
         << (dom.lower_attains_min ? word_string(dom.min_witness) : std::string("-"))
         << "\n";
    text << "max: alpha=" << format_double(dom.upper.value)
         << " converged=" << (dom.upper.converged ? "yes" : "no")
         << " s_reached=" << format_double(dom.upper.s_reached)
         << " attained=" << (dom.upper_attains_max ? "yes" : "no") << " witness="
         << (dom.upper_attains_max ? word_string(dom.max_witness) : std::string("-"))
         << "\n";
    std::ostringstream sum;
    sum << "alpha_min=" << format_double(dom.lower.value)
        << " alpha_max=" << format_double(dom.upper.value);
    emit(out_path, text.str(), sum.str());
    return 0;
}

int run_measure_dim(const std::string& base, int m, const std::string& probs_text,
                    const std::string& pot_path, double s,
                    const std::string& table_path, int q, bool q_set, double tol,
                    const std::string& out_path) {
    std::unique_ptr<CylinderOracle> oracle;
    int q_eff = q_set ? q : 2;
    if (base == "lebesgue") {
        oracle = std::make_unique<LebesgueOracle>(m);
    } else if (base == "bernoulli") {
        std::vector<double> ps;
        std::stringstream ss(probs_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) ps.push_back(std::stod(tok));
        Eigen::ArrayXd arr(static_cast<Eigen::Index>(ps.size()));
        for (size_t i = 0; i < ps.size(); ++i) arr[static_cast<Eigen::Index>(i)] = ps[i];
        oracle = std::make_unique<BernoulliOracle>(arr);
    } else if (base == "markov") {
        if (pot_path.empty())
            throw std::runtime_error("measure-dim --base markov needs --potential");
        Potential p = load_potential(pot_path);
        FixedPoint fp = solve_fixed_point(p, s);
        oracle = std::make_unique<MarkovOracle>(markov_from_fixed_point(fp));
        if (!q_set) q_eff = p.params.q;
    } else if (base == "table") {
        if (table_path.empty())
            throw std::runtime_error("measure-dim --base table needs --table");
        oracle = std::make_unique<TableOracle>(load_table_oracle(table_path));
    } else {
        throw std::runtime_error("unknown base measure: " + base);
    }
    SeriesResult r = telescopic_dimension(*oracle, q_eff, tol);
    std::ostringstream csv;
    csv << "dimension,tail_bound,terms,tol_met\n";
    csv << format_double(r.value) << "," << format_double(r.tail_bound) << ","
        << r.terms << "," << (r.tol_met ? "yes" : "no") << "\n";
    std::ostringstream sum;
    sum << "dimension=" << format_double(r.value)
        << " tail_bound=" << format_double(r.tail_bound);
    emit(out_path, csv.str(), sum.str());
    return r.tol_met ? 0 : 1;
}

int run_sample(const std::string& pot_path, double s, std::int64_t n,
               std::uint64_t seed, const std::string& out_path) {
    Potential p = load_potential(pot_path);
    FixedPoint fp = solve_fixed_point(p, s);
    MarkovMeasure mm = markov_from_fixed_point(fp);
    Word x = sample_telescopic(mm, p.params.q, n, seed);
    std::ostringstream csv;
    csv << "k,symbol\n";
    for (std::int64_t k = 1; k <= n; ++k)
        csv << k << "," << x[static_cast<size_t>(k - 1)] << "\n";
    const std::int64_t terms = n / checked_pow(p.params.q, p.params.ell - 1);
    std::ostringstream sum;
    sum << "n=" << n << " seed=" << seed << " average="
        << (terms >= 1 ? format_double(multiple_ergodic_sum(p, x, terms).average)
                       : std::string("-"));
    emit(out_path, csv.str(), sum.str());
    return 0;
}

int run_lln(const std::string& pot_path, double s, std::int64_t n, int trials,
            std::uint64_t seed, int threads, const std::string& out_path) {
    Potential p = load_potential(pot_path);
    LlnReport rep = lln_experiment(p, s, n, trials, seed, threads);
    std::ostringstream sum;
    sum << "target_average=" << format_double(rep.target_average)
        << " mean_average=" << format_double(rep.mean_average)
        << " target_dimension=" << format_double(rep.target_dimension)
        << " mean_dimension=" << format_double(rep.mean_dimension);
    emit(out_path, rep.to_csv(), sum.str());
    return 0;
}

int run_invariant(const std::string& pot_path, const std::string& grid, double tol,
                  const std::string& out_path) {
    Potential p = load_potential(pot_path);
    ProductPotential pp = factor_product(p);
    std::vector<double> alphas = parse_grid(grid).values();
    std::ostringstream csv;
    csv << "alpha,feasible,value,entropy,beta1,beta2\n";
    int feasible = 0;
    for (double a : alphas) {
        InvariantPoint pt = invariant_spectrum(pp, a, tol);
        feasible += pt.feasible ? 1 : 0;
        csv << format_double(pt.alpha) << "," << (pt.feasible ? "yes" : "no") << ","
            << format_double(pt.value) << "," << format_double(pt.entropy) << ","
            << format_double(pt.beta1) << "," << format_double(pt.beta2) << "\n";
    }
    std::ostringstream sum;
    sum << "rows=" << alphas.size() << " feasible=" << feasible;
    emit(out_path, csv.str(), sum.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pressure, spectra, and dimensions for sparse ergodic averages"};
    app.require_subcommand(1);

    std::string pot_path, out_path, grid, base = "lebesgue", probs_text, table_path;
    double s = 0, tol = 1e-10;
    int m = 2, q = 2, threads = 1, trials = 32;
    std::int64_t n = 1024;
    std::uint64_t seed = 1;

    CLI::App* c_solve = app.add_subcommand("solve", "fixed point tables of the transfer operator");
    c_solve->add_option("--potential", pot_path, "potential JSON file")->required();
    c_solve->add_option("--s", s, "parameter s")->required();
    c_solve->add_option("--tol", tol, "solver tolerance");
    c_solve->add_option("--out", out_path, "CSV output path");

    CLI::App* c_pressure = app.add_subcommand("pressure", "pressure and derivative on an s grid");
    c_pressure->add_option("--potential", pot_path, "potential JSON file")->required();
    c_pressure->add_option("--s-grid", grid, "lo:hi:step")->required();
    c_pressure->add_option("--tol", tol, "solver tolerance");
    c_pressure->add_option("--out", out_path, "CSV output path");

    CLI::App* c_spectrum = app.add_subcommand("spectrum", "Legendre spectrum on an alpha grid");
    c_spectrum->add_option("--potential", pot_path, "potential JSON file")->required();
    c_spectrum->add_option("--alpha-grid", grid, "lo:hi:step")->required();
    c_spectrum->add_option("--tol", tol, "bisection tolerance");
    c_spectrum->add_option("--threads", threads, "worker threads");
    c_spectrum->add_option("--out", out_path, "CSV output path");

    CLI::App* c_extremal = app.add_subcommand("extremal", "spectrum domain and periodic witnesses");
    c_extremal->add_option("--potential", pot_path, "potential JSON file")->required();
    c_extremal->add_option("--tol", tol, "ladder tolerance");
    c_extremal->add_option("--out", out_path, "text output path");

    CLI::App* c_mdim = app.add_subcommand("measure-dim", "dimension of a telescopic product measure");
    c_mdim->add_option("--base", base, "lebesgue|bernoulli|markov|table")->required();
    c_mdim->add_option("--m", m, "alphabet size (lebesgue)");
    c_mdim->add_option("--probs", probs_text, "comma separated probabilities (bernoulli)");
    c_mdim->add_option("--potential", pot_path, "potential JSON file (markov)");
    c_mdim->add_option("--s", s, "chain parameter (markov)");
    c_mdim->add_option("--table", table_path, "cylinder table JSON file (table)");
    CLI::Option* q_opt = c_mdim->add_option("--q", q, "sparsity base of the product");
    c_mdim->add_option("--tol", tol, "series tail tolerance");
    c_mdim->add_option("--out", out_path, "CSV output path");

    CLI::App* c_sample = app.add_subcommand("sample", "one telescopic sample path");
    c_sample->add_option("--potential", pot_path, "potential JSON file")->required();
    c_sample->add_option("--s", s, "chain parameter")->required();
    c_sample->add_option("--n", n, "sequence length")->required();
    c_sample->add_option("--seed", seed, "RNG seed");
    c_sample->add_option("--out", out_path, "CSV output path");

    CLI::App* c_lln = app.add_subcommand("lln", "sampled averages against their limits");
    c_lln->add_option("--potential", pot_path, "potential JSON file")->required();
    c_lln->add_option("--s", s, "chain parameter")->required();
    c_lln->add_option("--n", n, "number of ergodic terms per trial")->required();
    c_lln->add_option("--trials", trials, "trial count");
    c_lln->add_option("--seed", seed, "RNG seed");
    c_lln->add_option("--threads", threads, "worker threads");
    c_lln->add_option("--out", out_path, "CSV output path");

    CLI::App* c_inv = app.add_subcommand("invariant", "spectrum over invariant product measures");
    c_inv->add_option("--potential", pot_path, "rank-one two-coordinate potential JSON file")->required();
    c_inv->add_option("--alpha-grid", grid, "lo:hi:step")->required();
    c_inv->add_option("--tol", tol, "refinement tolerance");
    c_inv->add_option("--out", out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_solve) return run_solve(pot_path, s, tol, out_path);
        if (*c_pressure) return run_pressure(pot_path, grid, tol, out_path);
        if (*c_spectrum) return run_spectrum(pot_path, grid, tol, threads, out_path);
        if (*c_extremal) return run_extremal(pot_path, tol, out_path);
        if (*c_mdim)
            return run_measure_dim(base, m, probs_text, pot_path, s, table_path, q,
                                   q_opt->count() > 0, tol, out_path);
        if (*c_sample) return run_sample(pot_path, s, n, seed, out_path);
        if (*c_lln) return run_lln(pot_path, s, n, trials, seed, threads, out_path);
        if (*c_inv) return run_invariant(pot_path, grid, tol, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
