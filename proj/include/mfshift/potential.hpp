#pragma once

// Potentials on length-ell windows, stored as a dense table over S^ell in
// lexicographic order, and the sparse ergodic averages they drive:
//   A_n phi(x) = (1/n) sum_{k=1..n} phi(x_k, x_{kq}, ..., x_{k q^(ell-1)}).
// Sequences are 1-indexed in the math; a C++ span x has x[t-1] = x_t.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>

#include "mfshift/words.hpp"

namespace mfshift {

struct Potential {
    ShiftParams params;
    Eigen::ArrayXd values;  // size m^ell, index = word_index
    double min_value = 0;
    double max_value = 0;
};

// Validates params, finiteness, and that values has exactly m^ell entries.
Potential make_potential(const ShiftParams& sp, Eigen::ArrayXd values);

// Ingestion point for the JSON document {"m":..,"q":..,"ell":..,"phi":[..]}.
Potential parse_potential(const std::string& json_text);
Potential load_potential(const std::string& path);

double phi_eval(const Potential& p, std::span<const int> w);

struct ErgodicSum {
    double sum = 0;
    double average = 0;
};

// Requires x.size() >= n * q^(ell-1); throws otherwise.
ErgodicSum multiple_ergodic_sum(const Potential& p, std::span<const int> x,
                                std::int64_t n);

}  // namespace mfshift
