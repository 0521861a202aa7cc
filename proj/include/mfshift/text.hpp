#pragma once

// Deterministic text round-trips for the CLI: 15-significant-digit floats
// (byte-identical across runs) and lo:hi:step grid parsing.

#include <string>
#include <vector>

namespace mfshift {

std::string format_double(double x);

struct GridSpec {
    double lo = 0;
    double hi = 0;
    double step = 0;

    std::vector<double> values() const;
};

GridSpec parse_grid(const std::string& text);  // "lo:hi:step", step > 0

}  // namespace mfshift
