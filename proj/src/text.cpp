#include "mfshift/text.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mfshift {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

std::vector<double> GridSpec::values() const {
    std::vector<double> out;
    // Relative slack so hi lands on the grid despite rounding.
    double ratio = (hi - lo) / step;
    long count = static_cast<long>(std::floor(ratio + 1e-9 * std::fmax(1.0, std::fabs(ratio)))) + 1;
    if (count < 1) count = 1;
    for (long i = 0; i < count; ++i) {
        double v = lo + static_cast<double>(i) * step;
        if (v > hi + 0.5 * step) break;
        out.push_back(v);
    }
    return out;
}

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    size_t p1 = text.find(':');
    size_t p2 = (p1 == std::string::npos) ? std::string::npos : text.find(':', p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
        throw std::invalid_argument("grid must be lo:hi:step");
    size_t used = 0;
    try {
        g.lo = std::stod(text.substr(0, p1), &used);
        if (used != p1) throw std::invalid_argument("");
        std::string mid = text.substr(p1 + 1, p2 - p1 - 1);
        g.hi = std::stod(mid, &used);
        if (used != mid.size()) throw std::invalid_argument("");
        std::string last = text.substr(p2 + 1);
        g.step = std::stod(last, &used);
        if (used != last.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("grid must be lo:hi:step with numeric fields");
    }
    if (!(g.step > 0)) throw std::invalid_argument("grid step must be > 0");
    if (g.hi < g.lo) throw std::invalid_argument("grid needs hi >= lo");
    return g;
}

}  // namespace mfshift
