#include "mfshift/potential.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace mfshift {

Potential make_potential(const ShiftParams& sp, Eigen::ArrayXd values) {
    validate(sp);
    const std::int64_t want = sp.table_size();
    if (values.size() != want) {
        std::ostringstream msg;
        msg << "potential needs " << want << " values (m^ell), got " << values.size();
        throw std::invalid_argument(msg.str());
    }
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("potential values must be finite");
    Potential p;
    p.params = sp;
    p.min_value = values.minCoeff();
    p.max_value = values.maxCoeff();
    p.values = std::move(values);
    return p;
}

Potential parse_potential(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("potential document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("potential document must be a JSON object");
    for (const char* key : {"m", "q", "ell", "phi"})
        if (!doc.contains(key))
            throw std::invalid_argument(std::string("potential document missing field '") + key + "'");
    ShiftParams sp;
    for (const char* key : {"m", "q", "ell"})
        if (!doc.at(key).is_number_integer())
            throw std::invalid_argument("fields m, q, ell must be integers");
    sp.m = doc.at("m").get<int>();
    sp.q = doc.at("q").get<int>();
    sp.ell = doc.at("ell").get<int>();
    const auto& phi = doc.at("phi");
    if (!phi.is_array())
        throw std::invalid_argument("field 'phi' must be an array of numbers");
    Eigen::ArrayXd values(static_cast<Eigen::Index>(phi.size()));
    for (size_t i = 0; i < phi.size(); ++i) {
        if (!phi[i].is_number())
            throw std::invalid_argument("field 'phi' must contain numbers only");
        values[static_cast<Eigen::Index>(i)] = phi[i].get<double>();
    }
    return make_potential(sp, std::move(values));
}

Potential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open potential file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_potential(buf.str());
}

double phi_eval(const Potential& p, std::span<const int> w) {
    if (static_cast<int>(w.size()) != p.params.ell)
        throw std::invalid_argument("phi_eval: word length must equal ell");
    return p.values[word_index(w, p.params.m)];
}

ErgodicSum multiple_ergodic_sum(const Potential& p, std::span<const int> x,
                                std::int64_t n) {
    if (n < 1) throw std::invalid_argument("multiple_ergodic_sum: n must be >= 1");
    const int m = p.params.m;
    const int q = p.params.q;
    const int ell = p.params.ell;
    const std::int64_t span_needed = n * checked_pow(q, ell - 1);
    if (static_cast<std::int64_t>(x.size()) < span_needed) {
        std::ostringstream msg;
        msg << "sequence too short: need " << span_needed << " coordinates, got " << x.size();
        throw std::invalid_argument(msg.str());
    }
    if (!valid_word(x.first(static_cast<size_t>(span_needed)), m))
        throw std::invalid_argument("sequence has symbols outside [0, m)");
    ErgodicSum r;
    for (std::int64_t k = 1; k <= n; ++k) {
        std::int64_t idx = 0;
        std::int64_t pos = k;
        for (int t = 0; t < ell; ++t) {
            idx = idx * m + x[pos - 1];  // x is 1-indexed in the math
            pos *= q;
        }
        r.sum += p.values[idx];
    }
    r.average = r.sum / static_cast<double>(n);
    return r;
}

}  // namespace mfshift
