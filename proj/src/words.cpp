#include "mfshift/words.hpp"

#include <limits>
#include <stdexcept>

namespace mfshift {

std::int64_t checked_pow(std::int64_t m, int e) {
    if (m < 0 || e < 0) throw std::invalid_argument("checked_pow: negative input");
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (m != 0 && r > std::numeric_limits<std::int64_t>::max() / m)
            throw std::overflow_error("checked_pow: overflow");
        r *= m;
    }
    return r;
}

std::int64_t ShiftParams::table_size() const { return checked_pow(m, ell); }

std::int64_t ShiftParams::state_count() const { return checked_pow(m, ell - 1); }

bool operator==(const ShiftParams& a, const ShiftParams& b) {
    return a.m == b.m && a.q == b.q && a.ell == b.ell;
}

namespace {
// Largest dense table any solver-side structure may allocate.
constexpr std::int64_t kMaxTable = std::int64_t(1) << 24;
}  // namespace

void validate(const ShiftParams& sp) {
    if (sp.m < 2) throw std::invalid_argument("alphabet size m must be >= 2");
    if (sp.q < 2) throw std::invalid_argument("sparsity base q must be >= 2");
    if (sp.ell < 2) throw std::invalid_argument("window length ell must be >= 2");
    std::int64_t sz = 0;
    try {
        sz = checked_pow(sp.m, sp.ell);
    } catch (const std::overflow_error&) {
        throw std::invalid_argument("m^ell does not fit in a 64-bit integer");
    }
    if (sz > kMaxTable)
        throw std::invalid_argument("m^ell exceeds the dense table guard (2^24)");
}

bool valid_word(std::span<const int> w, int m) {
    for (int a : w)
        if (a < 0 || a >= m) return false;
    return true;
}

std::int64_t word_index(std::span<const int> w, int m) {
    if (!valid_word(w, m)) throw std::invalid_argument("word has symbols outside [0, m)");
    std::int64_t idx = 0;
    for (int a : w) idx = idx * m + a;
    return idx;
}

Word word_from_index(std::int64_t index, int length, int m) {
    if (length < 0) throw std::invalid_argument("negative word length");
    if (index < 0 || index >= checked_pow(m, length))
        throw std::invalid_argument("word index out of range");
    Word w(length);
    for (int t = length - 1; t >= 0; --t) {
        w[t] = static_cast<int>(index % m);
        index /= m;
    }
    return w;
}

std::string word_string(std::span<const int> w) {
    std::string out;
    bool multi = false;
    for (int a : w)
        if (a > 9) multi = true;
    for (size_t i = 0; i < w.size(); ++i) {
        if (multi && i > 0) out += '.';
        out += std::to_string(w[i]);
    }
    return out;
}

}  // namespace mfshift
