#pragma once

// Shift-space conventions shared by every component: alphabet {0,..,m-1},
// sparsity base q >= 2, window length ell >= 2. Words are stored first
// symbol most significant, so index(a_1..a_k) = sum_t a_t * m^(k-t).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mfshift {

using Word = std::vector<int>;

struct ShiftParams {
    int m = 2;
    int q = 2;
    int ell = 2;

    std::int64_t table_size() const;   // m^ell
    std::int64_t state_count() const;  // m^(ell-1)
};

bool operator==(const ShiftParams&, const ShiftParams&);

// Throws std::invalid_argument unless m >= 2, q >= 2, ell >= 2 and the
// m^ell table is exactly representable and small enough to allocate.
void validate(const ShiftParams& sp);

// m^e with overflow detection; throws std::overflow_error.
std::int64_t checked_pow(std::int64_t m, int e);

bool valid_word(std::span<const int> w, int m);

std::int64_t word_index(std::span<const int> w, int m);
Word word_from_index(std::int64_t index, int length, int m);

std::string word_string(std::span<const int> w);

}  // namespace mfshift
