#include "mfshift/partition.hpp"

#include <stdexcept>

namespace mfshift {

IndexDecomposition index_decompose(std::int64_t k, int q) {
    if (k < 1) throw std::invalid_argument("index_decompose: k must be >= 1");
    if (q < 2) throw std::invalid_argument("index_decompose: q must be >= 2");
    IndexDecomposition d{k, 0};
    while (d.generator % q == 0) {
        d.generator /= q;
        ++d.depth;
    }
    return d;
}

std::vector<PartitionCell> partition_cells(std::int64_t n, int q) {
    if (n < 0) throw std::invalid_argument("partition_cells: n must be >= 0");
    if (q < 2) throw std::invalid_argument("partition_cells: q must be >= 2");
    std::vector<PartitionCell> cells;
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i % q == 0) continue;
        PartitionCell c;
        c.generator = i;
        for (std::int64_t pos = i; pos <= n; pos *= q) {
            c.positions.push_back(pos);
            if (pos > n / q) break;  // pos * q would overflow past n anyway
        }
        cells.push_back(std::move(c));
    }
    return cells;
}

std::int64_t cell_length(std::int64_t n, int q, std::int64_t generator) {
    if (generator < 1 || generator > n || generator % q == 0)
        throw std::invalid_argument("cell_length: generator must be in [1,n] and not divisible by q");
    // floor(log_q(n / generator)) + 1 without floating point.
    std::int64_t len = 1;
    std::int64_t pos = generator;
    while (pos <= n / q) {
        pos *= q;
        ++len;
    }
    return len;
}

namespace {
// Count of i <= x with q not dividing i.
std::int64_t coprime_count(std::int64_t x, int q) {
    if (x <= 0) return 0;
    return x - x / q;
}
}  // namespace

std::int64_t count_cells_of_length(std::int64_t n, int q, int k) {
    if (n < 0) throw std::invalid_argument("count_cells_of_length: n must be >= 0");
    if (q < 2) throw std::invalid_argument("count_cells_of_length: q must be >= 2");
    if (k < 1) throw std::invalid_argument("count_cells_of_length: k must be >= 1");
    // #Lambda_i(n) = k iff n/q^k < i <= n/q^(k-1), q not dividing i.
    std::int64_t hi = n;
    for (int t = 0; t < k - 1; ++t) hi /= q;
    std::int64_t lo = hi / q;
    return coprime_count(hi, q) - coprime_count(lo, q);
}

}  // namespace mfshift
