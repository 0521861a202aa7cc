#pragma once

// Multiplicative partition of {1..n}: each k factors uniquely as i*q^j with
// q not dividing i, so the cells Lambda_i(n) = {i, iq, iq^2, ...} cover
// {1..n} exactly once. Cell sizes follow floor(log_q(n/i)) + 1, computed in
// integer arithmetic only.

#include <cstdint>
#include <vector>

namespace mfshift {

struct IndexDecomposition {
    std::int64_t generator = 0;  // i with q not dividing i
    int depth = 0;               // j in k = i * q^j
};

IndexDecomposition index_decompose(std::int64_t k, int q);

struct PartitionCell {
    std::int64_t generator = 0;
    std::vector<std::int64_t> positions;  // {i, iq, ...} intersected with [1, n]
};

// Cells ordered by ascending generator; positions ascending. Together the
// positions enumerate {1..n} exactly once.
std::vector<PartitionCell> partition_cells(std::int64_t n, int q);

// #Lambda_i(n) for a generator i <= n (q not dividing i).
std::int64_t cell_length(std::int64_t n, int q, std::int64_t generator);

// Number of generators i <= n with #Lambda_i(n) == k. Zero when k exceeds
// the maximal cell length; the counts satisfy sum_k k * N(n,q,k) = n and
// |N(n,q,k)/n - (q-1)^2 / q^(k+1)| <= 4/n.
std::int64_t count_cells_of_length(std::int64_t n, int q, int k);

}  // namespace mfshift
