#pragma once

#include <cstddef>
#include <vector>

#include "lmsexact/errors.hpp"

namespace lmsexact {

struct Triplet {
    int row;
    int col;
    double value;
};

// Minimal triplet-form sparse matrix. Invariants: entries sorted by (row, col),
// no duplicate coordinates, no stored zeros. Assembly merges duplicates.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Triplet> entries;

    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> raw);

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    std::size_t nnz() const { return entries.size(); }
    void check_invariants() const;   // throws NumericsError on violation
};

// Compressed-row form used by the iteration kernels.
struct CSRMatrix {
    int n = 0;
    std::vector<int> ptr;     // size n+1
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const double* x, double* y) const;
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

CSRMatrix to_csr(const SparseMatrix& a);

} // namespace lmsexact
