#include "lmsexact/sparse.hpp"

#include <algorithm>

namespace lmsexact {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> raw) {
    std::sort(raw.begin(), raw.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.entries.reserve(raw.size());
    for (const auto& t : raw) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw NumericsError("triplet coordinate outside the matrix");
        if (!m.entries.empty() && m.entries.back().row == t.row &&
            m.entries.back().col == t.col) {
            m.entries.back().value += t.value;
            if (m.entries.back().value == 0.0) m.entries.pop_back();
        } else if (t.value != 0.0) {
            m.entries.push_back(t);
        }
    }
    return m;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    if ((int)x.size() != cols) throw NumericsError("matvec dimension mismatch");
    y.assign(rows, 0.0);
    for (const auto& t : entries) y[t.row] += t.value * x[t.col];
}

void SparseMatrix::check_invariants() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& t = entries[i];
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw NumericsError("entry outside matrix bounds");
        if (t.value == 0.0) throw NumericsError("stored zero entry");
        if (i > 0) {
            const auto& p = entries[i - 1];
            if (p.row > t.row || (p.row == t.row && p.col >= t.col))
                throw NumericsError("entries not strictly sorted by (row, col)");
        }
    }
}

CSRMatrix to_csr(const SparseMatrix& a) {
    if (a.rows != a.cols) throw NumericsError("iteration kernels need a square matrix");
    CSRMatrix m;
    m.n = a.rows;
    m.ptr.assign(m.n + 1, 0);
    for (const auto& t : a.entries) ++m.ptr[t.row + 1];
    for (int i = 0; i < m.n; ++i) m.ptr[i + 1] += m.ptr[i];
    m.col.resize(a.entries.size());
    m.val.resize(a.entries.size());
    std::vector<int> next(m.ptr.begin(), m.ptr.end() - 1);
    for (const auto& t : a.entries) {
        int at = next[t.row]++;
        m.col[at] = t.col;
        m.val[at] = t.value;
    }
    return m;
}

void CSRMatrix::multiply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int p = ptr[i]; p < ptr[i + 1]; ++p) acc += val[p] * x[col[p]];
        y[i] = acc;
    }
}

void CSRMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(n);
    multiply(x.data(), y.data());
}

} // namespace lmsexact
