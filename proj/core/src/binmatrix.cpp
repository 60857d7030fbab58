#include "gari/binmatrix.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gari {

BinMatrix::BinMatrix(std::size_t rows, std::size_t cols)
    : row_adj_(rows), col_adj_(cols) {}

BinMatrix BinMatrix::from_rows(std::size_t rows, std::size_t cols,
                               std::vector<std::vector<std::uint32_t>> row_adj) {
    if (row_adj.size() != rows)
        throw std::invalid_argument("row adjacency size does not match row count");
    BinMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        auto& entries = row_adj[r];
        std::sort(entries.begin(), entries.end());
        if (std::adjacent_find(entries.begin(), entries.end()) != entries.end())
            throw std::invalid_argument("duplicate column in row " + std::to_string(r));
        if (!entries.empty() && entries.back() >= cols)
            throw std::invalid_argument("column index out of range in row " + std::to_string(r));
        for (std::uint32_t c : entries)
            m.col_adj_[c].push_back(static_cast<std::uint32_t>(r));
        m.nnz_ += entries.size();
        m.row_adj_[r] = std::move(entries);
    }
    // Rows were visited in order, so column lists are already sorted.
    return m;
}

bool BinMatrix::at(std::size_t r, std::size_t c) const {
    const auto& entries = row_adj_.at(r);
    return std::binary_search(entries.begin(), entries.end(),
                              static_cast<std::uint32_t>(c));
}

BinMatrix BinMatrix::transposed() const {
    BinMatrix t(num_cols(), num_rows());
    t.row_adj_ = col_adj_;
    t.col_adj_ = row_adj_;
    t.nnz_ = nnz_;
    return t;
}

std::vector<std::uint8_t> BinMatrix::matvec_mod2(const std::vector<std::uint8_t>& x) const {
    if (x.size() != num_cols())
        throw std::invalid_argument("matvec operand length does not match column count");
    std::vector<std::uint8_t> y(num_rows(), 0);
    for (std::size_t r = 0; r < row_adj_.size(); ++r) {
        std::uint8_t parity = 0;
        for (std::uint32_t c : row_adj_[r]) parity ^= (x[c] & 1);
        y[r] = parity;
    }
    return y;
}

std::uint64_t BinMatrix::count_4cycles() const {
    // overlap[r1 * num_rows + r2] = number of columns shared by rows r1 < r2.
    std::unordered_map<std::uint64_t, std::uint32_t> overlap;
    overlap.reserve(nnz_);
    const std::uint64_t stride = num_rows();
    for (const auto& rows : col_adj_) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = i + 1; j < rows.size(); ++j)
                ++overlap[rows[i] * stride + rows[j]];
    }
    std::uint64_t cycles = 0;
    for (const auto& [key, n] : overlap)
        cycles += static_cast<std::uint64_t>(n) * (n - 1) / 2;
    return cycles;
}

MatrixStats BinMatrix::stats() const {
    MatrixStats s;
    s.num_rows = num_rows();
    s.num_cols = num_cols();
    s.nnz = nnz_;
    s.avg_row_weight = s.num_rows ? static_cast<double>(nnz_) / static_cast<double>(s.num_rows) : 0.0;
    s.num_4cycles = count_4cycles();
    return s;
}

BinMatrix BinMatrix::hstack(const BinMatrix& left, const BinMatrix& right) {
    if (left.num_rows() != right.num_rows())
        throw std::invalid_argument("hstack row count mismatch");
    BinMatrix m(left.num_rows(), left.num_cols() + right.num_cols());
    const std::uint32_t shift = static_cast<std::uint32_t>(left.num_cols());
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        auto& entries = m.row_adj_[r];
        entries = left.row_adj_[r];
        for (std::uint32_t c : right.row_adj_[r]) entries.push_back(c + shift);
    }
    for (std::size_t c = 0; c < left.num_cols(); ++c)
        m.col_adj_[c] = left.col_adj_[c];
    for (std::size_t c = 0; c < right.num_cols(); ++c)
        m.col_adj_[c + shift] = right.col_adj_[c];
    m.nnz_ = left.nnz_ + right.nnz_;
    return m;
}

BinMatrix BinMatrix::vstack(const BinMatrix& top, const BinMatrix& bottom) {
    if (top.num_cols() != bottom.num_cols())
        throw std::invalid_argument("vstack column count mismatch");
    BinMatrix m(top.num_rows() + bottom.num_rows(), top.num_cols());
    const std::uint32_t shift = static_cast<std::uint32_t>(top.num_rows());
    for (std::size_t r = 0; r < top.num_rows(); ++r)
        m.row_adj_[r] = top.row_adj_[r];
    for (std::size_t r = 0; r < bottom.num_rows(); ++r)
        m.row_adj_[r + shift] = bottom.row_adj_[r];
    for (std::size_t c = 0; c < m.num_cols(); ++c) {
        auto& entries = m.col_adj_[c];
        entries = top.col_adj_[c];
        for (std::uint32_t r : bottom.col_adj_[c]) entries.push_back(r + shift);
    }
    m.nnz_ = top.nnz_ + bottom.nnz_;
    return m;
}

BinMatrix BinMatrix::submatrix_by_columns(const std::vector<std::uint32_t>& keep) const {
    BinMatrix m(num_rows(), keep.size());
    for (std::size_t newc = 0; newc < keep.size(); ++newc) {
        const std::uint32_t oldc = keep[newc];
        if (oldc >= num_cols())
            throw std::invalid_argument("column selection out of range");
        m.col_adj_[newc] = col_adj_[oldc];
        for (std::uint32_t r : col_adj_[oldc])
            m.row_adj_[r].push_back(static_cast<std::uint32_t>(newc));
        m.nnz_ += col_adj_[oldc].size();
    }
    // Row entries may be out of order when `keep` permutes columns.
    for (auto& entries : m.row_adj_) std::sort(entries.begin(), entries.end());
    return m;
}

BinMatrix BinMatrix::submatrix_by_rows(const std::vector<std::uint32_t>& keep) const {
    BinMatrix m(keep.size(), num_cols());
    for (std::size_t newr = 0; newr < keep.size(); ++newr) {
        const std::uint32_t oldr = keep[newr];
        if (oldr >= num_rows())
            throw std::invalid_argument("row selection out of range");
        m.row_adj_[newr] = row_adj_[oldr];
        for (std::uint32_t c : row_adj_[oldr])
            m.col_adj_[c].push_back(static_cast<std::uint32_t>(newr));
        m.nnz_ += row_adj_[oldr].size();
    }
    for (auto& entries : m.col_adj_) std::sort(entries.begin(), entries.end());
    return m;
}

BinMatrix BinMatrix::identity(std::size_t n) {
    BinMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_adj_[i] = {static_cast<std::uint32_t>(i)};
        m.col_adj_[i] = {static_cast<std::uint32_t>(i)};
    }
    m.nnz_ = n;
    return m;
}

void BinMatrix::write_triplets(std::ostream& out) const {
    out << num_rows() << ' ' << num_cols() << ' ' << nnz_ << '\n';
    for (std::size_t r = 0; r < row_adj_.size(); ++r)
        for (std::uint32_t c : row_adj_[r])
            out << r << ' ' << c << '\n';
}

BinMatrix BinMatrix::read_triplets(std::istream& in) {
    std::size_t rows = 0, cols = 0;
    std::uint64_t count = 0;
    if (!(in >> rows >> cols >> count))
        throw std::runtime_error("triplet header is malformed");
    std::vector<std::vector<std::uint32_t>> row_adj(rows);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t r = 0, c = 0;
        if (!(in >> r >> c))
            throw std::runtime_error("triplet entry " + std::to_string(i) + " is malformed");
        if (r >= rows || c >= cols)
            throw std::runtime_error("triplet entry " + std::to_string(i) + " out of range");
        row_adj[r].push_back(static_cast<std::uint32_t>(c));
    }
    return from_rows(rows, cols, std::move(row_adj));
}

} // namespace gari
