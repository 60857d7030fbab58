#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gari {

struct MatrixStats {
    std::size_t num_rows = 0;
    std::size_t num_cols = 0;
    std::uint64_t nnz = 0;
    double avg_row_weight = 0.0;
    std::uint64_t num_4cycles = 0;
};

// Sparse binary matrix stored as both row and column adjacency lists,
// kept mutually consistent. Entries are implicit ones; adjacency lists
// are sorted and duplicate-free.
class BinMatrix {
public:
    BinMatrix() = default;
    BinMatrix(std::size_t rows, std::size_t cols);

    // Builds from per-row column lists. Lists may be unsorted; duplicates
    // are rejected. Column adjacency is derived.
    static BinMatrix from_rows(std::size_t rows, std::size_t cols,
                               std::vector<std::vector<std::uint32_t>> row_adj);

    std::size_t num_rows() const { return row_adj_.size(); }
    std::size_t num_cols() const { return col_adj_.size(); }
    std::uint64_t nnz() const { return nnz_; }

    const std::vector<std::uint32_t>& row(std::size_t r) const { return row_adj_[r]; }
    const std::vector<std::uint32_t>& col(std::size_t c) const { return col_adj_[c]; }

    bool at(std::size_t r, std::size_t c) const;

    BinMatrix transposed() const;

    // y = M x over GF(2); x indexed by column, result by row.
    std::vector<std::uint8_t> matvec_mod2(const std::vector<std::uint8_t>& x) const;

    // Number of 4-cycles in the Tanner graph: sum over unordered row
    // pairs of C(overlap, 2). Accumulated column-wise, so the cost is
    // sum over columns of weight^2 rather than a row-pair product.
    std::uint64_t count_4cycles() const;

    MatrixStats stats() const;

    static BinMatrix hstack(const BinMatrix& left, const BinMatrix& right);
    static BinMatrix vstack(const BinMatrix& top, const BinMatrix& bottom);

    // Column/row selection; entries keep the order given in `keep`,
    // which must be duplicate-free.
    BinMatrix submatrix_by_columns(const std::vector<std::uint32_t>& keep) const;
    BinMatrix submatrix_by_rows(const std::vector<std::uint32_t>& keep) const;

    // Identity of a given size.
    static BinMatrix identity(std::size_t n);

    // Text triplet format: header "rows cols nnz", then one "row col"
    // line per entry in (row, col) sorted order.
    void write_triplets(std::ostream& out) const;
    static BinMatrix read_triplets(std::istream& in);

    bool operator==(const BinMatrix& other) const {
        return row_adj_ == other.row_adj_ && col_adj_.size() == other.col_adj_.size();
    }

private:
    std::vector<std::vector<std::uint32_t>> row_adj_;
    std::vector<std::vector<std::uint32_t>> col_adj_;
    std::uint64_t nnz_ = 0;
};

} // namespace gari
