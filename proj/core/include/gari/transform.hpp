#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gari/binmatrix.hpp"
#include "gari/bitmask.hpp"
#include "gari/dem.hpp"

namespace gari {

enum class MemoryBasis : std::uint8_t { Z, X };

// Which variable block an error column belongs to, by detector footprint:
// Z-block columns touch only X-type detector rows, X-block columns only
// Z-type rows, Y-block columns both.
enum class ColumnBlock : std::uint8_t { Z, X, Y };

// D_XYZ with rows grouped X-type detectors first, columns grouped
// [Z-block | X-block | Y-block] and sorted inside each block.
//
// In X-memory the detector type labels are swapped on input, so the
// Z-memory code path applies verbatim; all fields below are named for
// the Z-memory convention and describe the swapped model.
struct CorrelatedModel {
    BinMatrix d_xyz;
    std::size_t num_x_rows = 0; // rows [0, num_x_rows) are X-type
    std::size_t num_z_cols = 0; // columns [0, num_z_cols) are the Z-block
    std::size_t num_x_cols = 0; // then the X-block
    std::size_t num_y_cols = 0; // then the Y-block
    std::vector<double> priors;
    std::vector<BitMask> obs_mask;
    std::vector<std::uint32_t> detector_of_row;
    std::vector<std::uint32_t> row_of_detector;
    std::vector<std::uint32_t> zero_rows; // rows no mechanism touches
    MemoryBasis memory_basis = MemoryBasis::Z;
    std::size_t num_observables = 0;

    std::size_t num_z_rows() const { return d_xyz.num_rows() - num_x_rows; }

    ColumnBlock block_of(std::size_t col) const {
        if (col < num_z_cols) return ColumnBlock::Z;
        if (col < num_z_cols + num_x_cols) return ColumnBlock::X;
        return ColumnBlock::Y;
    }

    // Stats with all-zero detector rows excluded, as reported externally.
    MatrixStats reported_stats() const;
};

// Column matching key for the single-type matrices. The mask takes part
// in matching only on the memory side (X-block side in Z-memory).
struct SingleTypeKey {
    std::vector<std::uint32_t> footprint; // local row indices, sorted
    BitMask mask;

    bool operator==(const SingleTypeKey&) const = default;
};

struct SingleTypeModels {
    BinMatrix d_x; // all X-type rows x Z-block columns (+ any fresh)
    BinMatrix d_z; // all Z-type rows x X-block columns (+ any fresh)
    std::vector<SingleTypeKey> keys_x; // per d_x column
    std::vector<SingleTypeKey> keys_z; // per d_z column
    std::size_t fresh_x = 0; // columns appended by build_uv fallback
    std::size_t fresh_z = 0;
};

struct UvMatrices {
    BinMatrix u; // cols(d_x) x Y-block columns, column weight 1
    BinMatrix v; // cols(d_z) x Y-block columns, column weight 1
    std::size_t unmatched_y = 0; // Y columns resolved via fresh columns
};

// Augmented model. Column layout: (e_Z, e_X, e_Y, ebar_Z, ebar_X).
struct GariModel {
    BinMatrix top_x; // X-type rows x ebar_Z columns
    BinMatrix top_z; // Z-type rows x ebar_X columns
    BinMatrix u;
    BinMatrix v;
    BinMatrix bottom; // (cols(d_x) + cols(d_z)) rows x full augmented width

    std::size_t off_e_z = 0;
    std::size_t off_e_x = 0;
    std::size_t off_e_y = 0;
    std::size_t off_ebar_z = 0;
    std::size_t off_ebar_x = 0;
    std::size_t num_aug_cols = 0;

    std::vector<double> priors_aug;       // per augmented column; 0.5 on ebar
    std::vector<double> merged_priors_ex; // per ebar_X column
    std::vector<BitMask> obs_mask_ex;     // per ebar_X column
    std::size_t num_observables = 0;
    MemoryBasis memory_basis = MemoryBasis::Z;

    std::size_t num_ebar_z() const { return off_ebar_x - off_ebar_z; }
    std::size_t num_ebar_x() const { return num_aug_cols - off_ebar_x; }
};

// Requires model.typing. In X-memory the type labels are flipped before
// anything else happens.
CorrelatedModel build_correlated(const DemModel& model,
                                 MemoryBasis basis = MemoryBasis::Z);

SingleTypeModels extract_single_type(const CorrelatedModel& cm);

// Matches each Y-block column against the single-type columns by key.
// Unmatched restrictions append fresh columns to st (counted in
// st.fresh_x / st.fresh_z and in the returned unmatched_y).
UvMatrices build_uv(const CorrelatedModel& cm, SingleTypeModels& st);

GariModel assemble_gari(const CorrelatedModel& cm, const SingleTypeModels& st,
                        const UvMatrices& uv);

// Full pipeline for callers that do not need the intermediates.
GariModel gari_from_dem(const DemModel& model, MemoryBasis basis = MemoryBasis::Z);

struct EquivalenceReport {
    std::size_t trials = 0;
    std::size_t failures = 0;
    bool ok() const { return failures == 0; }
};

// Draws random assignments (e_Z, e_X, e_Y), applies the variable change,
// and checks that every bottom row is satisfied with zero syndrome and
// that the top rows reproduce the syndromes of the original matrix.
EquivalenceReport verify_equivalence(const CorrelatedModel& cm, const GariModel& gm,
                                     std::size_t trials, std::uint64_t seed);

} // namespace gari
