#include "gari/transform.hpp"

#include "gari/rng.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace gari {
namespace {

struct PendingColumn {
    std::vector<std::uint32_t> rows; // d_xyz row indices, sorted
    BitMask mask;
    double prior = 0.0;
};

bool column_order(const PendingColumn& a, const PendingColumn& b) {
    if (a.rows != b.rows) return a.rows < b.rows;
    return a.mask < b.mask;
}

} // namespace

MatrixStats CorrelatedModel::reported_stats() const {
    if (zero_rows.empty()) return d_xyz.stats();
    std::vector<std::uint32_t> keep;
    keep.reserve(d_xyz.num_rows() - zero_rows.size());
    std::size_t skip = 0;
    for (std::uint32_t r = 0; r < d_xyz.num_rows(); ++r) {
        if (skip < zero_rows.size() && zero_rows[skip] == r) {
            ++skip;
            continue;
        }
        keep.push_back(r);
    }
    return d_xyz.submatrix_by_rows(keep).stats();
}

CorrelatedModel build_correlated(const DemModel& model, MemoryBasis basis) {
    if (!model.typing)
        throw std::invalid_argument("model has no detector typing");
    const auto& typing = *model.typing;
    if (typing.type_of.size() != model.num_detectors)
        throw std::invalid_argument("detector typing does not cover the model");

    auto effective_type = [&](std::uint32_t d) {
        DetectorType t = typing.type_of[d];
        if (basis == MemoryBasis::X)
            t = (t == DetectorType::X) ? DetectorType::Z : DetectorType::X;
        return t;
    };

    CorrelatedModel cm;
    cm.memory_basis = basis;
    cm.num_observables = model.num_observables;

    cm.detector_of_row.reserve(model.num_detectors);
    for (std::uint32_t d = 0; d < model.num_detectors; ++d)
        if (effective_type(d) == DetectorType::X) cm.detector_of_row.push_back(d);
    cm.num_x_rows = cm.detector_of_row.size();
    for (std::uint32_t d = 0; d < model.num_detectors; ++d)
        if (effective_type(d) == DetectorType::Z) cm.detector_of_row.push_back(d);
    cm.row_of_detector.resize(model.num_detectors);
    for (std::uint32_t r = 0; r < cm.detector_of_row.size(); ++r)
        cm.row_of_detector[cm.detector_of_row[r]] = r;

    std::vector<PendingColumn> z_cols, x_cols, y_cols;
    for (const auto& m : model.mechanisms) {
        if (m.detectors.empty()) {
            if (m.observables.empty())
                throw std::invalid_argument("mechanism with empty footprint and no observables");
            throw std::invalid_argument(
                "mechanism with empty footprint flips observables; such a fault is "
                "undetectable and the model cannot be decoded");
        }
        PendingColumn col;
        col.prior = m.probability;
        col.mask = BitMask::from_indices(model.num_observables, m.observables);
        col.rows.reserve(m.detectors.size());
        for (std::uint32_t d : m.detectors) {
            if (d >= model.num_detectors)
                throw std::invalid_argument("mechanism references detector D" +
                                            std::to_string(d) + " beyond the model");
            col.rows.push_back(cm.row_of_detector[d]);
        }
        std::sort(col.rows.begin(), col.rows.end());

        const bool has_x = col.rows.front() < cm.num_x_rows;
        const bool has_z = col.rows.back() >= cm.num_x_rows;
        if (has_x && has_z) {
            y_cols.push_back(std::move(col));
        } else if (has_x) {
            if (col.mask.any())
                throw std::invalid_argument(
                    "mechanism seen only by X-type detectors flips observables; "
                    "this is inconsistent with the configured memory basis");
            z_cols.push_back(std::move(col));
        } else {
            x_cols.push_back(std::move(col));
        }
    }
    std::sort(z_cols.begin(), z_cols.end(), column_order);
    std::sort(x_cols.begin(), x_cols.end(), column_order);
    std::sort(y_cols.begin(), y_cols.end(), column_order);

    cm.num_z_cols = z_cols.size();
    cm.num_x_cols = x_cols.size();
    cm.num_y_cols = y_cols.size();

    const std::size_t num_rows = model.num_detectors;
    const std::size_t num_cols = z_cols.size() + x_cols.size() + y_cols.size();
    std::vector<std::vector<std::uint32_t>> row_adj(num_rows);
    cm.priors.reserve(num_cols);
    cm.obs_mask.reserve(num_cols);
    std::uint32_t col_index = 0;
    for (auto* group : {&z_cols, &x_cols, &y_cols}) {
        for (auto& col : *group) {
            for (std::uint32_t r : col.rows) row_adj[r].push_back(col_index);
            cm.priors.push_back(col.prior);
            cm.obs_mask.push_back(std::move(col.mask));
            ++col_index;
        }
    }
    for (std::uint32_t r = 0; r < num_rows; ++r)
        if (row_adj[r].empty()) cm.zero_rows.push_back(r);
    cm.d_xyz = BinMatrix::from_rows(num_rows, num_cols, std::move(row_adj));
    return cm;
}

SingleTypeModels extract_single_type(const CorrelatedModel& cm) {
    SingleTypeModels st;
    const std::size_t nx = cm.num_x_rows;
    const std::size_t nz = cm.num_z_rows();

    std::vector<std::vector<std::uint32_t>> dx_rows(nx), dz_rows(nz);
    st.keys_x.reserve(cm.num_z_cols);
    for (std::uint32_t c = 0; c < cm.num_z_cols; ++c) {
        const auto& rows = cm.d_xyz.col(c);
        for (std::uint32_t r : rows) dx_rows[r].push_back(c);
        st.keys_x.push_back(SingleTypeKey{rows, cm.obs_mask[c]});
    }
    st.keys_z.reserve(cm.num_x_cols);
    for (std::uint32_t j = 0; j < cm.num_x_cols; ++j) {
        const std::uint32_t c = static_cast<std::uint32_t>(cm.num_z_cols) + j;
        SingleTypeKey key;
        key.mask = cm.obs_mask[c];
        for (std::uint32_t r : cm.d_xyz.col(c)) {
            const std::uint32_t local = r - static_cast<std::uint32_t>(nx);
            dz_rows[local].push_back(j);
            key.footprint.push_back(local);
        }
        st.keys_z.push_back(std::move(key));
    }
    st.d_x = BinMatrix::from_rows(nx, cm.num_z_cols, std::move(dx_rows));
    st.d_z = BinMatrix::from_rows(nz, cm.num_x_cols, std::move(dz_rows));
    return st;
}

UvMatrices build_uv(const CorrelatedModel& cm, SingleTypeModels& st) {
    using Footprint = std::vector<std::uint32_t>;
    std::map<Footprint, std::uint32_t> x_index;
    std::map<std::pair<Footprint, BitMask>, std::uint32_t> z_index;
    for (std::uint32_t i = 0; i < st.keys_x.size(); ++i)
        if (!x_index.emplace(st.keys_x[i].footprint, i).second)
            throw std::runtime_error(
                "repeated column in the X-side single-type matrix (column " +
                std::to_string(i) + "); the model is malformed");
    for (std::uint32_t i = 0; i < st.keys_z.size(); ++i)
        if (!z_index.emplace(std::pair{st.keys_z[i].footprint, st.keys_z[i].mask}, i).second)
            throw std::runtime_error(
                "repeated column in the Z-side single-type matrix (column " +
                std::to_string(i) + "); the model is malformed");

    const std::size_t original_x = st.keys_x.size();
    const std::size_t original_z = st.keys_z.size();
    const std::size_t nx = cm.num_x_rows;
    const std::size_t y_base = cm.num_z_cols + cm.num_x_cols;

    UvMatrices uv;
    std::vector<Footprint> fresh_x_cols, fresh_z_cols;
    std::vector<std::uint32_t> u_row_of(cm.num_y_cols), v_row_of(cm.num_y_cols);

    for (std::uint32_t j = 0; j < cm.num_y_cols; ++j) {
        const std::uint32_t c = static_cast<std::uint32_t>(y_base) + j;
        Footprint x_part, z_part;
        for (std::uint32_t r : cm.d_xyz.col(c)) {
            if (r < nx) x_part.push_back(r);
            else z_part.push_back(r - static_cast<std::uint32_t>(nx));
        }

        auto xit = x_index.find(x_part);
        std::uint32_t xi;
        if (xit != x_index.end()) {
            xi = xit->second;
        } else {
            xi = static_cast<std::uint32_t>(st.keys_x.size());
            x_index.emplace(x_part, xi);
            st.keys_x.push_back(SingleTypeKey{x_part, cm.obs_mask[c]});
            fresh_x_cols.push_back(std::move(x_part));
        }
        if (xi >= original_x) ++uv.unmatched_y;
        u_row_of[j] = xi;

        auto zkey = std::pair{std::move(z_part), cm.obs_mask[c]};
        auto zit = z_index.find(zkey);
        std::uint32_t zi;
        if (zit != z_index.end()) {
            zi = zit->second;
        } else {
            zi = static_cast<std::uint32_t>(st.keys_z.size());
            st.keys_z.push_back(SingleTypeKey{zkey.first, zkey.second});
            fresh_z_cols.push_back(zkey.first);
            z_index.emplace(std::move(zkey), zi);
        }
        if (zi >= original_z) ++uv.unmatched_y;
        v_row_of[j] = zi;
    }

    st.fresh_x = fresh_x_cols.size();
    st.fresh_z = fresh_z_cols.size();
    if (st.fresh_x) {
        std::vector<std::vector<std::uint32_t>> rows(nx);
        for (std::uint32_t k = 0; k < fresh_x_cols.size(); ++k)
            for (std::uint32_t r : fresh_x_cols[k]) rows[r].push_back(k);
        st.d_x = BinMatrix::hstack(
            st.d_x, BinMatrix::from_rows(nx, fresh_x_cols.size(), std::move(rows)));
    }
    if (st.fresh_z) {
        std::vector<std::vector<std::uint32_t>> rows(cm.num_z_rows());
        for (std::uint32_t k = 0; k < fresh_z_cols.size(); ++k)
            for (std::uint32_t r : fresh_z_cols[k]) rows[r].push_back(k);
        st.d_z = BinMatrix::hstack(
            st.d_z, BinMatrix::from_rows(cm.num_z_rows(), fresh_z_cols.size(), std::move(rows)));
    }

    std::vector<std::vector<std::uint32_t>> u_rows(st.d_x.num_cols()),
        v_rows(st.d_z.num_cols());
    for (std::uint32_t j = 0; j < cm.num_y_cols; ++j) {
        u_rows[u_row_of[j]].push_back(j);
        v_rows[v_row_of[j]].push_back(j);
    }
    uv.u = BinMatrix::from_rows(st.d_x.num_cols(), cm.num_y_cols, std::move(u_rows));
    uv.v = BinMatrix::from_rows(st.d_z.num_cols(), cm.num_y_cols, std::move(v_rows));
    return uv;
}

GariModel assemble_gari(const CorrelatedModel& cm, const SingleTypeModels& st,
                        const UvMatrices& uv) {
    GariModel gm;
    gm.top_x = st.d_x;
    gm.top_z = st.d_z;
    gm.u = uv.u;
    gm.v = uv.v;
    gm.num_observables = cm.num_observables;
    gm.memory_basis = cm.memory_basis;

    const std::size_t n_ez = cm.num_z_cols;
    const std::size_t n_ex = cm.num_x_cols;
    const std::size_t n_ey = cm.num_y_cols;
    const std::size_t n_ebz = st.d_x.num_cols();
    const std::size_t n_ebx = st.d_z.num_cols();

    gm.off_e_z = 0;
    gm.off_e_x = n_ez;
    gm.off_e_y = n_ez + n_ex;
    gm.off_ebar_z = n_ez + n_ex + n_ey;
    gm.off_ebar_x = gm.off_ebar_z + n_ebz;
    gm.num_aug_cols = gm.off_ebar_x + n_ebx;

    std::vector<std::vector<std::uint32_t>> bottom_rows(n_ebz + n_ebx);
    for (std::uint32_t i = 0; i < n_ebz; ++i) {
        auto& row = bottom_rows[i];
        if (i < n_ez) row.push_back(static_cast<std::uint32_t>(gm.off_e_z) + i);
        for (std::uint32_t j : gm.u.row(i))
            row.push_back(static_cast<std::uint32_t>(gm.off_e_y) + j);
        row.push_back(static_cast<std::uint32_t>(gm.off_ebar_z) + i);
    }
    for (std::uint32_t i = 0; i < n_ebx; ++i) {
        auto& row = bottom_rows[n_ebz + i];
        if (i < n_ex) row.push_back(static_cast<std::uint32_t>(gm.off_e_x) + i);
        for (std::uint32_t j : gm.v.row(i))
            row.push_back(static_cast<std::uint32_t>(gm.off_e_y) + j);
        row.push_back(static_cast<std::uint32_t>(gm.off_ebar_x) + i);
    }
    gm.bottom = BinMatrix::from_rows(n_ebz + n_ebx, gm.num_aug_cols,
                                     std::move(bottom_rows));

    gm.priors_aug = cm.priors;
    gm.priors_aug.resize(gm.num_aug_cols, 0.5);

    gm.merged_priors_ex.resize(n_ebx);
    gm.obs_mask_ex.reserve(n_ebx);
    for (std::uint32_t i = 0; i < n_ebx; ++i) {
        double p = i < n_ex ? cm.priors[n_ez + i] : 0.0;
        for (std::uint32_t j : gm.v.row(i))
            p = xor_probability(p, cm.priors[gm.off_e_y + j]);
        gm.merged_priors_ex[i] = p;
        gm.obs_mask_ex.push_back(st.keys_z[i].mask);
    }
    return gm;
}

GariModel gari_from_dem(const DemModel& model, MemoryBasis basis) {
    CorrelatedModel cm = build_correlated(model, basis);
    SingleTypeModels st = extract_single_type(cm);
    UvMatrices uv = build_uv(cm, st);
    return assemble_gari(cm, st, uv);
}

EquivalenceReport verify_equivalence(const CorrelatedModel& cm, const GariModel& gm,
                                     std::size_t trials, std::uint64_t seed) {
    Rng rng(seed);
    EquivalenceReport report;
    report.trials = trials;

    const std::size_t n = cm.d_xyz.num_cols();
    const std::size_t n_ez = cm.num_z_cols;
    const std::size_t n_ex = cm.num_x_cols;
    const std::size_t n_ey = cm.num_y_cols;

    std::vector<std::uint8_t> e(n), e_y(n_ey);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < n; ++i) e[i] = rng.next() & 1;
        for (std::size_t j = 0; j < n_ey; ++j) e_y[j] = e[gm.off_e_y + j];

        std::vector<std::uint8_t> ebz = gm.u.matvec_mod2(e_y);
        for (std::size_t i = 0; i < n_ez; ++i) ebz[i] ^= e[gm.off_e_z + i];
        std::vector<std::uint8_t> ebx = gm.v.matvec_mod2(e_y);
        for (std::size_t i = 0; i < n_ex; ++i) ebx[i] ^= e[gm.off_e_x + i];

        std::vector<std::uint8_t> aug(gm.num_aug_cols, 0);
        std::copy(e.begin(), e.end(), aug.begin());
        std::copy(ebz.begin(), ebz.end(), aug.begin() + gm.off_ebar_z);
        std::copy(ebx.begin(), ebx.end(), aug.begin() + gm.off_ebar_x);

        bool good = true;
        for (std::uint8_t bit : gm.bottom.matvec_mod2(aug))
            if (bit) { good = false; break; }

        if (good) {
            const auto s = cm.d_xyz.matvec_mod2(e);
            const auto sx = gm.top_x.matvec_mod2(ebz);
            for (std::size_t r = 0; r < cm.num_x_rows; ++r)
                if (sx[r] != s[r]) { good = false; break; }
            if (good) {
                const auto sz = gm.top_z.matvec_mod2(ebx);
                for (std::size_t r = 0; r < cm.num_z_rows(); ++r)
                    if (sz[r] != s[cm.num_x_rows + r]) { good = false; break; }
            }
        }
        if (!good) ++report.failures;
    }
    return report;
}

} // namespace gari
