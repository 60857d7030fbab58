#include "gari/decoder.hpp"

#include <numeric>
#include <stdexcept>

namespace gari {
namespace {

// Flattens a BinMatrix into a CheckUnit with column ids shifted into the
// augmented index space.
DecodeContext::CheckUnit flatten(const BinMatrix& m, std::size_t col_offset) {
    DecodeContext::CheckUnit unit;
    unit.row_ptr.reserve(m.num_rows() + 1);
    unit.row_ptr.push_back(0);
    unit.cols.reserve(m.nnz());
    for (std::size_t r = 0; r < m.num_rows(); ++r) {
        for (std::uint32_t c : m.row(r))
            unit.cols.push_back(c + static_cast<std::uint32_t>(col_offset));
        unit.row_ptr.push_back(unit.cols.size());
    }
    return unit;
}

std::vector<std::size_t> bottom_split(const GariModel& gm) {
    return {gm.num_ebar_z(), gm.num_ebar_x()};
}

} // namespace

DecodeContext::DecodeContext(const GariModel& gm) {
    num_aug_cols = gm.num_aug_cols;
    off_ebar_z = gm.off_ebar_z;
    off_ebar_x = gm.off_ebar_x;
    num_ebar_z = gm.num_ebar_z();
    num_ebar_x = gm.num_ebar_x();
    num_observables = gm.num_observables;
    obs_mask_ex = gm.obs_mask_ex;

    const auto split = bottom_split(gm);
    std::vector<std::uint32_t> u_rows(split[0]), v_rows(split[1]);
    std::iota(u_rows.begin(), u_rows.end(), 0u);
    std::iota(v_rows.begin(), v_rows.end(), static_cast<std::uint32_t>(split[0]));
    bottom_u = flatten(gm.bottom.submatrix_by_rows(u_rows), 0);
    bottom_v = flatten(gm.bottom.submatrix_by_rows(v_rows), 0);
    top_x = flatten(gm.top_x, off_ebar_z);
    top_z = flatten(gm.top_z, off_ebar_x);

    prior_llr.reserve(gm.priors_aug.size());
    for (double p : gm.priors_aug) prior_llr.push_back(std::log((1.0 - p) / p));
    weight_llr.reserve(gm.merged_priors_ex.size());
    for (double p : gm.merged_priors_ex) weight_llr.push_back(std::log((1.0 - p) / p));
}

Decoder::Decoder(const DecodeContext& ctx, const DecoderConfig& cfg)
    : ctx_(ctx), cfg_(cfg) {
    if (!(cfg.alpha > 0.0) || cfg.alpha > 1.0)
        throw std::invalid_argument("alpha must lie in (0, 1]");
    if (cfg.max_iters < 1)
        throw std::invalid_argument("max_iters must be at least 1");
    if (!(cfg.magnitude_cap > 0.0))
        throw std::invalid_argument("magnitude_cap must be positive");
    msgs_bottom_u_.resize(ctx.bottom_u.cols.size());
    msgs_bottom_v_.resize(ctx.bottom_v.cols.size());
    msgs_top_x_.resize(ctx.top_x.cols.size());
    msgs_top_z_.resize(ctx.top_z.cols.size());
    perm_x_.resize(ctx.top_x.num_rows());
    perm_z_.resize(ctx.top_z.num_rows());
}

void Decoder::reset(const DecodeInput& input) {
    if (input.s_x.size() != ctx_.top_x.num_rows())
        throw std::invalid_argument("s_X length does not match the X-detector rows");
    if (input.s_z.size() != ctx_.top_z.num_rows())
        throw std::invalid_argument("s_Z length does not match the Z-detector rows");
    s_x_ = input.s_x;
    s_z_ = input.s_z;
    lambda_ = ctx_.prior_llr;
    std::fill(msgs_bottom_u_.begin(), msgs_bottom_u_.end(), 0.0);
    std::fill(msgs_bottom_v_.begin(), msgs_bottom_v_.end(), 0.0);
    std::fill(msgs_top_x_.begin(), msgs_top_x_.end(), 0.0);
    std::fill(msgs_top_z_.begin(), msgs_top_z_.end(), 0.0);
    // Two independent permutation streams so the D_X and D_Z units stay
    // deterministic regardless of how they are scheduled physically.
    rng_x_ = Rng(mix_seed(cfg_.seed, 0));
    rng_z_ = Rng(mix_seed(cfg_.seed, 1));
    iteration_ = 0;
    converged_ = false;
    message_updates_ = 0;
}

void Decoder::run_unit_natural(const DecodeContext::CheckUnit& unit,
                               std::vector<double>& msgs) {
    for (std::size_t r = 0; r < unit.num_rows(); ++r) {
        const auto cols = unit.row(r);
        check_update(cols, {msgs.data() + unit.row_ptr[r], cols.size()}, lambda_,
                     /*syndrome_bit=*/false, cfg_.alpha, cfg_.magnitude_cap);
        message_updates_ += cols.size();
    }
}

void Decoder::run_unit_serial(const DecodeContext::CheckUnit& unit,
                              std::vector<double>& msgs,
                              const std::vector<std::uint8_t>& syndrome,
                              const std::vector<std::uint32_t>& order) {
    for (std::uint32_t r : order) {
        const auto cols = unit.row(r);
        check_update(cols, {msgs.data() + unit.row_ptr[r], cols.size()}, lambda_,
                     syndrome[r] != 0, cfg_.alpha, cfg_.magnitude_cap);
        message_updates_ += cols.size();
    }
}

void Decoder::iterate_bottom_u() { run_unit_natural(ctx_.bottom_u, msgs_bottom_u_); }
void Decoder::iterate_bottom_v() { run_unit_natural(ctx_.bottom_v, msgs_bottom_v_); }

void Decoder::iterate_bottom() {
    iterate_bottom_u();
    iterate_bottom_v();
}

void Decoder::iterate_top() {
    std::iota(perm_x_.begin(), perm_x_.end(), 0u);
    rng_x_.shuffle(perm_x_);
    std::iota(perm_z_.begin(), perm_z_.end(), 0u);
    rng_z_.shuffle(perm_z_);
    run_unit_serial(ctx_.top_x, msgs_top_x_, s_x_, perm_x_);
    run_unit_serial(ctx_.top_z, msgs_top_z_, s_z_, perm_z_);
}

bool Decoder::syndrome_satisfied() const {
    const auto parity_ok = [&](const DecodeContext::CheckUnit& unit,
                               const std::vector<std::uint8_t>& syndrome) {
        for (std::size_t r = 0; r < unit.num_rows(); ++r) {
            unsigned parity = 0;
            for (std::uint32_t c : unit.row(r)) parity ^= lambda_[c] < 0.0 ? 1u : 0u;
            if (parity != syndrome[r]) return false;
        }
        return true;
    };
    if (!parity_ok(ctx_.top_z, s_z_)) return false;
    if (cfg_.check_both_syndromes && !parity_ok(ctx_.top_x, s_x_)) return false;
    return true;
}

bool Decoder::step() {
    if (converged_ || iteration_ >= cfg_.max_iters) return converged_;
    ++iteration_;
    iterate_bottom();
    iterate_top();
    converged_ = syndrome_satisfied();
    return converged_;
}

DecodeOutcome Decoder::outcome() const {
    DecodeOutcome out;
    out.converged = converged_;
    out.iterations = iteration_;
    out.message_updates = message_updates_;
    out.ex_hat.resize(ctx_.num_ebar_x);
    out.predicted_obs = BitMask(ctx_.num_observables);
    for (std::size_t i = 0; i < ctx_.num_ebar_x; ++i) {
        if (lambda_[ctx_.off_ebar_x + i] < 0.0) {
            out.ex_hat[i] = 1;
            out.predicted_obs ^= ctx_.obs_mask_ex[i];
            out.weight += ctx_.weight_llr[i];
        }
    }
    return out;
}

DecodeOutcome Decoder::decode(const DecodeInput& input) {
    reset(input);
    while (!step() && iteration_ < cfg_.max_iters) {
    }
    return outcome();
}

DecodeOutcome decode(const DecodeContext& ctx, const DecodeInput& input,
                     const DecoderConfig& cfg) {
    Decoder dec(ctx, cfg);
    return dec.decode(input);
}

} // namespace gari
