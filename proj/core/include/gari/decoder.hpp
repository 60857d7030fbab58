#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gari/bitmask.hpp"
#include "gari/rng.hpp"
#include "gari/transform.hpp"

namespace gari {

struct DecoderConfig {
    double alpha = 0.96875; // 1 - 2^-5; 0.9921875 (1 - 2^-7) also sensible
    std::uint32_t max_iters = 400;
    std::uint64_t seed = 0;
    double magnitude_cap = 1e6;
    // Early-stop on both syndromes instead of the memory-side one only.
    bool check_both_syndromes = false;
};

struct DecodeInput {
    std::vector<std::uint8_t> s_x;
    std::vector<std::uint8_t> s_z;
};

struct DecodeOutcome {
    bool converged = false;
    std::uint32_t iterations = 0;
    std::vector<std::uint8_t> ex_hat; // hard decisions over ebar_X columns
    BitMask predicted_obs;
    double weight = 0.0; // sum of ln((1-p)/p) over set bits, merged priors
    std::uint64_t message_updates = 0;
};

// Normalized min-sum update of one check row. msgs holds this row's
// check-to-error messages (one per incidence). Degenerate-case rules:
// sign(0) = +1, the extrinsic min over an empty set is magnitude_cap,
// and both messages and posteriors saturate at +/- magnitude_cap.
inline void check_update(std::span<const std::uint32_t> cols, std::span<double> msgs,
                         std::span<double> lambda, bool syndrome_bit, double alpha,
                         double magnitude_cap) {
    const std::size_t deg = cols.size();
    double min1 = std::numeric_limits<double>::infinity();
    double min2 = min1;
    std::size_t arg1 = static_cast<std::size_t>(-1);
    unsigned neg = syndrome_bit ? 1u : 0u;
    for (std::size_t i = 0; i < deg; ++i) {
        const double eta = lambda[cols[i]] - msgs[i];
        neg += eta < 0.0;
        const double mag = std::fabs(eta);
        if (mag < min1) {
            min2 = min1;
            min1 = mag;
            arg1 = i;
        } else if (mag < min2) {
            min2 = mag;
        }
    }
    for (std::size_t i = 0; i < deg; ++i) {
        const double eta = lambda[cols[i]] - msgs[i];
        double mag = (i == arg1) ? min2 : min1;
        if (std::isinf(mag)) mag = magnitude_cap;
        const bool flip = ((neg - (eta < 0.0 ? 1u : 0u)) & 1u) != 0;
        const double m =
            std::clamp(alpha * (flip ? -mag : mag), -magnitude_cap, magnitude_cap);
        lambda[cols[i]] = std::clamp(eta + m, -magnitude_cap, magnitude_cap);
        msgs[i] = m;
    }
}

// Read-only decode-time view of a GariModel: flattened check rows with
// augmented column ids, prior LLRs, and the scoring tables. Built once
// per model and shared by any number of decoder instances.
class DecodeContext {
public:
    struct CheckUnit {
        std::vector<std::size_t> row_ptr; // size num_rows()+1
        std::vector<std::uint32_t> cols;  // augmented column ids
        std::size_t num_rows() const { return row_ptr.size() - 1; }
        std::span<const std::uint32_t> row(std::size_t r) const {
            return {cols.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
        }
    };

    explicit DecodeContext(const GariModel& gm);

    CheckUnit bottom_u; // one row per ebar_Z column, zero syndrome
    CheckUnit bottom_v; // one row per ebar_X column, zero syndrome
    CheckUnit top_x;    // X-type detector rows, syndrome s_X
    CheckUnit top_z;    // Z-type detector rows, syndrome s_Z

    std::size_t num_aug_cols = 0;
    std::size_t off_ebar_z = 0;
    std::size_t off_ebar_x = 0;
    std::size_t num_ebar_z = 0;
    std::size_t num_ebar_x = 0;

    std::vector<double> prior_llr;  // per augmented column, ln((1-p)/p)
    std::vector<double> weight_llr; // per ebar_X column, merged priors
    std::vector<BitMask> obs_mask_ex;
    std::size_t num_observables = 0;
};

// One message-passing instance. Single-threaded; many instances may share
// a DecodeContext. Exposes iteration phases separately so schedules and
// their algebraic properties can be exercised directly.
class Decoder {
public:
    Decoder(const DecodeContext& ctx, const DecoderConfig& cfg);

    void reset(const DecodeInput& input);
    void iterate_bottom_u();
    void iterate_bottom_v();
    void iterate_bottom(); // U layer, then V layer
    void iterate_top();    // fresh row permutations, then serial updates
    // One full iteration (bottom, top, convergence test). Latches and
    // returns the convergence flag; a no-op once converged or capped.
    bool step();
    DecodeOutcome outcome() const;
    DecodeOutcome decode(const DecodeInput& input);

    bool converged() const { return converged_; }
    std::uint32_t iteration() const { return iteration_; }
    std::uint64_t message_updates() const { return message_updates_; }
    const std::vector<double>& lambda() const { return lambda_; }
    std::span<const double> messages_bottom_u() const { return msgs_bottom_u_; }
    std::span<const double> messages_bottom_v() const { return msgs_bottom_v_; }
    // Non-latching convergence predicate on the current hard decisions.
    bool syndrome_satisfied() const;

private:
    void run_unit_serial(const DecodeContext::CheckUnit& unit, std::vector<double>& msgs,
                         const std::vector<std::uint8_t>& syndrome,
                         const std::vector<std::uint32_t>& order);
    void run_unit_natural(const DecodeContext::CheckUnit& unit, std::vector<double>& msgs);

    const DecodeContext& ctx_;
    DecoderConfig cfg_;
    std::vector<double> lambda_;
    std::vector<double> msgs_bottom_u_, msgs_bottom_v_, msgs_top_x_, msgs_top_z_;
    std::vector<std::uint8_t> s_x_, s_z_;
    std::vector<std::uint32_t> perm_x_, perm_z_;
    Rng rng_x_{0}, rng_z_{0};
    std::uint32_t iteration_ = 0;
    bool converged_ = false;
    std::uint64_t message_updates_ = 0;
};

DecodeOutcome decode(const DecodeContext& ctx, const DecodeInput& input,
                     const DecoderConfig& cfg);

} // namespace gari
