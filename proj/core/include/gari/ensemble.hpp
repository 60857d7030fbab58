#pragma once

#include <cstdint>
#include <vector>

#include "gari/decoder.hpp"

namespace gari {

struct EnsembleConfig {
    std::uint32_t size = 1;
    std::uint64_t base_seed = 0;
    DecoderConfig decoder; // seed field is overridden per member
};

struct EnsembleOutcome {
    DecodeOutcome outcome;
    std::uint32_t member = 0; // winning member; 0 when none converged
};

inline std::uint64_t ensemble_member_seed(std::uint64_t base_seed, std::uint32_t index) {
    return mix_seed(base_seed, index);
}

// Lockstep-by-iteration ensemble semantics: the result is the outcome of
// the member converging at the earliest iteration, ties broken by lower
// solution weight and then by lower member index; if nobody converges,
// member 0's failed outcome is returned. Implemented by running members
// sequentially with the best stop iteration as a cutoff, which yields
// the identical result to physical lockstep.
EnsembleOutcome ensemble_decode_with_seeds(const DecodeContext& ctx,
                                           const DecodeInput& input,
                                           const DecoderConfig& decoder_cfg,
                                           const std::vector<std::uint64_t>& seeds);

EnsembleOutcome ensemble_decode(const DecodeContext& ctx, const DecodeInput& input,
                                const EnsembleConfig& cfg);

} // namespace gari
