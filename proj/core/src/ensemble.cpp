#include "gari/ensemble.hpp"

#include <optional>
#include <stdexcept>

namespace gari {

EnsembleOutcome ensemble_decode_with_seeds(const DecodeContext& ctx,
                                           const DecodeInput& input,
                                           const DecoderConfig& decoder_cfg,
                                           const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty())
        throw std::invalid_argument("ensemble needs at least one member");

    std::optional<EnsembleOutcome> best;
    DecodeOutcome fallback;
    for (std::uint32_t m = 0; m < seeds.size(); ++m) {
        DecoderConfig cfg = decoder_cfg;
        cfg.seed = seeds[m];
        Decoder dec(ctx, cfg);
        dec.reset(input);

        // A later member can only win by converging no later than the
        // current best stop iteration.
        const std::uint32_t limit =
            best ? best->outcome.iterations : decoder_cfg.max_iters;
        bool conv = false;
        for (std::uint32_t t = 0; t < limit; ++t) {
            if (dec.step()) {
                conv = true;
                break;
            }
        }
        if (m == 0 && !conv) fallback = dec.outcome();
        if (!conv) continue;

        DecodeOutcome out = dec.outcome();
        const bool wins =
            !best || out.iterations < best->outcome.iterations ||
            (out.iterations == best->outcome.iterations && out.weight < best->outcome.weight);
        if (wins) best = EnsembleOutcome{std::move(out), m};
    }
    if (best) return std::move(*best);
    return EnsembleOutcome{std::move(fallback), 0};
}

EnsembleOutcome ensemble_decode(const DecodeContext& ctx, const DecodeInput& input,
                                const EnsembleConfig& cfg) {
    if (cfg.size < 1)
        throw std::invalid_argument("ensemble size must be at least 1");
    std::vector<std::uint64_t> seeds;
    seeds.reserve(cfg.size);
    for (std::uint32_t m = 0; m < cfg.size; ++m)
        seeds.push_back(ensemble_member_seed(cfg.base_seed, m));
    return ensemble_decode_with_seeds(ctx, input, cfg.decoder, seeds);
}

} // namespace gari
