#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gari/decoder.hpp"
#include "gari/ensemble.hpp"
#include "gari/rng.hpp"
#include "gari/transform.hpp"

namespace gari {

enum class ReportFormat : std::uint8_t { Json, Csv };

struct ExperimentConfig {
    std::uint64_t shots = 1;
    std::uint32_t rounds = 1; // syndrome-measurement rounds behind one shot
    std::optional<double> physical_p_label; // metadata only
    std::uint64_t seed = 0;
    EnsembleConfig ensemble; // size 1 = plain single decoder
    std::uint32_t workers = 0; // 0: GARI_WORKERS env, then hardware count
    std::optional<double> per_iter_ns;
    std::optional<double> budget_ns_per_round;
    ReportFormat format = ReportFormat::Json;
};

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool low_confidence = false; // fewer than 100 failures observed
};

struct LatencyProjection {
    double per_iter_ns = 0.0;
    double per_round_avg_ns = 0.0;
    std::optional<double> budget_ns_per_round;
    std::optional<std::uint64_t> budget_iters;
    std::optional<double> fraction_within_budget;
};

struct ExperimentReport {
    std::uint64_t shots = 0;
    std::uint64_t failures = 0;
    std::uint64_t non_convergences = 0;
    std::uint64_t mis_corrections = 0;
    double ler = 0.0;
    double ler_per_round = 0.0; // NaN when ler > 0.5 (out of formula domain)
    ConfidenceInterval ci99;
    // CI endpoints mapped through the per-round formula; NaN where the
    // endpoint exceeds 0.5.
    ConfidenceInterval ci99_per_round;
    std::map<std::uint32_t, std::uint64_t> iteration_histogram;
    double avg_iterations = 0.0;
    // Winning member index over converged shots (all zero for size-1).
    std::map<std::uint32_t, std::uint64_t> member_histogram;
    std::optional<LatencyProjection> latency;
    // Echoed configuration, so a report is self-describing.
    std::uint32_t rounds = 1;
    std::optional<double> physical_p_label;
    std::uint64_t seed = 0;
    std::uint32_t ensemble_size = 1;
    double alpha = 0.0;
    std::uint32_t max_iters = 0;
};

struct Shot {
    std::vector<std::uint8_t> error; // over D_XYZ columns
    std::vector<std::uint8_t> s_x;
    std::vector<std::uint8_t> s_z;
    BitMask true_obs;
};

// Domain-separation salts for the per-shot sampling and decoding streams.
inline constexpr std::uint64_t kSampleStream = 0x53414d504c45ull; // "SAMPLE"
inline constexpr std::uint64_t kDecodeStream = 0x4445434f4445ull; // "DECODE"

// Each column fires independently with its prior; exactly one RNG draw
// per column, so the stream layout is schedule-independent.
Shot sample_shot(const CorrelatedModel& cm, Rng& rng);

ExperimentReport run_experiment(const DecodeContext& ctx, const CorrelatedModel& cm,
                                const ExperimentConfig& cfg);

// Per-round logical error rate: inverse of composing a per-round rate
// over `rounds` independent rounds. Domain: ler in [0, 0.5].
double ler_per_round(double ler, std::uint32_t rounds);

// Forward composition (1 - (1 - 2p)^rounds) / 2; inverse of the above.
double compose_rounds(double per_round, std::uint32_t rounds);

// Wilson score interval at 99% (z = 2.5758).
ConfidenceInterval ci99(std::uint64_t failures, std::uint64_t shots);

LatencyProjection latency_projection(double avg_iters, double per_iter_ns,
                                     std::uint32_t rounds,
                                     const std::map<std::uint32_t, std::uint64_t>& hist,
                                     std::optional<double> budget_ns_per_round);

} // namespace gari
