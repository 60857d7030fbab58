#include "gari/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace gari {
namespace {

constexpr double kZ99 = 2.5758;

std::uint32_t resolve_workers(std::uint32_t configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("GARI_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<std::uint32_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

std::optional<double> try_per_round(double value, std::uint32_t rounds) {
    if (!(value >= 0.0) || value > 0.5) return std::nullopt;
    return ler_per_round(value, rounds);
}

} // namespace

Shot sample_shot(const CorrelatedModel& cm, Rng& rng) {
    Shot shot;
    const std::size_t n = cm.d_xyz.num_cols();
    shot.error.assign(n, 0);
    std::vector<std::uint8_t> s(cm.d_xyz.num_rows(), 0);
    shot.true_obs = BitMask(cm.num_observables);
    for (std::size_t c = 0; c < n; ++c) {
        if (rng.next_double() >= cm.priors[c]) continue;
        shot.error[c] = 1;
        for (std::uint32_t r : cm.d_xyz.col(c)) s[r] ^= 1;
        shot.true_obs ^= cm.obs_mask[c];
    }
    shot.s_x.assign(s.begin(), s.begin() + cm.num_x_rows);
    shot.s_z.assign(s.begin() + cm.num_x_rows, s.end());
    return shot;
}

double ler_per_round(double ler, std::uint32_t rounds) {
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    if (!(ler >= 0.0) || ler > 0.5)
        throw std::domain_error("per-round conversion is defined for rates in [0, 0.5]");
    return (1.0 - std::pow(1.0 - 2.0 * ler, 1.0 / static_cast<double>(rounds))) / 2.0;
}

double compose_rounds(double per_round, std::uint32_t rounds) {
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    return (1.0 - std::pow(1.0 - 2.0 * per_round, static_cast<double>(rounds))) / 2.0;
}

ConfidenceInterval ci99(std::uint64_t failures, std::uint64_t shots) {
    if (shots < 1) throw std::invalid_argument("shots must be at least 1");
    const double n = static_cast<double>(shots);
    const double p = static_cast<double>(failures) / n;
    const double z2 = kZ99 * kZ99;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        kZ99 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ConfidenceInterval ci;
    ci.lo = std::max(0.0, center - half);
    ci.hi = std::min(1.0, center + half);
    ci.low_confidence = failures < 100;
    return ci;
}

LatencyProjection latency_projection(double avg_iters, double per_iter_ns,
                                     std::uint32_t rounds,
                                     const std::map<std::uint32_t, std::uint64_t>& hist,
                                     std::optional<double> budget_ns_per_round) {
    if (!(per_iter_ns > 0.0))
        throw std::invalid_argument("per-iteration time must be positive");
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    LatencyProjection lp;
    lp.per_iter_ns = per_iter_ns;
    lp.per_round_avg_ns = avg_iters * per_iter_ns / static_cast<double>(rounds);
    if (budget_ns_per_round) {
        if (!(*budget_ns_per_round > 0.0))
            throw std::invalid_argument("latency budget must be positive");
        lp.budget_ns_per_round = *budget_ns_per_round;
        const double budget_iters =
            std::floor(*budget_ns_per_round * static_cast<double>(rounds) / per_iter_ns);
        lp.budget_iters = static_cast<std::uint64_t>(budget_iters);
        std::uint64_t total = 0, within = 0;
        for (const auto& [iters, count] : hist) {
            total += count;
            if (iters <= budget_iters) within += count;
        }
        if (total > 0)
            lp.fraction_within_budget =
                static_cast<double>(within) / static_cast<double>(total);
    }
    return lp;
}

ExperimentReport run_experiment(const DecodeContext& ctx, const CorrelatedModel& cm,
                                const ExperimentConfig& cfg) {
    if (cfg.shots < 1) throw std::invalid_argument("shots must be at least 1");
    if (cfg.rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    if (cfg.ensemble.size < 1)
        throw std::invalid_argument("ensemble size must be at least 1");

    struct ShotResult {
        std::uint32_t iterations = 0;
        std::uint32_t member = 0;
        bool converged = false;
        bool mis_corrected = false;
    };
    std::vector<ShotResult> results(cfg.shots);

    const std::uint64_t sample_base = mix_seed(cfg.seed, kSampleStream);
    const std::uint64_t decode_base = mix_seed(cfg.ensemble.base_seed, kDecodeStream);

    std::atomic<std::uint64_t> next_shot{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker_body = [&]() {
        try {
            for (;;) {
                const std::uint64_t i = next_shot.fetch_add(1, std::memory_order_relaxed);
                if (i >= cfg.shots) return;

                Rng rng(mix_seed(sample_base, i));
                const Shot shot = sample_shot(cm, rng);

                EnsembleConfig ecfg = cfg.ensemble;
                ecfg.base_seed = mix_seed(decode_base, i);
                const EnsembleOutcome eo =
                    ensemble_decode(ctx, DecodeInput{shot.s_x, shot.s_z}, ecfg);

                ShotResult res;
                res.iterations = eo.outcome.iterations;
                res.member = eo.member;
                res.converged = eo.outcome.converged;
                if (res.converged) {
                    // A converged outcome must reproduce the memory-side
                    // syndrome exactly; anything else is an internal bug.
                    for (std::size_t r = 0; r < ctx.top_z.num_rows(); ++r) {
                        unsigned parity = 0;
                        for (std::uint32_t c : ctx.top_z.row(r))
                            parity ^= eo.outcome.ex_hat[c - ctx.off_ebar_x];
                        if (parity != shot.s_z[r])
                            throw std::logic_error(
                                "converged estimate violates the stop syndrome");
                    }
                    res.mis_corrected = !(eo.outcome.predicted_obs == shot.true_obs);
                }
                results[i] = res;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    const std::uint32_t workers = resolve_workers(cfg.workers);
    if (workers <= 1) {
        worker_body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(worker_body);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    ExperimentReport report;
    report.shots = cfg.shots;
    report.rounds = cfg.rounds;
    report.physical_p_label = cfg.physical_p_label;
    report.seed = cfg.seed;
    report.ensemble_size = cfg.ensemble.size;
    report.alpha = cfg.ensemble.decoder.alpha;
    report.max_iters = cfg.ensemble.decoder.max_iters;

    std::uint64_t iter_sum = 0;
    for (const ShotResult& res : results) {
        ++report.iteration_histogram[res.iterations];
        iter_sum += res.iterations;
        if (!res.converged) {
            ++report.non_convergences;
        } else {
            ++report.member_histogram[res.member];
            if (res.mis_corrected) ++report.mis_corrections;
        }
    }
    report.failures = report.non_convergences + report.mis_corrections;
    report.ler = static_cast<double>(report.failures) / static_cast<double>(cfg.shots);
    report.avg_iterations =
        static_cast<double>(iter_sum) / static_cast<double>(cfg.shots);

    const auto lpr = try_per_round(report.ler, cfg.rounds);
    report.ler_per_round = lpr ? *lpr : std::numeric_limits<double>::quiet_NaN();
    report.ci99 = ci99(report.failures, report.shots);
    report.ci99_per_round = report.ci99;
    const auto lo = try_per_round(report.ci99.lo, cfg.rounds);
    const auto hi = try_per_round(report.ci99.hi, cfg.rounds);
    report.ci99_per_round.lo = lo ? *lo : std::numeric_limits<double>::quiet_NaN();
    report.ci99_per_round.hi = hi ? *hi : std::numeric_limits<double>::quiet_NaN();

    if (cfg.per_iter_ns)
        report.latency = latency_projection(report.avg_iterations, *cfg.per_iter_ns,
                                            cfg.rounds, report.iteration_histogram,
                                            cfg.budget_ns_per_round);
    return report;
}

} // namespace gari
