#include <benchmark/benchmark.h>

#include <vector>

#include "gari/decoder.hpp"
#include "gari/dem.hpp"
#include "gari/ensemble.hpp"
#include "gari/experiment.hpp"
#include "gari/rng.hpp"
#include "gari/transform.hpp"

namespace {

// Repetition-code style chain with correlated cross terms; big enough to
// exercise the schedules, small enough to iterate quickly.
gari::DemModel chain_model(std::size_t half, double p) {
    gari::DemModel model;
    model.num_detectors = 2 * half;
    model.num_observables = 1;
    model.detector_coords.assign(model.num_detectors, {});
    const auto x_det = [&](std::size_t i) { return static_cast<std::uint32_t>(i); };
    const auto z_det = [&](std::size_t i) { return static_cast<std::uint32_t>(half + i); };

    for (std::size_t i = 0; i < half; ++i) {
        gari::ErrorMechanism z_err;
        z_err.probability = p;
        z_err.detectors = {x_det(i)};
        if (i + 1 < half) z_err.detectors.push_back(x_det(i + 1));
        model.mechanisms.push_back(z_err);

        gari::ErrorMechanism x_err;
        x_err.probability = p;
        x_err.detectors = {z_det(i)};
        if (i + 1 < half) x_err.detectors.push_back(z_det(i + 1));
        if (i == 0) x_err.observables = {0};
        model.mechanisms.push_back(x_err);

        gari::ErrorMechanism y_err;
        y_err.probability = p / 2;
        y_err.detectors = z_err.detectors;
        y_err.detectors.insert(y_err.detectors.end(), x_err.detectors.begin(),
                               x_err.detectors.end());
        std::sort(y_err.detectors.begin(), y_err.detectors.end());
        y_err.observables = x_err.observables;
        model.mechanisms.push_back(y_err);
    }
    model.mechanisms = gari::canonicalize(std::move(model.mechanisms));

    gari::DetectorTyping typing;
    typing.type_of.assign(model.num_detectors, gari::DetectorType::Z);
    for (std::size_t i = 0; i < half; ++i) typing.type_of[i] = gari::DetectorType::X;
    model.typing = typing;
    return model;
}

void bench_decode_iteration(benchmark::State& state) {
    const auto model = chain_model(static_cast<std::size_t>(state.range(0)), 0.01);
    const gari::CorrelatedModel cm = gari::build_correlated(model);
    const gari::GariModel gm = gari::gari_from_dem(model);
    const gari::DecodeContext ctx(gm);

    gari::Rng rng(1234);
    const gari::Shot shot = gari::sample_shot(cm, rng);
    gari::DecoderConfig cfg;
    gari::Decoder dec(ctx, cfg);
    dec.reset({shot.s_x, shot.s_z});

    for (auto _ : state) {
        dec.iterate_bottom();
        dec.iterate_top();
        benchmark::DoNotOptimize(dec.lambda().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(dec.message_updates() /
                                                      std::max<std::uint64_t>(1, state.iterations())));
}
BENCHMARK(bench_decode_iteration)->Arg(64)->Arg(256)->Arg(1024);

void bench_full_decode(benchmark::State& state) {
    const auto model = chain_model(256, 0.02);
    const gari::CorrelatedModel cm = gari::build_correlated(model);
    const gari::GariModel gm = gari::gari_from_dem(model);
    const gari::DecodeContext ctx(gm);

    gari::Rng rng(99);
    std::vector<gari::Shot> shots;
    for (int i = 0; i < 32; ++i) shots.push_back(gari::sample_shot(cm, rng));

    gari::DecoderConfig cfg;
    std::size_t next = 0;
    for (auto _ : state) {
        const auto& shot = shots[next++ % shots.size()];
        auto out = gari::decode(ctx, {shot.s_x, shot.s_z}, cfg);
        benchmark::DoNotOptimize(out.iterations);
    }
}
BENCHMARK(bench_full_decode);

void bench_count_4cycles(benchmark::State& state) {
    const auto model = chain_model(static_cast<std::size_t>(state.range(0)), 0.01);
    const gari::CorrelatedModel cm = gari::build_correlated(model);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cm.d_xyz.count_4cycles());
    }
}
BENCHMARK(bench_count_4cycles)->Arg(256)->Arg(1024);

} // namespace

BENCHMARK_MAIN();
