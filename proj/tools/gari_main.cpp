#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gari/dem.hpp"
#include "gari/decoder.hpp"
#include "gari/ensemble.hpp"
#include "gari/experiment.hpp"
#include "gari/model_io.hpp"
#include "gari/transform.hpp"

namespace {

struct ModelArgs {
    std::string dem_path;
    std::optional<std::string> typing;
    std::string basis = "Z";
};

void add_model_args(CLI::App* cmd, ModelArgs& args) {
    cmd->add_option("--dem", args.dem_path, "detector error model file")->required();
    cmd->add_option("--typing", args.typing,
                    "detector typing: coord:<k>[,<v>=X|Z ...] or sidecar:<path> "
                    "(default: <dem>.typing)");
    cmd->add_option("--basis", args.basis, "memory basis (Z or X)")
        ->check(CLI::IsMember({"Z", "X"}));
}

gari::MemoryBasis parse_basis(const std::string& basis) {
    return basis == "X" ? gari::MemoryBasis::X : gari::MemoryBasis::Z;
}

struct BuiltModel {
    gari::CorrelatedModel cm;
    gari::SingleTypeModels st;
    gari::UvMatrices uv;
    gari::GariModel gm;
};

BuiltModel build_from_args(const ModelArgs& args) {
    gari::DemModel model = gari::parse_dem_file(args.dem_path);
    model.mechanisms = gari::canonicalize(std::move(model.mechanisms));
    model.typing = gari::resolve_typing(model, args.typing, args.dem_path);

    BuiltModel built;
    built.cm = gari::build_correlated(model, parse_basis(args.basis));
    built.st = gari::extract_single_type(built.cm);
    built.uv = gari::build_uv(built.cm, built.st);
    if (built.uv.unmatched_y > 0)
        std::cerr << "warning: " << built.uv.unmatched_y
                  << " correlated column restriction(s) had no single-type match; "
                     "fresh columns were appended\n";
    built.gm = gari::assemble_gari(built.cm, built.st, built.uv);
    return built;
}

int run_inspect(const ModelArgs& args, const std::string& format) {
    const BuiltModel built = build_from_args(args);
    const gari::InspectStats stats =
        gari::collect_stats(built.cm, built.st, built.uv, built.gm);
    std::cout << (format == "csv" ? gari::inspect_to_csv(stats)
                                  : gari::inspect_to_json(stats));
    return 0;
}

int run_transform(const ModelArgs& args, const std::string& out_dir,
                  std::optional<std::uint32_t> rounds, std::optional<double> p_label) {
    const BuiltModel built = build_from_args(args);
    gari::SaveInfo info;
    info.rounds = rounds;
    info.physical_p_label = p_label;
    gari::save_model(out_dir, built.cm, built.st, built.uv, built.gm, info);
    std::cerr << "model written to " << out_dir << "\n";
    return 0;
}

int run_decode(const std::string& model_dir, const std::string& syndrome_path,
               const gari::DecoderConfig& cfg) {
    const gari::LoadedModel loaded = gari::load_model(model_dir);
    const gari::DecodeContext ctx(loaded.gm);

    std::ifstream in(syndrome_path);
    if (!in) throw std::runtime_error("cannot open syndrome file: " + syndrome_path);
    const auto shots =
        gari::read_syndromes(in, ctx.top_x.num_rows(), ctx.top_z.num_rows());

    for (const auto& shot : shots) {
        const gari::DecodeOutcome outcome = gari::decode(ctx, shot, cfg);
        std::cout << gari::decode_outcome_to_json_line(outcome);
    }
    return 0;
}

int run_simulate(const ModelArgs& args, gari::ExperimentConfig cfg,
                 bool base_seed_given) {
    if (!base_seed_given) cfg.ensemble.base_seed = cfg.seed;
    const BuiltModel built = build_from_args(args);
    const gari::DecodeContext ctx(built.gm);
    const gari::ExperimentReport report = gari::run_experiment(ctx, built.cm, cfg);
    std::cout << (cfg.format == gari::ReportFormat::Csv ? gari::report_to_csv(report)
                                                        : gari::report_to_json(report));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlated-error decoding toolkit"};
    app.require_subcommand(1);

    ModelArgs inspect_args;
    std::string inspect_format = "json";
    auto* inspect = app.add_subcommand("inspect", "structural stats of a model");
    add_model_args(inspect, inspect_args);
    inspect->add_option("--format", inspect_format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    ModelArgs transform_args;
    std::string out_dir;
    std::optional<std::uint32_t> transform_rounds;
    std::optional<double> transform_p;
    auto* transform = app.add_subcommand("transform", "build and save the augmented model");
    add_model_args(transform, transform_args);
    transform->add_option("--out", out_dir, "output directory")->required();
    transform->add_option("--rounds", transform_rounds, "syndrome rounds metadata");
    transform->add_option("--p", transform_p, "physical error rate label");

    std::string model_dir, syndrome_path;
    gari::DecoderConfig decode_cfg;
    auto* decode = app.add_subcommand("decode", "decode a syndrome file against a saved model");
    decode->add_option("--model", model_dir, "saved model directory")->required();
    decode->add_option("--syndromes", syndrome_path, "syndrome file")->required();
    decode->add_option("--alpha", decode_cfg.alpha, "normalization factor");
    decode->add_option("--max-iters", decode_cfg.max_iters, "iteration cap");
    decode->add_option("--seed", decode_cfg.seed, "decoder seed");
    decode->add_option("--cap", decode_cfg.magnitude_cap, "message saturation bound");
    decode->add_flag("--both-syndromes", decode_cfg.check_both_syndromes,
                     "stop only when both syndrome types are satisfied");

    ModelArgs sim_args;
    gari::ExperimentConfig sim_cfg;
    std::string sim_format = "json";
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo memory experiment");
    add_model_args(simulate, sim_args);
    simulate->add_option("--shots", sim_cfg.shots, "number of shots")->required();
    simulate->add_option("--seed", sim_cfg.seed, "experiment seed");
    auto* base_seed_opt =
        simulate->add_option("--base-seed", sim_cfg.ensemble.base_seed,
                             "ensemble base seed (default: --seed)");
    simulate->add_option("--ensemble", sim_cfg.ensemble.size, "ensemble size");
    simulate->add_option("--alpha", sim_cfg.ensemble.decoder.alpha, "normalization factor");
    simulate->add_option("--max-iters", sim_cfg.ensemble.decoder.max_iters, "iteration cap");
    simulate->add_option("--cap", sim_cfg.ensemble.decoder.magnitude_cap,
                         "message saturation bound");
    simulate->add_flag("--both-syndromes", sim_cfg.ensemble.decoder.check_both_syndromes,
                       "stop only when both syndrome types are satisfied");
    simulate->add_option("--rounds", sim_cfg.rounds, "syndrome rounds for per-round rates");
    simulate->add_option("--p", sim_cfg.physical_p_label, "physical error rate label");
    simulate->add_option("--per-iter-ns", sim_cfg.per_iter_ns,
                         "per-iteration time for latency projection");
    simulate->add_option("--budget-ns", sim_cfg.budget_ns_per_round,
                         "per-round latency budget");
    simulate->add_option("--format", sim_format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (inspect->parsed()) return run_inspect(inspect_args, inspect_format);
        if (transform->parsed())
            return run_transform(transform_args, out_dir, transform_rounds, transform_p);
        if (decode->parsed()) return run_decode(model_dir, syndrome_path, decode_cfg);
        if (simulate->parsed()) {
            sim_cfg.format =
                sim_format == "csv" ? gari::ReportFormat::Csv : gari::ReportFormat::Json;
            return run_simulate(sim_args, sim_cfg, base_seed_opt->count() > 0);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
