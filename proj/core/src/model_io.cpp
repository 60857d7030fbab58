#include "gari/model_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gari {
namespace {

using nlohmann::json;

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(std::numeric_limits<double>::max_digits10);
    ss << v;
    return ss.str();
}

json stats_to_json(const MatrixStats& s) {
    return json{{"rows", s.num_rows},
                {"cols", s.num_cols},
                {"nnz", s.nnz},
                {"avg_row_weight", s.avg_row_weight},
                {"num_4cycles", s.num_4cycles}};
}

json ci_to_json(const ConfidenceInterval& ci) {
    return json{{"lo", ci.lo}, {"hi", ci.hi}, {"low_confidence", ci.low_confidence}};
}

void write_matrix_file(const std::filesystem::path& path, const BinMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    m.write_triplets(out);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

BinMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return BinMatrix::read_triplets(in);
}

std::vector<std::uint8_t> parse_syndrome_field(const std::string& tok,
                                               std::size_t expected,
                                               std::size_t line_no) {
    std::vector<std::uint8_t> bits(expected, 0);
    if (tok.size() > 1 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
        try {
            const BitMask mask = BitMask::from_hex(expected, tok);
            for (std::uint32_t i : mask.indices()) bits[i] = 1;
        } catch (const std::exception& e) {
            throw std::runtime_error("syndrome line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        return bits;
    }
    if (tok.size() != expected)
        throw std::runtime_error("syndrome line " + std::to_string(line_no) +
                                 ": field has " + std::to_string(tok.size()) +
                                 " bits, expected " + std::to_string(expected));
    for (std::size_t i = 0; i < tok.size(); ++i) {
        if (tok[i] != '0' && tok[i] != '1')
            throw std::runtime_error("syndrome line " + std::to_string(line_no) +
                                     ": bitstring may contain only 0 and 1");
        bits[i] = static_cast<std::uint8_t>(tok[i] - '0');
    }
    return bits;
}

} // namespace

TypingSpec parse_typing_spec(const std::string& spec) {
    TypingSpec out;
    if (spec.rfind("sidecar:", 0) == 0) {
        out.kind = TypingSpec::Kind::Sidecar;
        out.path = spec.substr(8);
        if (out.path.empty())
            throw std::invalid_argument("sidecar typing spec needs a path");
        return out;
    }
    if (spec.rfind("coord:", 0) != 0)
        throw std::invalid_argument(
            "typing spec must start with 'coord:' or 'sidecar:', got '" + spec + "'");

    out.kind = TypingSpec::Kind::Coord;
    std::stringstream ss(spec.substr(6));
    std::string piece;
    bool first = true;
    while (std::getline(ss, piece, ',')) {
        if (first) {
            out.rule.coord_index = std::stoul(piece);
            first = false;
            continue;
        }
        const auto eq = piece.find('=');
        if (eq == std::string::npos || eq + 2 != piece.size() ||
            (piece[eq + 1] != 'X' && piece[eq + 1] != 'Z'))
            throw std::invalid_argument("typing rule entry '" + piece +
                                        "' is not of the form <value>=X or <value>=Z");
        out.rule.value_types.emplace_back(
            std::stod(piece.substr(0, eq)),
            piece[eq + 1] == 'X' ? DetectorType::X : DetectorType::Z);
    }
    if (first)
        throw std::invalid_argument("coord typing spec needs a coordinate index");
    if (out.rule.value_types.empty())
        throw std::invalid_argument("coord typing spec needs at least one value mapping");
    return out;
}

DetectorTyping resolve_typing(const DemModel& model,
                              const std::optional<std::string>& spec,
                              const std::string& dem_path) {
    if (spec) {
        const TypingSpec parsed = parse_typing_spec(*spec);
        if (parsed.kind == TypingSpec::Kind::Coord)
            return classify_detectors(model, parsed.rule);
        std::ifstream in(parsed.path);
        if (!in) throw std::runtime_error("cannot open typing file: " + parsed.path);
        return classify_detectors(model, in);
    }
    const std::string sidecar_path = dem_path + ".typing";
    std::ifstream in(sidecar_path);
    if (!in)
        throw std::runtime_error(
            "no detector typing given: pass --typing coord:... or --typing "
            "sidecar:<path>, or provide " + sidecar_path);
    return classify_detectors(model, in);
}

InspectStats collect_stats(const CorrelatedModel& cm, const SingleTypeModels& st,
                           const UvMatrices& uv, const GariModel& gm) {
    InspectStats stats;
    stats.d_x = st.d_x.stats();
    stats.d_z = st.d_z.stats();
    stats.d_xyz = cm.reported_stats();
    stats.bottom = gm.bottom.stats();
    stats.augmented_nnz = gm.top_x.nnz() + gm.top_z.nnz() + gm.bottom.nnz();
    stats.num_detectors = cm.d_xyz.num_rows();
    stats.num_observables = cm.num_observables;
    stats.dropped_zero_rows = cm.zero_rows.size();
    stats.fresh_x = st.fresh_x;
    stats.fresh_z = st.fresh_z;
    stats.unmatched_y = uv.unmatched_y;
    stats.memory_basis = cm.memory_basis == MemoryBasis::Z ? "Z" : "X";
    return stats;
}

std::string inspect_to_json(const InspectStats& stats) {
    json j;
    j["d_x"] = stats_to_json(stats.d_x);
    j["d_z"] = stats_to_json(stats.d_z);
    j["d_xyz"] = stats_to_json(stats.d_xyz);
    j["bottom"] = stats_to_json(stats.bottom);
    j["augmented_nnz"] = stats.augmented_nnz;
    j["num_detectors"] = stats.num_detectors;
    j["num_observables"] = stats.num_observables;
    j["dropped_zero_rows"] = stats.dropped_zero_rows;
    j["fresh_x"] = stats.fresh_x;
    j["fresh_z"] = stats.fresh_z;
    j["unmatched_y"] = stats.unmatched_y;
    j["memory_basis"] = stats.memory_basis;
    return j.dump(2) + "\n";
}

std::string inspect_to_csv(const InspectStats& stats) {
    std::ostringstream out;
    out << "matrix,rows,cols,nnz,avg_row_weight,num_4cycles\n";
    const auto row = [&](const char* name, const MatrixStats& s) {
        out << name << ',' << s.num_rows << ',' << s.num_cols << ',' << s.nnz << ','
            << format_double(s.avg_row_weight) << ',' << s.num_4cycles << '\n';
    };
    row("d_x", stats.d_x);
    row("d_z", stats.d_z);
    row("d_xyz", stats.d_xyz);
    row("bottom", stats.bottom);
    out << "# augmented_nnz=" << stats.augmented_nnz
        << " dropped_zero_rows=" << stats.dropped_zero_rows
        << " fresh_x=" << stats.fresh_x << " fresh_z=" << stats.fresh_z
        << " unmatched_y=" << stats.unmatched_y
        << " memory_basis=" << stats.memory_basis << '\n';
    return out.str();
}

void save_model(const std::string& dir, const CorrelatedModel& cm,
                const SingleTypeModels& st, const UvMatrices& uv,
                const GariModel& gm, const SaveInfo& info) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    fs::create_directories(base);

    write_matrix_file(base / "top_x.mtx", gm.top_x);
    write_matrix_file(base / "top_z.mtx", gm.top_z);
    write_matrix_file(base / "u.mtx", gm.u);
    write_matrix_file(base / "v.mtx", gm.v);
    write_matrix_file(base / "bottom.mtx", gm.bottom);

    {
        std::ofstream out(base / "priors_aug.txt");
        out.precision(std::numeric_limits<double>::max_digits10);
        for (double p : gm.priors_aug) out << p << '\n';
        if (!out) throw std::runtime_error("write failed for priors_aug.txt");
    }
    {
        std::ofstream out(base / "merged_priors_ex.txt");
        out.precision(std::numeric_limits<double>::max_digits10);
        for (double p : gm.merged_priors_ex) out << p << '\n';
        if (!out) throw std::runtime_error("write failed for merged_priors_ex.txt");
    }
    {
        std::ofstream out(base / "obs_mask_ex.txt");
        for (const BitMask& m : gm.obs_mask_ex) out << m.to_hex() << '\n';
        if (!out) throw std::runtime_error("write failed for obs_mask_ex.txt");
    }

    json m;
    m["format_version"] = 1;
    m["memory_basis"] = gm.memory_basis == MemoryBasis::Z ? "Z" : "X";
    m["num_observables"] = gm.num_observables;
    m["num_detectors"] = cm.d_xyz.num_rows();
    m["num_x_detectors"] = cm.num_x_rows;
    m["num_z_detectors"] = cm.num_z_rows();
    m["offsets"] = json{{"e_z", gm.off_e_z},     {"e_x", gm.off_e_x},
                        {"e_y", gm.off_e_y},     {"ebar_z", gm.off_ebar_z},
                        {"ebar_x", gm.off_ebar_x}, {"total", gm.num_aug_cols}};
    m["files"] = json{{"top_x", "top_x.mtx"},
                      {"top_z", "top_z.mtx"},
                      {"u", "u.mtx"},
                      {"v", "v.mtx"},
                      {"bottom", "bottom.mtx"},
                      {"priors_aug", "priors_aug.txt"},
                      {"merged_priors_ex", "merged_priors_ex.txt"},
                      {"obs_mask_ex", "obs_mask_ex.txt"}};
    m["build"] = json{{"fresh_x", st.fresh_x},
                      {"fresh_z", st.fresh_z},
                      {"unmatched_y", uv.unmatched_y},
                      {"dropped_zero_rows", cm.zero_rows}};
    {
        const InspectStats stats = collect_stats(cm, st, uv, gm);
        json s;
        s["d_x"] = stats_to_json(stats.d_x);
        s["d_z"] = stats_to_json(stats.d_z);
        s["d_xyz"] = stats_to_json(stats.d_xyz);
        s["bottom"] = stats_to_json(stats.bottom);
        s["augmented_nnz"] = stats.augmented_nnz;
        m["stats"] = s;
    }
    if (info.rounds) m["rounds"] = *info.rounds;
    if (info.physical_p_label) m["physical_p_label"] = *info.physical_p_label;

    std::ofstream out(base / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for manifest.json");
}

LoadedModel load_model(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    std::ifstream min(base / "manifest.json");
    if (!min) throw std::runtime_error("cannot open " + (base / "manifest.json").string());
    json m = json::parse(min);
    if (m.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported model format version");

    LoadedModel loaded;
    GariModel& gm = loaded.gm;
    gm.memory_basis =
        m.at("memory_basis").get<std::string>() == "X" ? MemoryBasis::X : MemoryBasis::Z;
    gm.num_observables = m.at("num_observables").get<std::size_t>();
    const auto& off = m.at("offsets");
    gm.off_e_z = off.at("e_z").get<std::size_t>();
    gm.off_e_x = off.at("e_x").get<std::size_t>();
    gm.off_e_y = off.at("e_y").get<std::size_t>();
    gm.off_ebar_z = off.at("ebar_z").get<std::size_t>();
    gm.off_ebar_x = off.at("ebar_x").get<std::size_t>();
    gm.num_aug_cols = off.at("total").get<std::size_t>();

    const auto& files = m.at("files");
    gm.top_x = read_matrix_file(base / files.at("top_x").get<std::string>());
    gm.top_z = read_matrix_file(base / files.at("top_z").get<std::string>());
    gm.u = read_matrix_file(base / files.at("u").get<std::string>());
    gm.v = read_matrix_file(base / files.at("v").get<std::string>());
    gm.bottom = read_matrix_file(base / files.at("bottom").get<std::string>());

    if (gm.top_x.num_cols() != gm.num_ebar_z() ||
        gm.top_z.num_cols() != gm.num_ebar_x() ||
        gm.bottom.num_cols() != gm.num_aug_cols ||
        gm.bottom.num_rows() != gm.num_ebar_z() + gm.num_ebar_x())
        throw std::runtime_error("model matrices disagree with the manifest layout");

    {
        std::ifstream in(base / files.at("priors_aug").get<std::string>());
        double p;
        while (in >> p) gm.priors_aug.push_back(p);
        if (gm.priors_aug.size() != gm.num_aug_cols)
            throw std::runtime_error("priors_aug length does not match the layout");
    }
    {
        std::ifstream in(base / files.at("merged_priors_ex").get<std::string>());
        double p;
        while (in >> p) gm.merged_priors_ex.push_back(p);
        if (gm.merged_priors_ex.size() != gm.num_ebar_x())
            throw std::runtime_error("merged_priors_ex length does not match the layout");
    }
    {
        std::ifstream in(base / files.at("obs_mask_ex").get<std::string>());
        std::string hex;
        while (in >> hex)
            gm.obs_mask_ex.push_back(BitMask::from_hex(gm.num_observables, hex));
        if (gm.obs_mask_ex.size() != gm.num_ebar_x())
            throw std::runtime_error("obs_mask_ex length does not match the layout");
    }

    if (m.contains("rounds")) loaded.rounds = m.at("rounds").get<std::uint32_t>();
    if (m.contains("physical_p_label"))
        loaded.physical_p_label = m.at("physical_p_label").get<double>();
    return loaded;
}

std::vector<DecodeInput> read_syndromes(std::istream& in, std::size_t num_x,
                                        std::size_t num_z) {
    std::vector<DecodeInput> shots;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
        std::stringstream ss(text);
        std::string fx, fz;
        if (!(ss >> fx)) continue;
        if (!(ss >> fz))
            throw std::runtime_error("syndrome line " + std::to_string(line_no) +
                                     ": expected two fields (s_X then s_Z)");
        std::string extra;
        if (ss >> extra)
            throw std::runtime_error("syndrome line " + std::to_string(line_no) +
                                     ": trailing junk '" + extra + "'");
        DecodeInput input;
        input.s_x = parse_syndrome_field(fx, num_x, line_no);
        input.s_z = parse_syndrome_field(fz, num_z, line_no);
        shots.push_back(std::move(input));
    }
    return shots;
}

void write_syndromes(std::ostream& out, const std::vector<DecodeInput>& shots) {
    for (const auto& shot : shots) {
        for (std::uint8_t b : shot.s_x) out << static_cast<char>('0' + b);
        out << ' ';
        for (std::uint8_t b : shot.s_z) out << static_cast<char>('0' + b);
        out << '\n';
    }
}

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["shots"] = report.shots;
    j["failures"] = report.failures;
    j["non_convergences"] = report.non_convergences;
    j["mis_corrections"] = report.mis_corrections;
    j["ler"] = report.ler;
    j["ler_per_round"] = report.ler_per_round; // NaN dumps as null
    j["ci99"] = ci_to_json(report.ci99);
    j["ci99_per_round"] = ci_to_json(report.ci99_per_round);
    j["iteration_histogram"] = json::array();
    for (const auto& [iters, count] : report.iteration_histogram)
        j["iteration_histogram"].push_back(json::array({iters, count}));
    j["avg_iterations"] = report.avg_iterations;
    j["member_histogram"] = json::array();
    for (const auto& [member, count] : report.member_histogram)
        j["member_histogram"].push_back(json::array({member, count}));
    if (report.latency) {
        json lat;
        lat["per_iter_ns"] = report.latency->per_iter_ns;
        lat["per_round_avg_ns"] = report.latency->per_round_avg_ns;
        if (report.latency->budget_ns_per_round)
            lat["budget_ns_per_round"] = *report.latency->budget_ns_per_round;
        if (report.latency->budget_iters)
            lat["budget_iters"] = *report.latency->budget_iters;
        if (report.latency->fraction_within_budget)
            lat["fraction_within_budget"] = *report.latency->fraction_within_budget;
        j["latency"] = lat;
    }
    j["rounds"] = report.rounds;
    if (report.physical_p_label) j["physical_p_label"] = *report.physical_p_label;
    j["seed"] = report.seed;
    j["ensemble_size"] = report.ensemble_size;
    j["alpha"] = report.alpha;
    j["max_iters"] = report.max_iters;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "shots,failures,non_convergences,mis_corrections,ler,ler_per_round,"
           "ci99_lo,ci99_hi,ci99_low_confidence,ci99_per_round_lo,ci99_per_round_hi,"
           "avg_iterations,rounds,physical_p_label,seed,ensemble_size,alpha,max_iters,"
           "per_round_avg_ns,budget_iters,fraction_within_budget,"
           "iteration_histogram,member_histogram\n";
    const auto num = [&](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    out << report.shots << ',' << report.failures << ',' << report.non_convergences
        << ',' << report.mis_corrections << ',' << format_double(report.ler) << ','
        << num(report.ler_per_round) << ',' << format_double(report.ci99.lo) << ','
        << format_double(report.ci99.hi) << ',' << (report.ci99.low_confidence ? 1 : 0)
        << ',' << num(report.ci99_per_round.lo) << ',' << num(report.ci99_per_round.hi)
        << ',' << format_double(report.avg_iterations) << ',' << report.rounds << ',';
    if (report.physical_p_label) out << format_double(*report.physical_p_label);
    out << ',' << report.seed << ',' << report.ensemble_size << ','
        << format_double(report.alpha) << ',' << report.max_iters << ',';
    if (report.latency) out << format_double(report.latency->per_round_avg_ns);
    out << ',';
    if (report.latency && report.latency->budget_iters)
        out << *report.latency->budget_iters;
    out << ',';
    if (report.latency && report.latency->fraction_within_budget)
        out << format_double(*report.latency->fraction_within_budget);
    out << ',';
    bool first = true;
    for (const auto& [iters, count] : report.iteration_histogram) {
        if (!first) out << ';';
        out << iters << ':' << count;
        first = false;
    }
    out << ',';
    first = true;
    for (const auto& [member, count] : report.member_histogram) {
        if (!first) out << ';';
        out << member << ':' << count;
        first = false;
    }
    out << '\n';
    return out.str();
}

std::string decode_outcome_to_json_line(const DecodeOutcome& outcome) {
    json j;
    j["converged"] = outcome.converged;
    j["iterations"] = outcome.iterations;
    j["observable_mask"] = outcome.predicted_obs.to_hex();
    j["weight"] = outcome.weight;
    return j.dump() + "\n";
}

} // namespace gari
