#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gari/decoder.hpp"
#include "gari/dem.hpp"
#include "gari/experiment.hpp"
#include "gari/transform.hpp"

namespace gari {

// --typing argument: "coord:<k>,<value>=X|Z[,...]" or "sidecar:<path>".
// With no spec, "<dem_path>.typing" is used when it exists.
DetectorTyping resolve_typing(const DemModel& model,
                              const std::optional<std::string>& spec,
                              const std::string& dem_path);

// Parses "coord:..." / "sidecar:..." without applying it.
struct TypingSpec {
    enum class Kind { Coord, Sidecar } kind = Kind::Sidecar;
    CoordinateRule rule; // Kind::Coord
    std::string path;    // Kind::Sidecar
};
TypingSpec parse_typing_spec(const std::string& spec);

// Table-style structural summary of a transformed model.
struct InspectStats {
    MatrixStats d_x;
    MatrixStats d_z;
    MatrixStats d_xyz; // all-zero detector rows excluded
    MatrixStats bottom;
    std::uint64_t augmented_nnz = 0; // top_X + top_Z + bottom
    std::size_t num_detectors = 0;
    std::size_t num_observables = 0;
    std::size_t dropped_zero_rows = 0;
    std::size_t fresh_x = 0;
    std::size_t fresh_z = 0;
    std::size_t unmatched_y = 0;
    std::string memory_basis;
};

InspectStats collect_stats(const CorrelatedModel& cm, const SingleTypeModels& st,
                           const UvMatrices& uv, const GariModel& gm);
std::string inspect_to_json(const InspectStats& stats);
std::string inspect_to_csv(const InspectStats& stats);

struct SaveInfo {
    std::optional<std::uint32_t> rounds;
    std::optional<double> physical_p_label;
};

// Writes manifest.json plus the matrix blocks (triplet text), priors and
// observable masks into `dir` (created if missing).
void save_model(const std::string& dir, const CorrelatedModel& cm,
                const SingleTypeModels& st, const UvMatrices& uv,
                const GariModel& gm, const SaveInfo& info);

struct LoadedModel {
    GariModel gm;
    std::optional<std::uint32_t> rounds;
    std::optional<double> physical_p_label;
};

LoadedModel load_model(const std::string& dir);

// Syndrome file: one shot per line, two whitespace-separated fields
// (s_X then s_Z), each either a 0/1 bitstring (leftmost bit = row 0) or
// 0x-prefixed hex (bit i = row i). '#' starts a comment.
std::vector<DecodeInput> read_syndromes(std::istream& in, std::size_t num_x,
                                        std::size_t num_z);
void write_syndromes(std::ostream& out, const std::vector<DecodeInput>& shots);

std::string report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);

// One JSON line per decoded shot, for the decode subcommand.
std::string decode_outcome_to_json_line(const DecodeOutcome& outcome);

} // namespace gari
