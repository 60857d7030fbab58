#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gari {

// One independent error mechanism: fires with `probability`, flipping the
// listed detectors and observables. Index lists are sorted and unique.
struct ErrorMechanism {
    double probability = 0.0;
    std::vector<std::uint32_t> detectors;
    std::vector<std::uint32_t> observables;

    bool operator==(const ErrorMechanism&) const = default;
};

enum class DetectorType : std::uint8_t { X, Z };

enum class TypingSource : std::uint8_t { CoordinateRule, Sidecar };

struct DetectorTyping {
    std::vector<DetectorType> type_of; // indexed by detector
    TypingSource source = TypingSource::CoordinateRule;
};

// Coordinate-based typing: detector coordinate `coord_index` is matched
// against `value_types`; unlisted values are an error.
struct CoordinateRule {
    std::size_t coord_index = 0;
    std::vector<std::pair<double, DetectorType>> value_types;
};

struct DemModel {
    std::vector<ErrorMechanism> mechanisms;
    std::size_t num_detectors = 0;
    std::size_t num_observables = 0;
    // detector_coords[d] is empty when detector d declared no coordinates.
    std::vector<std::vector<double>> detector_coords;
    std::optional<DetectorTyping> typing;
};

class DemParseError : public std::runtime_error {
public:
    DemParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Parses the flat text model format. Mechanisms are taken one per error
// line (separator groups collapsed by parity); no merging across lines.
DemModel parse_dem(std::istream& in);
DemModel parse_dem_file(const std::string& path);

// XOR-composition of two independent flip probabilities.
inline double xor_probability(double p, double q) {
    return p * (1.0 - q) + q * (1.0 - p);
}

// Merges mechanisms with identical (detectors, observables), composing
// probabilities, drops mechanisms that flip nothing, and returns the
// result sorted by (detectors, observables). Mechanisms with an empty
// detector set but non-empty observables are kept; downstream stages
// reject them with a diagnostic.
std::vector<ErrorMechanism> canonicalize(std::vector<ErrorMechanism> mechanisms);

// Assigns an X/Z type to every detector.
DetectorTyping classify_detectors(const DemModel& model, const CoordinateRule& rule);
DetectorTyping classify_detectors(const DemModel& model, std::istream& sidecar);

void serialize_dem(const DemModel& model, std::ostream& out);

} // namespace gari
