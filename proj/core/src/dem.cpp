#include "gari/dem.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace gari {
namespace {

struct RawLine {
    std::string name;
    bool has_args = false;
    std::vector<std::string> args;    // comma-separated parenthesized list
    std::vector<std::string> targets; // whitespace-separated remainder
};

bool split_line(const std::string& text, std::size_t line_no, RawLine& out) {
    std::string body = text;
    if (auto hash = body.find('#'); hash != std::string::npos)
        body.erase(hash);
    std::size_t pos = 0;
    while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
    if (pos == body.size()) return false;

    out = RawLine{};
    while (pos < body.size() &&
           (std::islower(static_cast<unsigned char>(body[pos])) || body[pos] == '_'))
        out.name.push_back(body[pos++]);
    if (out.name.empty())
        throw DemParseError(line_no, "expected an instruction name");

    if (pos < body.size() && body[pos] == '(') {
        const auto close = body.find(')', pos);
        if (close == std::string::npos)
            throw DemParseError(line_no, "unterminated '(' in instruction arguments");
        out.has_args = true;
        std::string inner = body.substr(pos + 1, close - pos - 1);
        std::string piece;
        std::stringstream ss(inner);
        bool saw_any = false;
        while (std::getline(ss, piece, ',')) {
            out.args.push_back(piece);
            saw_any = true;
        }
        if (!saw_any && !inner.empty()) out.args.push_back(inner);
        pos = close + 1;
    }

    std::stringstream rest(body.substr(pos));
    std::string tok;
    while (rest >> tok) out.targets.push_back(std::move(tok));
    return true;
}

double parse_double(const std::string& text, std::size_t line_no, const char* what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DemParseError(line_no, std::string("malformed ") + what + " '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size())
        throw DemParseError(line_no, std::string("trailing junk after ") + what + " '" + text + "'");
    return value;
}

std::uint64_t parse_index(const std::string& digits, std::size_t line_no, const std::string& tok) {
    std::uint64_t value = 0;
    const auto* first = digits.data();
    const auto* last = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || digits.empty())
        throw DemParseError(line_no, "malformed target '" + tok + "'");
    return value;
}

// Collapses an odd/even occurrence count into a sorted index list.
std::vector<std::uint32_t> fold_parity(std::map<std::uint64_t, unsigned>& counts) {
    std::vector<std::uint32_t> out;
    for (const auto& [index, n] : counts)
        if (n & 1) out.push_back(static_cast<std::uint32_t>(index));
    return out;
}

} // namespace

DemModel parse_dem(std::istream& in) {
    DemModel model;
    std::uint64_t detector_offset = 0;
    std::uint64_t max_detector = 0;
    bool any_detector = false;
    std::uint64_t max_observable = 0;
    bool any_observable = false;

    auto note_detector = [&](std::uint64_t d) {
        any_detector = true;
        max_detector = std::max(max_detector, d);
        if (d >= std::numeric_limits<std::uint32_t>::max())
            throw std::overflow_error("detector index too large");
    };
    auto note_observable = [&](std::uint64_t o) {
        any_observable = true;
        max_observable = std::max(max_observable, o);
        if (o >= std::numeric_limits<std::uint32_t>::max())
            throw std::overflow_error("observable index too large");
    };

    std::vector<std::pair<std::uint64_t, std::vector<double>>> coord_decls;

    std::string text;
    std::size_t line_no = 0;
    RawLine line;
    while (std::getline(in, text)) {
        ++line_no;
        if (!split_line(text, line_no, line)) continue;

        if (line.name == "error") {
            if (!line.has_args || line.args.size() != 1)
                throw DemParseError(line_no, "error takes exactly one probability argument");
            const double p = parse_double(line.args[0], line_no, "probability");
            if (!(p > 0.0) || !(p < 1.0))
                throw DemParseError(line_no, "probability must lie in (0, 1)");
            if (line.targets.empty())
                throw DemParseError(line_no, "error line has no targets");

            std::map<std::uint64_t, unsigned> det_counts, obs_counts;
            bool component_empty = true;
            for (const auto& tok : line.targets) {
                if (tok == "^") {
                    if (component_empty)
                        throw DemParseError(line_no, "empty component around '^'");
                    component_empty = true;
                    continue;
                }
                component_empty = false;
                if (tok.size() < 2 || (tok[0] != 'D' && tok[0] != 'L'))
                    throw DemParseError(line_no, "unknown target '" + tok + "'");
                const std::uint64_t index = parse_index(tok.substr(1), line_no, tok);
                if (tok[0] == 'D') {
                    const std::uint64_t shifted = index + detector_offset;
                    note_detector(shifted);
                    ++det_counts[shifted];
                } else {
                    note_observable(index);
                    ++obs_counts[index];
                }
            }
            if (component_empty)
                throw DemParseError(line_no, "empty component around '^'");

            ErrorMechanism mech;
            mech.probability = p;
            mech.detectors = fold_parity(det_counts);
            mech.observables = fold_parity(obs_counts);
            model.mechanisms.push_back(std::move(mech));
        } else if (line.name == "detector") {
            if (line.targets.size() != 1 || line.targets[0].size() < 2 || line.targets[0][0] != 'D')
                throw DemParseError(line_no, "detector takes a single D<k> target");
            const std::uint64_t index =
                parse_index(line.targets[0].substr(1), line_no, line.targets[0]) + detector_offset;
            note_detector(index);
            if (line.has_args && !line.args.empty()) {
                std::vector<double> coords;
                coords.reserve(line.args.size());
                for (const auto& a : line.args)
                    coords.push_back(parse_double(a, line_no, "coordinate"));
                coord_decls.emplace_back(index, std::move(coords));
            }
        } else if (line.name == "logical_observable") {
            if (line.has_args)
                throw DemParseError(line_no, "logical_observable takes no arguments");
            if (line.targets.size() != 1 || line.targets[0].size() < 2 || line.targets[0][0] != 'L')
                throw DemParseError(line_no, "logical_observable takes a single L<k> target");
            note_observable(parse_index(line.targets[0].substr(1), line_no, line.targets[0]));
        } else if (line.name == "shift_detectors") {
            // Coordinate arguments, when present, are ignored; only the
            // index shift matters here.
            if (line.targets.size() != 1)
                throw DemParseError(line_no, "shift_detectors takes a single shift amount");
            std::uint64_t amount = 0;
            const auto& tok = line.targets[0];
            const auto* first = tok.data();
            auto [ptr, ec] = std::from_chars(first, first + tok.size(), amount);
            if (ec != std::errc{} || ptr != first + tok.size())
                throw DemParseError(line_no, "malformed shift amount '" + tok + "'");
            detector_offset += amount;
        } else if (line.name == "repeat") {
            throw DemParseError(line_no, "repeat blocks are not supported; flatten the model first");
        } else {
            throw DemParseError(line_no, "unknown instruction '" + line.name + "'");
        }
    }

    model.num_detectors = any_detector ? static_cast<std::size_t>(max_detector) + 1 : 0;
    model.num_observables = any_observable ? static_cast<std::size_t>(max_observable) + 1 : 0;
    model.detector_coords.assign(model.num_detectors, {});
    for (auto& [index, coords] : coord_decls) {
        auto& slot = model.detector_coords[index];
        if (!slot.empty() && slot != coords)
            throw std::runtime_error("detector D" + std::to_string(index) +
                                     " declared with conflicting coordinates");
        slot = std::move(coords);
    }
    return model;
}

DemModel parse_dem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return parse_dem(in);
}

std::vector<ErrorMechanism> canonicalize(std::vector<ErrorMechanism> mechanisms) {
    using Key = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;
    std::map<Key, double> merged;
    for (auto& m : mechanisms) {
        if (m.detectors.empty() && m.observables.empty()) continue;
        Key key{std::move(m.detectors), std::move(m.observables)};
        auto [it, fresh] = merged.try_emplace(std::move(key), m.probability);
        if (!fresh) it->second = xor_probability(it->second, m.probability);
    }
    std::vector<ErrorMechanism> out;
    out.reserve(merged.size());
    for (auto& [key, p] : merged)
        out.push_back(ErrorMechanism{p, key.first, key.second});
    return out;
}

DetectorTyping classify_detectors(const DemModel& model, const CoordinateRule& rule) {
    DetectorTyping typing;
    typing.source = TypingSource::CoordinateRule;
    typing.type_of.resize(model.num_detectors);
    for (std::size_t d = 0; d < model.num_detectors; ++d) {
        const auto& coords =
            d < model.detector_coords.size() ? model.detector_coords[d] : std::vector<double>{};
        if (coords.size() <= rule.coord_index)
            throw std::runtime_error("detector D" + std::to_string(d) +
                                     " has no coordinate at index " +
                                     std::to_string(rule.coord_index) + "; cannot type it");
        const double value = coords[rule.coord_index];
        bool found = false;
        for (const auto& [v, t] : rule.value_types) {
            if (v == value) {
                typing.type_of[d] = t;
                found = true;
                break;
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "detector D" << d << " has unmapped coordinate value " << value;
            throw std::runtime_error(msg.str());
        }
    }
    return typing;
}

DetectorTyping classify_detectors(const DemModel& model, std::istream& sidecar) {
    DetectorTyping typing;
    typing.source = TypingSource::Sidecar;
    typing.type_of.resize(model.num_detectors);
    std::vector<std::uint8_t> seen(model.num_detectors, 0);

    std::string text;
    std::size_t line_no = 0;
    while (std::getline(sidecar, text)) {
        ++line_no;
        if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
        std::stringstream ss(text);
        std::string head;
        if (!(ss >> head)) continue;
        DetectorType type;
        if (head == "X:") type = DetectorType::X;
        else if (head == "Z:") type = DetectorType::Z;
        else
            throw std::runtime_error("typing line " + std::to_string(line_no) +
                                     ": expected 'X:' or 'Z:', got '" + head + "'");
        std::uint64_t index = 0;
        while (ss >> index) {
            if (index >= model.num_detectors)
                throw std::runtime_error("typing line " + std::to_string(line_no) +
                                         ": detector index " + std::to_string(index) +
                                         " out of range");
            if (seen[index])
                throw std::runtime_error("typing line " + std::to_string(line_no) +
                                         ": detector " + std::to_string(index) +
                                         " assigned twice");
            seen[index] = 1;
            typing.type_of[index] = type;
        }
        if (!ss.eof())
            throw std::runtime_error("typing line " + std::to_string(line_no) +
                                     ": malformed detector index");
    }
    for (std::size_t d = 0; d < model.num_detectors; ++d)
        if (!seen[d])
            throw std::runtime_error("detector D" + std::to_string(d) +
                                     " is missing from the typing file");
    return typing;
}

void serialize_dem(const DemModel& model, std::ostream& out) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    std::uint64_t max_det_emitted = 0;
    bool any_det_emitted = false;
    std::uint64_t max_obs_emitted = 0;
    bool any_obs_emitted = false;

    for (const auto& m : model.mechanisms) {
        out << "error(" << m.probability << ")";
        for (std::uint32_t d : m.detectors) {
            out << " D" << d;
            any_det_emitted = true;
            max_det_emitted = std::max<std::uint64_t>(max_det_emitted, d);
        }
        for (std::uint32_t o : m.observables) {
            out << " L" << o;
            any_obs_emitted = true;
            max_obs_emitted = std::max<std::uint64_t>(max_obs_emitted, o);
        }
        out << '\n';
    }
    for (std::size_t d = 0; d < model.detector_coords.size(); ++d) {
        const auto& coords = model.detector_coords[d];
        if (coords.empty()) continue;
        out << "detector(";
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (i) out << ',';
            out << coords[i];
        }
        out << ") D" << d << '\n';
        any_det_emitted = true;
        max_det_emitted = std::max<std::uint64_t>(max_det_emitted, d);
    }
    if (model.num_detectors > 0 &&
        (!any_det_emitted || max_det_emitted + 1 < model.num_detectors))
        out << "detector D" << model.num_detectors - 1 << '\n';
    if (model.num_observables > 0 &&
        (!any_obs_emitted || max_obs_emitted + 1 < model.num_observables))
        out << "logical_observable L" << model.num_observables - 1 << '\n';
    out.precision(old_precision);
}

} // namespace gari
