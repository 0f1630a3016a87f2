#include "honad/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "honad/errors.hpp"
#include "honad/util.hpp"

namespace honad {

void dedupe_steps(std::vector<EntityId>& steps) {
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
}

Corpus parse_corpus(std::istream& in, bool dedupe, const std::string& source_name) {
    Corpus corpus;
    std::map<int, std::vector<Trajectory>> by_window;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        auto where = [&] { return source_name + ":" + std::to_string(line_no); };
        if (fields.size() < 3)
            throw ParseError(where() + ": expected <window> <id> <entity>..., got " +
                             std::to_string(fields.size()) + " fields");
        std::uint64_t w = parse_u64(fields[0], where() + ": window index");
        if (w < 1)
            throw ParseError(where() + ": window index must be >= 1");

        Trajectory traj;
        traj.id = std::string(fields[1]);
        traj.steps.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            try {
                traj.steps.push_back(corpus.vocab.intern(fields[i]));
            } catch (const ParseError& e) {
                throw ParseError(where() + ": " + e.what());
            }
        }
        if (dedupe) dedupe_steps(traj.steps);
        by_window[static_cast<int>(w)].push_back(std::move(traj));
    }

    int expected = by_window.empty() ? 0 : by_window.begin()->first;
    for (auto& [index, trajectories] : by_window) {
        if (index != expected)
            throw StructuralError(source_name + ": window indices are not contiguous (" +
                                  std::to_string(expected) + " missing, found " +
                                  std::to_string(index) + ")");
        ++expected;
        corpus.windows.push_back(Window{index, std::move(trajectories)});
    }

    std::unordered_set<EntityId> seen;
    for (const auto& window : corpus.windows)
        for (const auto& traj : window.trajectories) {
            corpus.stats.total_steps += traj.steps.size();
            seen.insert(traj.steps.begin(), traj.steps.end());
        }
    corpus.stats.unique_entities = seen.size();
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, bool dedupe) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open corpus file: " + path.string());
    return parse_corpus(in, dedupe, path.filename().string());
}

void save_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& window : corpus.windows)
        for (const auto& traj : window.trajectories) {
            out << window.index << ' ' << traj.id;
            for (EntityId id : traj.steps) out << ' ' << corpus.vocab.token(id);
            out << '\n';
        }
}

std::string format_corpus(const Corpus& corpus) {
    std::ostringstream out;
    save_corpus(corpus, out);
    return out.str();
}

std::vector<Landmark> load_landmarks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open landmark file: " + path.string());
    std::vector<Landmark> landmarks;
    std::unordered_set<std::string> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        auto where = path.filename().string() + ":" + std::to_string(line_no);
        if (fields.size() != 3)
            throw ParseError(where + ": expected <label> <lat> <lon>");
        Landmark lm;
        lm.label = std::string(fields[0]);
        Vocab::validate(lm.label);
        lm.lat_deg = parse_double(fields[1], where + ": latitude");
        lm.lon_deg = parse_double(fields[2], where + ": longitude");
        if (!std::isfinite(lm.lat_deg) || !std::isfinite(lm.lon_deg))
            throw ParseError(where + ": coordinates must be finite");
        if (!labels.insert(lm.label).second)
            throw ParseError(where + ": duplicate landmark label '" + lm.label + "'");
        landmarks.push_back(std::move(lm));
    }
    return landmarks;
}

double great_circle_angle(GeoPoint a, GeoPoint b) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double phi1 = a.lat_deg * deg, phi2 = b.lat_deg * deg;
    const double dphi = (b.lat_deg - a.lat_deg) * deg;
    const double dlam = (b.lon_deg - a.lon_deg) * deg;
    const double s1 = std::sin(dphi / 2), s2 = std::sin(dlam / 2);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

Trajectory discretize(std::span<const GeoPoint> points,
                      const std::vector<Landmark>& landmarks,
                      Vocab& vocab,
                      std::string trajectory_id) {
    if (landmarks.empty())
        throw ArgumentError("discretize: landmark set is empty");
    Trajectory traj;
    traj.id = std::move(trajectory_id);
    for (const GeoPoint& p : points) {
        if (!std::isfinite(p.lat_deg) || !std::isfinite(p.lon_deg))
            throw ArgumentError("discretize: non-finite coordinate");
        const Landmark* best = &landmarks.front();
        double best_angle = great_circle_angle(p, {best->lat_deg, best->lon_deg});
        for (std::size_t i = 1; i < landmarks.size(); ++i) {
            double angle = great_circle_angle(p, {landmarks[i].lat_deg, landmarks[i].lon_deg});
            if (angle < best_angle ||
                (angle == best_angle && landmarks[i].label < best->label)) {
                best = &landmarks[i];
                best_angle = angle;
            }
        }
        traj.steps.push_back(vocab.intern(best->label));
    }
    dedupe_steps(traj.steps);
    return traj;
}

} // namespace honad
