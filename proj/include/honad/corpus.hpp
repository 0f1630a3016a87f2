#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "honad/vocab.hpp"

namespace honad {

/// One entity sequence (a user session, a voyage, a taxi trip).
struct Trajectory {
    std::string id;
    std::vector<EntityId> steps; // length >= 1
};

/// All trajectories sharing one time-window index.
struct Window {
    int index = 0; // t >= 1
    std::vector<Trajectory> trajectories;
};

struct CorpusStats {
    std::uint64_t total_steps = 0;     // L: sum of trajectory lengths
    std::uint64_t unique_entities = 0; // N
};

/// Windowed sequential data. Immutable after loading; safe to share
/// read-only across threads.
struct Corpus {
    Vocab vocab;
    std::vector<Window> windows; // sorted by index, contiguous
    CorpusStats stats;
};

/// Removes consecutive duplicate steps in place. Idempotent.
void dedupe_steps(std::vector<EntityId>& steps);

/// Loads a trajectory file: one record per line,
///   <window-index> <trajectory-id> <entity> <entity> ...
/// Blank lines and lines starting with '#' are skipped. Windows are grouped
/// and sorted by index; indices must be contiguous. With dedupe enabled,
/// consecutive equal entities within each trajectory collapse to one.
Corpus load_corpus(const std::filesystem::path& path, bool dedupe = false);

/// Parses corpus text from a stream (same format as load_corpus).
Corpus parse_corpus(std::istream& in, bool dedupe, const std::string& source_name);

/// Canonical serialization: one trajectory per line, windows in order.
/// Parsing then serializing a canonical file is byte-identical (modulo
/// trailing whitespace) when dedupe is off.
void save_corpus(const Corpus& corpus, std::ostream& out);
std::string format_corpus(const Corpus& corpus);

/// A named geographic point of interest.
struct Landmark {
    std::string label;
    double lat_deg = 0;
    double lon_deg = 0;
};

struct GeoPoint {
    double lat_deg = 0;
    double lon_deg = 0;
};

/// Loads a landmark file: one per line, `<label> <lat> <lon>`.
/// Labels must be unique.
std::vector<Landmark> load_landmarks(const std::filesystem::path& path);

/// Central angle between two points (radians); monotone in great-circle
/// distance, so usable directly for nearest-landmark queries.
double great_circle_angle(GeoPoint a, GeoPoint b);

/// Maps each point to its geodesically nearest landmark (ties broken by
/// lowest label), collapsing consecutive duplicates. Labels are interned
/// into `vocab`.
Trajectory discretize(std::span<const GeoPoint> points,
                      const std::vector<Landmark>& landmarks,
                      Vocab& vocab,
                      std::string trajectory_id = {});

} // namespace honad
