#pragma once

#include "cohortsim/geo.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cohortsim {

using StationId = std::int32_t;
using LineId = std::int32_t;

inline constexpr double kTransferMinutes = 7.0;
inline constexpr std::size_t kMaxLegs = 3;

struct Station {
    StationId id = 0;
    std::string name;
    LatLon location;
    std::vector<LineId> lines;
};

struct Line {
    LineId id = 0;
    std::vector<StationId> stations;
    std::vector<double> segment_times; ///< minutes; segment k joins stations[k] and stations[k+1]

    std::optional<std::size_t> position_of(StationId station) const;
    /// Minutes spent riding between two positions on this line (either direction).
    double ride_time(std::size_t from_pos, std::size_t to_pos) const;
    std::size_t segment_count() const { return segment_times.size(); }
};

enum class Direction : std::uint8_t { up, down };

inline Direction reversed(Direction d) { return d == Direction::up ? Direction::down : Direction::up; }

struct RouteLeg {
    LineId line = 0;
    StationId board = 0;
    StationId alight = 0;
    double duration = 0.0;
    std::size_t board_pos = 0;  ///< index of `board` within the line
    std::size_t alight_pos = 0; ///< index of `alight` within the line

    Direction direction() const { return board_pos < alight_pos ? Direction::up : Direction::down; }
    /// Half-open range [first, last) of line segments ridden on this leg.
    std::pair<std::size_t, std::size_t> segments() const
    {
        return board_pos < alight_pos ? std::pair{board_pos, alight_pos} : std::pair{alight_pos, board_pos};
    }
};

struct Route {
    std::vector<RouteLeg> legs;
    double total_time = 0.0;

    std::size_t transfers() const { return legs.empty() ? 0 : legs.size() - 1; }
};

/// Suburban rail graph plus the precomputed shortest-route table.
///
/// Station and line ids are arbitrary non-negative integers; internally the
/// route table is a dense matrix over station indices.
class RailNetwork {
public:
    RailNetwork() = default;
    /// Validates ids, references and segment times; derives each station's line set.
    RailNetwork(std::vector<Station> stations, std::vector<Line> lines);

    const std::vector<Station>& stations() const { return stations_; }
    const std::vector<Line>& lines() const { return lines_; }
    const Station& station(StationId id) const;
    const Line& line(LineId id) const;
    std::size_t station_index(StationId id) const;
    std::size_t line_index(LineId id) const;
    bool has_station(StationId id) const { return station_index_.contains(id); }

    void precompute_routes();
    bool routes_ready() const { return !route_table_.empty() || stations_.empty(); }
    /// Shortest route of at most three legs, or nullptr when none exists (or from == to).
    const Route* route(StationId from, StationId to) const;
    std::size_t route_count() const;

private:
    std::vector<Station> stations_;
    std::vector<Line> lines_;
    std::unordered_map<StationId, std::size_t> station_index_;
    std::unordered_map<LineId, std::size_t> line_index_;
    std::vector<std::optional<Route>> route_table_;
};

/// Reads the sectioned text format:
///
///     [stations]
///     <id>, <name>, <lat>, <lon>
///     [lines]
///     <line id>, <station id> <station id> ...
///     [segment_times]
///     <line id>, <minutes> <minutes> ...
///
/// Blank lines and lines starting with '#' are ignored.
RailNetwork parse_network(std::istream& in);
RailNetwork load_network(const std::filesystem::path& path);
void write_network(std::ostream& out, const RailNetwork& network);

/// Returns a copy of `network` with its route table populated.
RailNetwork precompute_routes(RailNetwork network);

/// Orders two candidate routes: shorter total time, then fewer legs, then the
/// lexicographically smaller (line id, board id) sequence.
bool route_preferred(const Route& a, const Route& b);

} // namespace cohortsim
