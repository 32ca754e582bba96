#include "cohortsim/rail_network.hpp"

#include "cohortsim/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace cohortsim {

std::optional<std::size_t> Line::position_of(StationId station) const
{
    const auto it = std::find(stations.begin(), stations.end(), station);
    if (it == stations.end()) return std::nullopt;
    return static_cast<std::size_t>(it - stations.begin());
}

double Line::ride_time(std::size_t from_pos, std::size_t to_pos) const
{
    if (from_pos > to_pos) std::swap(from_pos, to_pos);
    double total = 0.0;
    for (std::size_t k = from_pos; k < to_pos; ++k) total += segment_times[k];
    return total;
}

RailNetwork::RailNetwork(std::vector<Station> stations, std::vector<Line> lines)
    : stations_(std::move(stations))
    , lines_(std::move(lines))
{
    for (std::size_t i = 0; i < stations_.size(); ++i) {
        auto& s = stations_[i];
        if (s.id < 0) throw ValidationError("station id must be non-negative: " + std::to_string(s.id));
        if (!(s.location.lat >= -90.0 && s.location.lat <= 90.0))
            throw ValidationError("station " + std::to_string(s.id) + ": latitude out of range");
        if (!(s.location.lon >= -180.0 && s.location.lon <= 180.0))
            throw ValidationError("station " + std::to_string(s.id) + ": longitude out of range");
        if (!station_index_.emplace(s.id, i).second)
            throw ValidationError("duplicate station id " + std::to_string(s.id));
        s.lines.clear();
    }
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const auto& l = lines_[i];
        const auto tag = "line " + std::to_string(l.id);
        if (l.id < 0) throw ValidationError("line id must be non-negative: " + std::to_string(l.id));
        if (!line_index_.emplace(l.id, i).second) throw ValidationError("duplicate " + tag);
        if (l.stations.size() < 2) throw ValidationError(tag + ": needs at least two stations");
        if (l.segment_times.size() != l.stations.size() - 1)
            throw ValidationError(tag + ": expected " + std::to_string(l.stations.size() - 1) + " segment times, got " +
                                  std::to_string(l.segment_times.size()));
        for (const double t : l.segment_times) {
            if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError(tag + ": non-positive segment time");
        }
        std::unordered_set<StationId> seen;
        for (const StationId s : l.stations) {
            const auto it = station_index_.find(s);
            if (it == station_index_.end())
                throw ValidationError(tag + ": dangling reference to undefined station " + std::to_string(s));
            if (!seen.insert(s).second) throw ValidationError(tag + ": station " + std::to_string(s) + " repeated");
            stations_[it->second].lines.push_back(l.id);
        }
    }
    for (auto& s : stations_) {
        if (s.lines.empty()) throw ValidationError("station " + std::to_string(s.id) + " belongs to no line");
        std::sort(s.lines.begin(), s.lines.end());
    }
}

const Station& RailNetwork::station(StationId id) const { return stations_[station_index(id)]; }
const Line& RailNetwork::line(LineId id) const { return lines_[line_index(id)]; }

std::size_t RailNetwork::station_index(StationId id) const
{
    const auto it = station_index_.find(id);
    if (it == station_index_.end()) throw ValidationError("unknown station id " + std::to_string(id));
    return it->second;
}

std::size_t RailNetwork::line_index(LineId id) const
{
    const auto it = line_index_.find(id);
    if (it == line_index_.end()) throw ValidationError("unknown line id " + std::to_string(id));
    return it->second;
}

const Route* RailNetwork::route(StationId from, StationId to) const
{
    if (route_table_.empty()) return nullptr;
    const auto a = station_index_.find(from);
    const auto b = station_index_.find(to);
    if (a == station_index_.end() || b == station_index_.end()) return nullptr;
    const auto& slot = route_table_[a->second * stations_.size() + b->second];
    return slot ? &*slot : nullptr;
}

std::size_t RailNetwork::route_count() const
{
    return static_cast<std::size_t>(std::count_if(route_table_.begin(), route_table_.end(),
                                                  [](const auto& r) { return r.has_value(); }));
}

bool route_preferred(const Route& a, const Route& b)
{
    constexpr double eps = 1e-9;
    if (a.total_time < b.total_time - eps) return true;
    if (b.total_time < a.total_time - eps) return false;
    if (a.legs.size() != b.legs.size()) return a.legs.size() < b.legs.size();
    for (std::size_t k = 0; k < a.legs.size(); ++k) {
        const auto ka = std::pair{a.legs[k].line, a.legs[k].board};
        const auto kb = std::pair{b.legs[k].line, b.legs[k].board};
        if (ka != kb) return ka < kb;
    }
    return false;
}

void RailNetwork::precompute_routes()
{
    const std::size_t n = stations_.size();
    route_table_.assign(n * n, std::nullopt);

    Route partial;
    for (std::size_t origin = 0; origin < n; ++origin) {
        const StationId origin_id = stations_[origin].id;
        // Depth-first over leg sequences; each leg rides one line to any other
        // station on it, and consecutive legs must change line.
        std::function<void(StationId, LineId)> extend = [&](StationId at, LineId previous_line) {
            for (const LineId line_id : station(at).lines) {
                if (line_id == previous_line) continue;
                const Line& ln = line(line_id);
                const std::size_t from_pos = *ln.position_of(at);
                for (std::size_t to_pos = 0; to_pos < ln.stations.size(); ++to_pos) {
                    if (to_pos == from_pos) continue;
                    const StationId to = ln.stations[to_pos];
                    RouteLeg leg{line_id, at, to, ln.ride_time(from_pos, to_pos), from_pos, to_pos};
                    const double added = leg.duration + (partial.legs.empty() ? 0.0 : kTransferMinutes);
                    partial.legs.push_back(leg);
                    partial.total_time += added;
                    if (to != origin_id) {
                        auto& slot = route_table_[origin * n + station_index(to)];
                        if (!slot || route_preferred(partial, *slot)) slot = partial;
                    }
                    if (partial.legs.size() < kMaxLegs) extend(to, line_id);
                    partial.legs.pop_back();
                    partial.total_time -= added;
                }
            }
        };
        partial = Route{};
        extend(origin_id, -1);
    }
    // Re-sum to remove any drift from the incremental add/subtract above.
    for (auto& slot : route_table_) {
        if (!slot) continue;
        double t = kTransferMinutes * static_cast<double>(slot->transfers());
        for (const auto& leg : slot->legs) t += leg.duration;
        slot->total_time = t;
    }
}

RailNetwork precompute_routes(RailNetwork network)
{
    network.precompute_routes();
    return network;
}

RailNetwork parse_network(std::istream& in)
{
    enum class Section { none, stations, lines, segment_times };
    Section section = Section::none;
    std::vector<Station> stations;
    std::vector<Line> lines;
    std::unordered_map<LineId, std::vector<double>> times;

    std::string raw;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("network line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string text = detail::trim(raw);
        if (text.empty() || text.front() == '#') continue;
        if (text.front() == '[') {
            if (text == "[stations]") section = Section::stations;
            else if (text == "[lines]") section = Section::lines;
            else if (text == "[segment_times]") section = Section::segment_times;
            else fail("unknown section " + text);
            continue;
        }
        const auto fields = detail::split(text, ',');
        try {
            switch (section) {
            case Section::none: fail("record outside of a section"); break;
            case Section::stations: {
                if (fields.size() != 4) fail("station record needs 4 fields (id, name, lat, lon)");
                Station s;
                s.id = detail::parse_int(fields[0]);
                s.name = fields[1];
                s.location = {detail::parse_double(fields[2]), detail::parse_double(fields[3])};
                stations.push_back(std::move(s));
                break;
            }
            case Section::lines: {
                if (fields.size() != 2) fail("line record needs 2 fields (id, station ids)");
                Line l;
                l.id = detail::parse_int(fields[0]);
                for (const auto& tok : detail::split_ws(fields[1])) l.stations.push_back(detail::parse_int(tok));
                lines.push_back(std::move(l));
                break;
            }
            case Section::segment_times: {
                if (fields.size() != 2) fail("segment_times record needs 2 fields (line id, minutes)");
                const LineId id = detail::parse_int(fields[0]);
                std::vector<double> t;
                for (const auto& tok : detail::split_ws(fields[1])) t.push_back(detail::parse_double(tok));
                if (!times.emplace(id, std::move(t)).second) fail("duplicate segment_times for line " + fields[0]);
                break;
            }
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    for (auto& l : lines) {
        auto it = times.find(l.id);
        if (it == times.end()) throw ValidationError("line " + std::to_string(l.id) + " has no segment_times record");
        l.segment_times = std::move(it->second);
        times.erase(it);
    }
    if (!times.empty())
        throw ValidationError("segment_times given for undefined line " + std::to_string(times.begin()->first));
    return RailNetwork(std::move(stations), std::move(lines));
}

RailNetwork load_network(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file " + path.string());
    return parse_network(in);
}

void write_network(std::ostream& out, const RailNetwork& network)
{
    std::ostringstream buf;
    buf.precision(10);
    buf << "[stations]\n";
    for (const auto& s : network.stations())
        buf << s.id << ", " << s.name << ", " << s.location.lat << ", " << s.location.lon << '\n';
    buf << "[lines]\n";
    for (const auto& l : network.lines()) {
        buf << l.id << ',';
        for (const auto s : l.stations) buf << ' ' << s;
        buf << '\n';
    }
    buf << "[segment_times]\n";
    for (const auto& l : network.lines()) {
        buf << l.id << ',';
        for (const auto t : l.segment_times) buf << ' ' << t;
        buf << '\n';
    }
    out << buf.str();
}

} // namespace cohortsim
