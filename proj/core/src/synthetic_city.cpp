#include "cohortsim/synthetic_city.hpp"

#include "binary_io.hpp"
#include "cohortsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace cohortsim {

namespace {

void require_normalized(const std::vector<double>& p, const std::string& what)
{
    if (p.empty()) throw ValidationError(what + " is empty");
    double sum = 0.0;
    for (const double v : p) {
        if (!(v >= 0.0)) throw ValidationError(what + " has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError(what + " sums to " + std::to_string(sum) + ", not 1");
}

template <typename Bins>
std::vector<double> shares_of(const Bins& bins)
{
    std::vector<double> out;
    out.reserve(bins.size());
    for (const auto& b : bins) out.push_back(b.share);
    return out;
}

LatLon uniform_in_disk(const Ward& w, Rng& rng)
{
    const double r = w.radius_km * std::sqrt(uniform01(rng));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    return offset_km(w.centroid, r * std::sin(theta), r * std::cos(theta));
}

int draw_size(const std::vector<SizeBin>& bins, std::discrete_distribution<std::size_t>& pick, Rng& rng)
{
    const auto& bin = bins[pick(rng)];
    return std::uniform_int_distribution<int>(bin.min_size, bin.max_size)(rng);
}

double band_share_overlapping(const std::vector<AgeBand>& bands, int lo, int hi)
{
    double s = 0.0;
    for (const auto& b : bands) {
        if (b.max_age >= lo && b.min_age <= hi) s += b.share;
    }
    return s;
}

} // namespace

void CityConfig::validate() const
{
    if (population == 0) return;
    require_normalized(shares_of(age_distribution), "age distribution");
    for (const auto& b : age_distribution) {
        if (b.min_age < 0 || b.max_age < b.min_age) throw ValidationError("malformed age band");
    }
    require_normalized(household_size_distribution, "household-size distribution");
    if (!(unemployment_ratio >= 0.0 && unemployment_ratio <= 1.0))
        throw ValidationError("unemployment ratio outside [0,1]");
    if (wards.empty()) throw ValidationError("ward table is empty");
    std::vector<double> ward_shares;
    for (std::size_t i = 0; i < wards.size(); ++i) {
        const auto& w = wards[i];
        if (w.id != static_cast<WardId>(i)) throw ValidationError("ward ids must be 0..n-1 in table order");
        if (!(w.population_share >= 0.0 && w.population_share <= 1.0))
            throw ValidationError("ward " + w.name + ": population share outside [0,1]");
        if (!(w.radius_km > 0.0)) throw ValidationError("ward " + w.name + ": radius must be positive");
        if (w.outflow.size() != wards.size())
            throw ValidationError("ward " + w.name + ": outflow row has wrong length");
        require_normalized(w.outflow, "outflow row of ward " + w.name);
        ward_shares.push_back(w.population_share);
    }
    require_normalized(ward_shares, "ward population shares");
    if (band_share_overlapping(age_distribution, school_age_min, school_age_max) > 0.0 && school_sizes.empty())
        throw ValidationError("school-size distribution is empty while school-age share is positive");
    if (band_share_overlapping(age_distribution, working_age_min, working_age_max) > 0.0 && unemployment_ratio < 1.0 &&
        workplace_sizes.empty())
        throw ValidationError("workplace-size distribution is empty while workers exist");
    if (!school_sizes.empty()) require_normalized(shares_of(school_sizes), "school-size distribution");
    if (!workplace_sizes.empty()) require_normalized(shares_of(workplace_sizes), "workplace-size distribution");
    for (const auto* bins : {&school_sizes, &workplace_sizes}) {
        for (const auto& b : *bins) {
            if (b.min_size < 1 || b.max_size < b.min_size) throw ValidationError("malformed size bin");
        }
    }
    if (class_size < 1) throw ValidationError("class size must be positive");
    if (project_size_min < 1 || project_size_max < project_size_min) throw ValidationError("malformed project size range");
    if (!(road_speed_kmh > 0.0)) throw ValidationError("road speed must be positive");
    if (!(walking_speed_kmh > 0.0)) throw ValidationError("walking speed must be positive");
    if (!(detour_index >= 1.0)) throw ValidationError("detour index must be >= 1");
    if (candidate_station_count < 1) throw ValidationError("candidate station count must be >= 1");
}

std::size_t City::train_commuters() const
{
    return static_cast<std::size_t>(
        std::count_if(agents.begin(), agents.end(), [](const Agent& a) { return a.commute == CommuteMode::train; }));
}

double City::train_share() const
{
    return agents.empty() ? 0.0 : static_cast<double>(train_commuters()) / static_cast<double>(agents.size());
}

double distance_kernel(double distance_km, double a_km, double b) { return 1.0 / (1.0 + std::pow(distance_km / a_km, b)); }

std::vector<StationId> nearest_stations(const RailNetwork& network, LatLon p, int k)
{
    std::vector<std::pair<double, StationId>> by_distance;
    by_distance.reserve(network.stations().size());
    for (const auto& s : network.stations()) by_distance.emplace_back(geodesic_km(p, s.location), s.id);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), by_distance.size());
    std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(take), by_distance.end());
    std::vector<StationId> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(by_distance[i].second);
    return out;
}

CommuteChoice choose_commute_mode(LatLon home, LatLon work, const RailNetwork& network, const CityConfig& config)
{
    CommuteChoice choice;
    choice.road_minutes = geodesic_km(home, work) * config.detour_index / config.road_speed_kmh * 60.0;

    const auto walk_minutes = [&](LatLon a, LatLon b) {
        return geodesic_km(a, b) * config.detour_index / config.walking_speed_kmh * 60.0;
    };
    const auto origins = nearest_stations(network, home, config.candidate_station_count);
    const auto destinations = nearest_stations(network, work, config.candidate_station_count);
    for (const StationId o : origins) {
        const double access = walk_minutes(home, network.station(o).location);
        for (const StationId d : destinations) {
            const Route* route = network.route(o, d);
            if (route == nullptr) continue;
            const double t = access + route->total_time + walk_minutes(network.station(d).location, work);
            if (!choice.train_minutes || t < *choice.train_minutes) {
                choice.train_minutes = t;
                choice.origin = o;
                choice.destination = d;
            }
        }
    }
    if (choice.train_minutes && *choice.train_minutes < choice.road_minutes) {
        choice.mode = CommuteMode::train;
    } else {
        choice.mode = CommuteMode::road;
        choice.origin = -1;
        choice.destination = -1;
    }
    return choice;
}

City generate_city(const CityConfig& config, const RailNetwork& network)
{
    config.validate();
    City city;
    city.wards = config.wards;
    city.ward_population.assign(config.wards.size(), 0);
    if (config.population == 0) return city;
    if (!network.routes_ready()) throw ValidationError("rail network routes must be precomputed before generating a city");

    Rng rng = RngStreams(config.seed).stream("city");
    std::discrete_distribution<std::size_t> pick_ward(
        [&] {
            std::vector<double> w;
            for (const auto& ward : config.wards) w.push_back(ward.population_share);
            return std::discrete_distribution<std::size_t>(w.begin(), w.end());
        }());
    std::discrete_distribution<std::size_t> pick_household_size(config.household_size_distribution.begin(),
                                                                config.household_size_distribution.end());
    const auto age_shares = shares_of(config.age_distribution);
    std::discrete_distribution<std::size_t> pick_age_band(age_shares.begin(), age_shares.end());

    // Households and agents.
    city.agents.reserve(config.population);
    while (city.agents.size() < config.population) {
        const auto remaining = config.population - city.agents.size();
        const auto size = std::min<std::size_t>(pick_household_size(rng) + 1, remaining);
        Household h;
        h.id = static_cast<SpaceId>(city.households.size());
        h.ward = static_cast<WardId>(pick_ward(rng));
        const Ward& ward = config.wards[static_cast<std::size_t>(h.ward)];
        h.location = uniform_in_disk(ward, rng);
        const double weight = distance_kernel(geodesic_km(h.location, ward.centroid), config.kernel_a_km, config.kernel_b);
        for (std::size_t k = 0; k < size; ++k) {
            const auto& band = config.age_distribution[pick_age_band(rng)];
            Agent a;
            a.id = static_cast<AgentId>(city.agents.size());
            a.age = static_cast<std::int16_t>(std::uniform_int_distribution<int>(band.min_age, band.max_age)(rng));
            a.ward = h.ward;
            a.household = h.id;
            a.community_weight = weight;
            h.members.push_back(a.id);
            city.agents.push_back(a);
            ++city.ward_population[static_cast<std::size_t>(h.ward)];
        }
        city.households.push_back(std::move(h));
    }

    const std::size_t num_wards = config.wards.size();
    std::vector<std::vector<AgentId>> students_by_ward(num_wards);
    std::vector<std::vector<AgentId>> workers_by_work_ward(num_wards);
    std::vector<std::discrete_distribution<std::size_t>> outflow;
    for (const auto& w : config.wards) outflow.emplace_back(w.outflow.begin(), w.outflow.end());

    for (auto& a : city.agents) {
        if (a.age >= config.school_age_min && a.age <= config.school_age_max) {
            students_by_ward[static_cast<std::size_t>(a.ward)].push_back(a.id);
        } else if (a.age >= config.working_age_min && a.age <= config.working_age_max &&
                   !bernoulli(rng, config.unemployment_ratio)) {
            const auto work_ward = outflow[static_cast<std::size_t>(a.ward)](rng);
            workers_by_work_ward[work_ward].push_back(a.id);
        }
    }

    // Schools in the home ward, classes of similar age.
    if (!config.school_sizes.empty()) {
        auto pick_bin = std::discrete_distribution<std::size_t>(
            [&] { auto s = shares_of(config.school_sizes); return std::discrete_distribution<std::size_t>(s.begin(), s.end()); }());
        for (std::size_t w = 0; w < num_wards; ++w) {
            auto& pool = students_by_ward[w];
            std::shuffle(pool.begin(), pool.end(), rng);
            std::size_t next = 0;
            while (next < pool.size()) {
                const auto size = std::min<std::size_t>(static_cast<std::size_t>(draw_size(config.school_sizes, pick_bin, rng)),
                                                        pool.size() - next);
                Venue school;
                school.id = static_cast<SpaceId>(city.schools.size());
                school.ward = static_cast<WardId>(w);
                school.location = uniform_in_disk(config.wards[w], rng);
                school.size = static_cast<std::int32_t>(size);
                std::vector<AgentId> roster(pool.begin() + static_cast<std::ptrdiff_t>(next),
                                            pool.begin() + static_cast<std::ptrdiff_t>(next + size));
                std::stable_sort(roster.begin(), roster.end(), [&](AgentId x, AgentId y) {
                    return city.agents[static_cast<std::size_t>(x)].age < city.agents[static_cast<std::size_t>(y)].age;
                });
                for (std::size_t c = 0; c < roster.size(); c += static_cast<std::size_t>(config.class_size)) {
                    Subgroup klass;
                    klass.id = static_cast<SpaceId>(city.classes.size());
                    klass.venue = school.id;
                    const auto end = std::min(roster.size(), c + static_cast<std::size_t>(config.class_size));
                    klass.members.assign(roster.begin() + static_cast<std::ptrdiff_t>(c),
                                         roster.begin() + static_cast<std::ptrdiff_t>(end));
                    for (const AgentId m : klass.members) {
                        auto& agent = city.agents[static_cast<std::size_t>(m)];
                        agent.school = school.id;
                        agent.school_class = klass.id;
                    }
                    city.classes.push_back(std::move(klass));
                }
                city.schools.push_back(school);
                next += size;
            }
        }
    }

    // Workplaces uniformly placed in the work ward; project teams inside them.
    if (!config.workplace_sizes.empty()) {
        auto pick_bin = [&] { auto s = shares_of(config.workplace_sizes); return std::discrete_distribution<std::size_t>(s.begin(), s.end()); }();
        std::uniform_int_distribution<int> project_size(config.project_size_min, config.project_size_max);
        for (std::size_t w = 0; w < num_wards; ++w) {
            auto& pool = workers_by_work_ward[w];
            std::shuffle(pool.begin(), pool.end(), rng);
            std::size_t next = 0;
            while (next < pool.size()) {
                const auto size = std::min<std::size_t>(
                    static_cast<std::size_t>(draw_size(config.workplace_sizes, pick_bin, rng)), pool.size() - next);
                Venue office;
                office.id = static_cast<SpaceId>(city.workplaces.size());
                office.ward = static_cast<WardId>(w);
                office.location = uniform_in_disk(config.wards[w], rng);
                office.size = static_cast<std::int32_t>(size);
                std::size_t k = next;
                while (k < next + size) {
                    const auto team = std::min<std::size_t>(static_cast<std::size_t>(project_size(rng)), next + size - k);
                    Subgroup project;
                    project.id = static_cast<SpaceId>(city.projects.size());
                    project.venue = office.id;
                    project.members.assign(pool.begin() + static_cast<std::ptrdiff_t>(k),
                                           pool.begin() + static_cast<std::ptrdiff_t>(k + team));
                    for (const AgentId m : project.members) {
                        auto& agent = city.agents[static_cast<std::size_t>(m)];
                        agent.workplace = office.id;
                        agent.project = project.id;
                    }
                    city.projects.push_back(std::move(project));
                    k += team;
                }
                city.workplaces.push_back(office);
                next += size;
            }
        }
    }

    for (auto& a : city.agents) {
        if (!a.is_worker()) continue;
        const LatLon home = city.households[static_cast<std::size_t>(a.household)].location;
        const LatLon work = city.workplaces[static_cast<std::size_t>(a.workplace)].location;
        a.commute_km = geodesic_km(home, work);
        const auto choice = choose_commute_mode(home, work, network, config);
        a.commute = choice.mode;
        a.origin_station = choice.origin;
        a.destination_station = choice.destination;
    }
    return city;
}

// ---------------------------------------------------------------------------
// Snapshot

namespace {
constexpr char kCityMagic[8] = {'C', 'O', 'H', 'C', 'I', 'T', 'Y', '1'};
constexpr std::uint32_t kCityVersion = 1;

void write_venues(detail::BinaryWriter& w, const std::vector<Venue>& venues)
{
    w.put<std::uint64_t>(venues.size());
    for (const auto& v : venues) {
        w.put(v.id);
        w.put(v.ward);
        w.put(v.location.lat);
        w.put(v.location.lon);
        w.put(v.size);
    }
}

std::vector<Venue> read_venues(detail::BinaryReader& r)
{
    std::vector<Venue> out(r.get<std::uint64_t>());
    for (auto& v : out) {
        v.id = r.get<SpaceId>();
        v.ward = r.get<WardId>();
        v.location.lat = r.get<double>();
        v.location.lon = r.get<double>();
        v.size = r.get<std::int32_t>();
    }
    return out;
}

void write_groups(detail::BinaryWriter& w, const std::vector<Subgroup>& groups)
{
    w.put<std::uint64_t>(groups.size());
    for (const auto& g : groups) {
        w.put(g.id);
        w.put(g.venue);
        w.put_vector(g.members);
    }
}

std::vector<Subgroup> read_groups(detail::BinaryReader& r)
{
    std::vector<Subgroup> out(r.get<std::uint64_t>());
    for (auto& g : out) {
        g.id = r.get<SpaceId>();
        g.venue = r.get<SpaceId>();
        g.members = r.get_vector<AgentId>();
    }
    return out;
}
} // namespace

void write_city(std::ostream& out, const City& city)
{
    detail::BinaryWriter w(out);
    w.put_bytes(kCityMagic, sizeof kCityMagic);
    w.put(kCityVersion);
    w.put<std::uint64_t>(city.wards.size());
    for (const auto& ward : city.wards) {
        w.put(ward.id);
        w.put_string(ward.name);
        w.put(ward.centroid.lat);
        w.put(ward.centroid.lon);
        w.put(ward.radius_km);
        w.put(ward.population_share);
        w.put(static_cast<std::uint8_t>(ward.density));
        w.put_vector(ward.outflow);
    }
    w.put<std::uint64_t>(city.agents.size());
    for (const auto& a : city.agents) {
        w.put(a.id);
        w.put(a.age);
        w.put(a.ward);
        w.put(a.household);
        w.put(a.workplace);
        w.put(a.project);
        w.put(a.school);
        w.put(a.school_class);
        w.put(static_cast<std::uint8_t>(a.commute));
        w.put(a.origin_station);
        w.put(a.destination_station);
        w.put(a.community_weight);
        w.put(a.commute_km);
    }
    w.put<std::uint64_t>(city.households.size());
    for (const auto& h : city.households) {
        w.put(h.id);
        w.put(h.ward);
        w.put(h.location.lat);
        w.put(h.location.lon);
        w.put_vector(h.members);
    }
    write_venues(w, city.workplaces);
    write_groups(w, city.projects);
    write_venues(w, city.schools);
    write_groups(w, city.classes);
    w.put_vector(city.ward_population);
}

City read_city(std::istream& in)
{
    detail::BinaryReader r(in);
    char magic[8];
    r.get_bytes(magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kCityMagic)))
        throw ParseError("not a city snapshot (bad magic)");
    if (r.get<std::uint32_t>() != kCityVersion) throw ParseError("unsupported city snapshot version");
    City city;
    city.wards.resize(r.get<std::uint64_t>());
    for (auto& ward : city.wards) {
        ward.id = r.get<WardId>();
        ward.name = r.get_string();
        ward.centroid.lat = r.get<double>();
        ward.centroid.lon = r.get<double>();
        ward.radius_km = r.get<double>();
        ward.population_share = r.get<double>();
        ward.density = static_cast<DensityClass>(r.get<std::uint8_t>());
        ward.outflow = r.get_vector<double>();
    }
    city.agents.resize(r.get<std::uint64_t>());
    for (auto& a : city.agents) {
        a.id = r.get<AgentId>();
        a.age = r.get<std::int16_t>();
        a.ward = r.get<WardId>();
        a.household = r.get<SpaceId>();
        a.workplace = r.get<SpaceId>();
        a.project = r.get<SpaceId>();
        a.school = r.get<SpaceId>();
        a.school_class = r.get<SpaceId>();
        a.commute = static_cast<CommuteMode>(r.get<std::uint8_t>());
        a.origin_station = r.get<StationId>();
        a.destination_station = r.get<StationId>();
        a.community_weight = r.get<double>();
        a.commute_km = r.get<double>();
    }
    city.households.resize(r.get<std::uint64_t>());
    for (auto& h : city.households) {
        h.id = r.get<SpaceId>();
        h.ward = r.get<WardId>();
        h.location.lat = r.get<double>();
        h.location.lon = r.get<double>();
        h.members = r.get_vector<AgentId>();
    }
    city.workplaces = read_venues(r);
    city.projects = read_groups(r);
    city.schools = read_venues(r);
    city.classes = read_groups(r);
    city.ward_population = r.get_vector<std::int32_t>();
    return city;
}

void save_city(const City& city, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write city snapshot " + path.string());
    write_city(out, city);
}

City load_city(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open city snapshot " + path.string());
    return read_city(in);
}

} // namespace cohortsim
