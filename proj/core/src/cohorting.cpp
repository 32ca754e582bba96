#include "cohortsim/cohorting.hpp"

#include "cohortsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

namespace cohortsim {

std::vector<Commuter> train_commuters(const City& city)
{
    std::vector<Commuter> out;
    for (const auto& a : city.agents) {
        if (a.commute == CommuteMode::train) out.push_back({a.id, a.origin_station, a.destination_station});
    }
    return out;
}

CohortPlan form_cohorts(std::span<const Commuter> commuters, const RailNetwork& network, int cohort_size,
                        double one_off_ratio, Rng& rng, std::size_t population)
{
    if (cohort_size < 1) throw ValidationError("cohort size must be >= 1");
    if (!(one_off_ratio >= 0.0 && one_off_ratio <= 1.0)) throw ValidationError("one-off ratio outside [0,1]");

    std::vector<const Commuter*> pool;
    pool.reserve(commuters.size());
    for (const auto& c : commuters) {
        if (network.route(c.origin, c.destination) != nullptr) pool.push_back(&c);
    }
    std::shuffle(pool.begin(), pool.end(), rng);

    CohortPlan plan;
    plan.cohort_of_agent.assign(population, -1);
    auto emit = [&](std::vector<AgentId> members, StationId o, StationId d, bool one_off) {
        Cohort c;
        c.id = static_cast<CohortId>(plan.cohorts.size());
        c.members = std::move(members);
        c.origin = o;
        c.destination = d;
        c.route = *network.route(o, d);
        c.travel_time = c.route.total_time;
        c.one_off = one_off;
        for (const AgentId m : c.members) {
            if (static_cast<std::size_t>(m) >= population) throw ValidationError("commuter id outside population");
            plan.cohort_of_agent[static_cast<std::size_t>(m)] = c.id;
        }
        plan.cohorts.push_back(std::move(c));
    };

    const auto one_offs = static_cast<std::size_t>(std::llround(one_off_ratio * static_cast<double>(pool.size())));
    std::map<std::pair<StationId, StationId>, std::vector<AgentId>> buckets;
    for (std::size_t k = one_offs; k < pool.size(); ++k)
        buckets[{pool[k]->origin, pool[k]->destination}].push_back(pool[k]->agent);

    const auto size = static_cast<std::size_t>(cohort_size);
    for (const auto& [od, members] : buckets) {
        for (std::size_t start = 0; start < members.size(); start += size) {
            const auto end = std::min(members.size(), start + size);
            emit({members.begin() + static_cast<std::ptrdiff_t>(start), members.begin() + static_cast<std::ptrdiff_t>(end)},
                 od.first, od.second, false);
        }
    }
    for (std::size_t k = 0; k < one_offs; ++k) emit({pool[k]->agent}, pool[k]->origin, pool[k]->destination, true);
    plan.one_off_count = one_offs;
    return plan;
}

int CoachCapacity::occupancy_limit() const
{
    return static_cast<int>(std::floor(static_cast<double>(seating_capacity) * crowding_factor + 1e-9));
}

CoachAssignment assign_coaches(std::span<const Cohort> cohorts, const RailNetwork& network, int day,
                               const CoachCapacity& capacity, Rng& rng)
{
    if (capacity.seating_capacity <= 0 || !(capacity.crowding_factor > 0.0))
        throw ValidationError("coach capacity and crowding factor must be positive");
    const int limit = capacity.occupancy_limit();
    for (std::size_t k = 0; k < cohorts.size(); ++k) {
        const auto& c = cohorts[k];
        if (c.id != static_cast<CohortId>(k)) throw ValidationError("cohort ids must equal their position");
        if (static_cast<int>(c.size()) > limit)
            throw ValidationError("cohort of " + std::to_string(c.size()) + " exceeds the coach occupancy limit " +
                                  std::to_string(limit));
    }

    std::vector<Coach> coaches;
    // Open coach per (line, direction, pool).
    std::map<std::tuple<LineId, Direction, bool>, std::size_t> open;
    auto open_coach = [&](LineId line, Direction dir, bool one_off) -> std::size_t {
        const auto key = std::tuple{line, dir, one_off};
        if (const auto it = open.find(key); it != open.end()) return it->second;
        Coach coach;
        coach.id = static_cast<CoachId>(coaches.size());
        coach.line = line;
        coach.direction = dir;
        coach.one_off_pool = one_off;
        coach.seating_capacity = capacity.seating_capacity;
        coach.crowding_factor = capacity.crowding_factor;
        coach.occupancy.assign(network.line(line).segment_count(), 0);
        coaches.push_back(std::move(coach));
        open[key] = coaches.size() - 1;
        return coaches.size() - 1;
    };
    auto fits = [&](const Coach& coach, const RouteLeg& leg, int size) {
        const auto [first, last] = leg.segments();
        for (std::size_t s = first; s < last; ++s) {
            if (coach.occupancy[s] + size > limit) return false;
        }
        return true;
    };

    CoachAssignment result;
    result.day = day;
    std::vector<std::array<CoachId, kMaxLegs>> raw(cohorts.size());
    for (auto& r : raw) r.fill(kNoCoach);

    std::vector<std::size_t> bin(cohorts.size());
    for (std::size_t k = 0; k < bin.size(); ++k) bin[k] = k;
    std::array<std::size_t, kMaxLegs> leg_coach{};
    while (!bin.empty()) {
        const auto pick = std::uniform_int_distribution<std::size_t>(0, bin.size() - 1)(rng);
        const Cohort& cohort = cohorts[bin[pick]];
        const int size = static_cast<int>(cohort.size());
        bool all_fit = true;
        for (std::size_t l = 0; l < cohort.route.legs.size(); ++l) {
            const auto& leg = cohort.route.legs[l];
            leg_coach[l] = open_coach(leg.line, leg.direction(), cohort.one_off);
            if (!fits(coaches[leg_coach[l]], leg, size)) all_fit = false;
        }
        if (all_fit) {
            for (std::size_t l = 0; l < cohort.route.legs.size(); ++l) {
                auto& coach = coaches[leg_coach[l]];
                const auto [first, last] = cohort.route.legs[l].segments();
                for (std::size_t s = first; s < last; ++s) coach.occupancy[s] += size;
                coach.riders.push_back(cohort.id);
                raw[bin[pick]][l] = coach.id;
            }
            bin[pick] = bin.back();
            bin.pop_back();
            continue;
        }
        for (std::size_t l = 0; l < cohort.route.legs.size(); ++l) {
            auto& coach = coaches[leg_coach[l]];
            if (fits(coach, cohort.route.legs[l], size)) continue;
            if (++coach.rejection_counter > capacity.rejection_threshold)
                open.erase(std::tuple{coach.line, coach.direction, coach.one_off_pool});
        }
    }

    // Drop coaches that never carried anyone and renumber densely.
    std::vector<CoachId> renumber(coaches.size(), kNoCoach);
    for (auto& coach : coaches) {
        if (coach.riders.empty()) continue;
        renumber[static_cast<std::size_t>(coach.id)] = static_cast<CoachId>(result.coaches.size());
        coach.id = static_cast<CoachId>(result.coaches.size());
        result.coaches.push_back(std::move(coach));
    }
    result.leg_coach.resize(cohorts.size());
    for (std::size_t k = 0; k < cohorts.size(); ++k) {
        for (std::size_t l = 0; l < kMaxLegs; ++l)
            result.leg_coach[k][l] = raw[k][l] == kNoCoach ? kNoCoach : renumber[static_cast<std::size_t>(raw[k][l])];
    }
    return result;
}

CoachAssignment mirrored(const CoachAssignment& morning)
{
    CoachAssignment evening = morning;
    evening.direction = reversed(morning.direction);
    for (auto& coach : evening.coaches) coach.direction = reversed(coach.direction);
    return evening;
}

CoachScheduler::CoachScheduler(const std::vector<Cohort>& cohorts, const RailNetwork& network, CoachCapacity capacity,
                               CoachStrategy strategy, Rng rng)
    : cohorts_(cohorts)
    , network_(network)
    , capacity_(capacity)
    , strategy_(strategy)
    , rng_(std::move(rng))
{
}

const CoachAssignment& CoachScheduler::assignment_for(int day, bool evening)
{
    if (strategy_ == CoachStrategy::static_assignment) {
        if (!morning_) {
            morning_ = assign_coaches(cohorts_, network_, 0, capacity_, rng_);
            evening_ = mirrored(*morning_);
        }
        return evening ? *evening_ : *morning_;
    }
    // Dynamic: a fresh draw each morning; the evening mirrors that day's draw.
    if (!morning_ || cached_day_ != day) {
        morning_ = assign_coaches(cohorts_, network_, day, capacity_, rng_);
        evening_ = mirrored(*morning_);
        cached_day_ = day;
    }
    return evening ? *evening_ : *morning_;
}

double overlap_time(const Cohort& i, const Cohort& j, const CoachAssignment& assignment, const RailNetwork& network)
{
    if (i.id == j.id) return i.travel_time;
    double minutes = 0.0;
    for (std::size_t a = 0; a < i.route.legs.size(); ++a) {
        const CoachId ci = assignment.coach_for(i.id, a);
        if (ci == kNoCoach) continue;
        for (std::size_t b = 0; b < j.route.legs.size(); ++b) {
            if (assignment.coach_for(j.id, b) != ci) continue;
            const auto [fi, li] = i.route.legs[a].segments();
            const auto [fj, lj] = j.route.legs[b].segments();
            const auto first = std::max(fi, fj);
            const auto last = std::min(li, lj);
            if (first >= last) continue;
            minutes += network.line(i.route.legs[a].line).ride_time(first, last);
        }
    }
    return minutes;
}

AssignmentAudit audit_assignment(std::span<const Cohort> cohorts, const CoachAssignment& assignment,
                                 const RailNetwork& network, const CoachCapacity& capacity)
{
    AssignmentAudit audit;
    const int limit = capacity.occupancy_limit();
    std::vector<std::vector<int>> occupancy(assignment.coaches.size());
    for (const auto& coach : assignment.coaches)
        occupancy[static_cast<std::size_t>(coach.id)].assign(network.line(coach.line).segment_count(), 0);

    for (const auto& cohort : cohorts) {
        for (std::size_t l = 0; l < cohort.route.legs.size(); ++l) {
            const auto& leg = cohort.route.legs[l];
            const CoachId id = assignment.coach_for(cohort.id, l);
            if (id == kNoCoach || static_cast<std::size_t>(id) >= assignment.coaches.size()) {
                ++audit.colocation_violations;
                audit.messages.push_back("cohort " + std::to_string(cohort.id) + " leg " + std::to_string(l) +
                                         " has no coach");
                continue;
            }
            const Coach& coach = assignment.coach(id);
            const Direction expected =
                assignment.direction == Direction::up ? leg.direction() : reversed(leg.direction());
            if (coach.line != leg.line || coach.direction != expected) {
                ++audit.colocation_violations;
                audit.messages.push_back("cohort " + std::to_string(cohort.id) + " leg " + std::to_string(l) +
                                         " rides a coach of the wrong line or direction");
            }
            if (coach.one_off_pool != cohort.one_off) {
                ++audit.pool_violations;
                audit.messages.push_back("coach " + std::to_string(id) + " mixes one-off and regular cohorts");
            }
            const auto [first, last] = leg.segments();
            for (std::size_t s = first; s < last; ++s)
                occupancy[static_cast<std::size_t>(id)][s] += static_cast<int>(cohort.size());
        }
        for (std::size_t l = cohort.route.legs.size(); l < kMaxLegs; ++l) {
            if (assignment.coach_for(cohort.id, l) != kNoCoach) ++audit.colocation_violations;
        }
    }
    for (std::size_t c = 0; c < occupancy.size(); ++c) {
        for (std::size_t s = 0; s < occupancy[c].size(); ++s) {
            if (occupancy[c][s] > limit) {
                ++audit.occupancy_violations;
                audit.messages.push_back("coach " + std::to_string(c) + " segment " + std::to_string(s) + " carries " +
                                         std::to_string(occupancy[c][s]) + " > " + std::to_string(limit));
            }
        }
    }
    return audit;
}

void write_assignment_csv(std::ostream& out, const CoachAssignment& assignment, bool header)
{
    if (header) out << "day,cohort,leg,coach\n";
    for (std::size_t k = 0; k < assignment.leg_coach.size(); ++k) {
        for (std::size_t l = 0; l < kMaxLegs; ++l) {
            const CoachId id = assignment.leg_coach[k][l];
            if (id == kNoCoach) continue;
            out << assignment.day << ',' << k << ',' << l << ',' << id << '\n';
        }
    }
}

} // namespace cohortsim
