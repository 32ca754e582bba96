#pragma once

#include "cohortsim/rail_network.hpp"
#include "cohortsim/rng.hpp"
#include "cohortsim/synthetic_city.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohortsim {

using CohortId = std::int32_t;
using CoachId = std::int32_t;

struct Commuter {
    AgentId agent = 0;
    StationId origin = -1;
    StationId destination = -1;
};

/// Fixed travel group sharing origin and destination stations.
struct Cohort {
    CohortId id = 0;
    std::vector<AgentId> members;
    StationId origin = -1;
    StationId destination = -1;
    Route route;
    double travel_time = 0.0; ///< tau(i): route total time in minutes
    bool one_off = false;

    std::size_t size() const { return members.size(); }
};

struct CohortPlan {
    std::vector<Cohort> cohorts;
    std::vector<CohortId> cohort_of_agent; ///< -1 for agents that do not ride trains
    std::size_t one_off_count = 0;

    const Cohort* cohort_of(AgentId agent) const
    {
        const auto idx = static_cast<std::size_t>(agent);
        if (idx >= cohort_of_agent.size() || cohort_of_agent[idx] < 0) return nullptr;
        return &cohorts[static_cast<std::size_t>(cohort_of_agent[idx])];
    }
};

/// Train commuters of a city, in agent order.
std::vector<Commuter> train_commuters(const City& city);

/// Earmarks round(one_off_ratio * N) random commuters as size-1 one-off
/// cohorts, then partitions each origin-destination bucket of the rest into
/// cohorts of `cohort_size` (one smaller remainder per bucket). Membership is
/// random within a bucket. Commuters without a route are skipped.
CohortPlan form_cohorts(std::span<const Commuter> commuters, const RailNetwork& network, int cohort_size,
                        double one_off_ratio, Rng& rng, std::size_t population);

enum class CoachStrategy : std::uint8_t { static_assignment = 0, dynamic_assignment = 1 };

struct CoachCapacity {
    int seating_capacity = 100;
    double crowding_factor = 2.0;
    int rejection_threshold = 5;

    int occupancy_limit() const;
};

struct Coach {
    CoachId id = 0;
    LineId line = 0;
    Direction direction = Direction::up;
    bool one_off_pool = false;
    int seating_capacity = 0;
    double crowding_factor = 0.0;
    std::vector<int> occupancy; ///< riders per line segment
    int rejection_counter = 0;
    std::vector<CohortId> riders;
};

inline constexpr CoachId kNoCoach = -1;

/// Cohort-to-coach allocation for one commute (one day, one direction).
struct CoachAssignment {
    int day = 0;
    Direction direction = Direction::up; ///< orientation of the commute; legs keep their own direction
    std::vector<Coach> coaches;          ///< only coaches that carry at least one cohort
    std::vector<std::array<CoachId, kMaxLegs>> leg_coach; ///< per cohort, per leg; kNoCoach when absent

    CoachId coach_for(CohortId cohort, std::size_t leg) const
    {
        return leg_coach[static_cast<std::size_t>(cohort)][leg];
    }
    const Coach& coach(CoachId id) const { return coaches[static_cast<std::size_t>(id)]; }
};

/// One randomized pass of the capacity-constrained allocation. Cohorts are
/// drawn at random from the unallocated bin; a cohort is placed only if the
/// open coach of every leg has room on each segment it rides. Each coach that
/// turns a cohort away counts the rejection and, past the threshold, is closed
/// and replaced by a fresh coach on that line. One-off and regular cohorts use
/// disjoint coach pools. Throws ValidationError if a single cohort exceeds the
/// occupancy limit (no coach could ever hold it).
CoachAssignment assign_coaches(std::span<const Cohort> cohorts, const RailNetwork& network, int day,
                               const CoachCapacity& capacity, Rng& rng);

/// Evening commute under the same coaches: each coach runs the other way.
CoachAssignment mirrored(const CoachAssignment& morning);

/// Produces the assignment for each commute under the static or dynamic
/// strategy. Static computes day 0 once and reuses it verbatim; dynamic draws
/// a fresh allocation for every commute.
class CoachScheduler {
public:
    CoachScheduler(const std::vector<Cohort>& cohorts, const RailNetwork& network, CoachCapacity capacity,
                   CoachStrategy strategy, Rng rng);

    /// `evening` selects the return commute.
    const CoachAssignment& assignment_for(int day, bool evening);
    CoachStrategy strategy() const { return strategy_; }

private:
    const std::vector<Cohort>& cohorts_;
    const RailNetwork& network_;
    CoachCapacity capacity_;
    CoachStrategy strategy_;
    Rng rng_;
    std::optional<CoachAssignment> morning_;
    std::optional<CoachAssignment> evening_;
    int cached_day_ = -1;
};

/// Minutes cohorts i and j spend in the same coach. OT(i, i) is the full
/// journey time tau(i).
double overlap_time(const Cohort& i, const Cohort& j, const CoachAssignment& assignment, const RailNetwork& network);

struct AssignmentAudit {
    std::size_t occupancy_violations = 0;
    std::size_t colocation_violations = 0;
    std::size_t pool_violations = 0;
    std::vector<std::string> messages;

    bool ok() const { return occupancy_violations == 0 && colocation_violations == 0 && pool_violations == 0; }
};

/// Recomputes occupancy from the cohorts themselves and checks the hard
/// invariants: per-segment limit, every leg on a coach of the leg's line and
/// direction, and no coach mixing one-off with regular cohorts.
AssignmentAudit audit_assignment(std::span<const Cohort> cohorts, const CoachAssignment& assignment,
                                 const RailNetwork& network, const CoachCapacity& capacity);

/// CSV rows `day,cohort,leg,coach` for invariant auditing.
void write_assignment_csv(std::ostream& out, const CoachAssignment& assignment, bool header);

} // namespace cohortsim
