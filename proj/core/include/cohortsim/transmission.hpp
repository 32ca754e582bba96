#pragma once

#include "cohortsim/cohorting.hpp"
#include "cohortsim/disease.hpp"
#include "cohortsim/synthetic_city.hpp"

#include <array>
#include <span>
#include <vector>

namespace cohortsim {

enum class Space : std::uint8_t { home, work, school, community, train };
inline constexpr std::size_t kSpaceCount = 5;

/// Per-agent modulation factors, one per interaction space, each in [0, 1].
struct Modulation {
    std::array<float, kSpaceCount> k{1.0f, 1.0f, 1.0f, 1.0f, 1.0f};

    float operator[](Space s) const { return k[static_cast<std::size_t>(s)]; }
    float& operator[](Space s) { return k[static_cast<std::size_t>(s)]; }
};

struct TransmissionParams {
    double beta_home = 0.7928;
    double beta_school = 0.2834;
    double beta_work = 0.1417;
    double beta_community = 0.0149;
    double subnetwork_upscale = 9.0;
    double beta_coach = 0.0005;      ///< per minute of shared coach time, per day
    double household_alpha = 0.8;    ///< rate scales as n_H^-alpha
    double work_alpha = 1.0;         ///< workplace and project size exponent
    double school_alpha = 1.0;       ///< school and class size exponent
    double community_crowding = 2.0; ///< r_c, applied in high-density wards
    double kernel_a_km = 2.709;
    double kernel_b = 1.279;
    double dt_days = 0.25;

    void validate() const;
};

/// Per-day rate contributions for one agent at one timestep.
struct LambdaBreakdown {
    double home = 0.0;
    double workplace = 0.0; ///< workplace or school, venue-wide term
    double subnetwork = 0.0; ///< project team or class term
    double community = 0.0;
    double trains = 0.0;

    double total() const { return home + workplace + subnetwork + community + trains; }
};

/// I * rho * kappa for one agent in one space.
inline double shedding(const AgentHealth& h, const Modulation& kappa, Space s)
{
    return is_infective(h.state) ? static_cast<double>(h.infectiousness) * kappa[s] : 0.0;
}

double infection_probability(double lambda_per_day, double dt_days);

// Single-space formulas. `health` and `kappa` are indexed by agent id.

double lambda_household(std::span<const AgentId> members, std::span<const AgentHealth> health,
                        std::span<const Modulation> kappa, const TransmissionParams& params);

double lambda_intra_cohort(const Cohort& cohort, std::span<const AgentHealth> health,
                           std::span<const Modulation> kappa, const TransmissionParams& params);

/// Direct pairwise form: sum over co-riding cohorts j of intra(j) * OT(i,j) / tau(j).
/// `intra` holds lambda_intra_cohort for every cohort, indexed by cohort id.
double lambda_inter_cohort(const Cohort& cohort, std::span<const Cohort> cohorts, std::span<const double> intra,
                           const CoachAssignment& assignment, const RailNetwork& network);

inline double lambda_trains(double intra, double inter, double kappa_c) { return (intra + inter) * kappa_c; }

/// Mean-field aggregates over every interaction space for one timestep.
struct SpaceAggregates {
    std::vector<double> household;
    std::vector<double> workplace;
    std::vector<double> project;
    std::vector<double> school;
    std::vector<double> school_class;
    std::vector<double> ward; ///< kernel-weighted community shedding, already divided by the ward's kernel mass
};

/// Per-cohort train rate before the receiver's own modulation factor.
struct TrainRates {
    std::vector<double> intra;
    std::vector<double> inter;

    bool empty() const { return intra.empty(); }
    double total(CohortId c) const
    {
        return intra[static_cast<std::size_t>(c)] + inter[static_cast<std::size_t>(c)];
    }
};

/// Computes lambda for every agent from per-space sums instead of pairwise
/// contacts. Construction caches space sizes and kernel masses for a city.
class TransmissionModel {
public:
    TransmissionModel(const City& city, TransmissionParams params);

    const TransmissionParams& params() const { return params_; }

    SpaceAggregates aggregate(std::span<const AgentHealth> health, std::span<const Modulation> kappa) const;

    /// Intra- and inter-cohort rates for one commute. The inter-cohort term
    /// accumulates per-coach, per-segment shedding once and subtracts each
    /// cohort's own share, so the cost is linear in the ridden segments.
    TrainRates train_rates(std::span<const Cohort> cohorts, const CoachAssignment& assignment,
                           const RailNetwork& network, std::span<const AgentHealth> health,
                           std::span<const Modulation> kappa) const;

    /// `trains` and `cohort_of_agent` may be empty outside the travel slots.
    LambdaBreakdown lambda(AgentId agent, const Modulation& kappa, const SpaceAggregates& agg,
                           const TrainRates* trains, std::span<const CohortId> cohort_of_agent) const;

    std::size_t household_size(SpaceId h) const { return household_size_[static_cast<std::size_t>(h)]; }

private:
    const City& city_;
    TransmissionParams params_;
    std::vector<double> household_factor_; ///< n^-alpha
    std::vector<std::size_t> household_size_;
    std::vector<double> workplace_factor_;
    std::vector<double> project_factor_;
    std::vector<double> school_factor_;
    std::vector<double> class_factor_;
    std::vector<double> ward_kernel_mass_;
};

} // namespace cohortsim
