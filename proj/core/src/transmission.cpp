#include "cohortsim/transmission.hpp"

#include "cohortsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace cohortsim {

void TransmissionParams::validate() const
{
    for (const double b : {beta_home, beta_school, beta_work, beta_community, beta_coach, subnetwork_upscale}) {
        if (!(b >= 0.0)) throw ValidationError("transmission coefficients must be non-negative");
    }
    for (const double a : {household_alpha, work_alpha, school_alpha}) {
        if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("crowding exponents must lie in [0,1]");
    }
    if (!(community_crowding >= 0.0)) throw ValidationError("community crowding must be non-negative");
    if (!(kernel_a_km > 0.0) || !(kernel_b > 0.0)) throw ValidationError("distance kernel parameters must be positive");
    if (!(dt_days > 0.0)) throw ValidationError("timestep must be positive");
}

double infection_probability(double lambda_per_day, double dt_days)
{
    return -std::expm1(-lambda_per_day * dt_days);
}

double lambda_household(std::span<const AgentId> members, std::span<const AgentHealth> health,
                        std::span<const Modulation> kappa, const TransmissionParams& params)
{
    if (members.empty()) return 0.0;
    double sum = 0.0;
    for (const AgentId m : members) {
        const auto i = static_cast<std::size_t>(m);
        sum += shedding(health[i], kappa[i], Space::home);
    }
    return params.beta_home * std::pow(static_cast<double>(members.size()), -params.household_alpha) * sum;
}

double lambda_intra_cohort(const Cohort& cohort, std::span<const AgentHealth> health,
                           std::span<const Modulation> kappa, const TransmissionParams& params)
{
    double sum = 0.0;
    for (const AgentId m : cohort.members) {
        const auto i = static_cast<std::size_t>(m);
        sum += shedding(health[i], kappa[i], Space::train);
    }
    return params.beta_coach * cohort.travel_time * sum;
}

double lambda_inter_cohort(const Cohort& cohort, std::span<const Cohort> cohorts, std::span<const double> intra,
                           const CoachAssignment& assignment, const RailNetwork& network)
{
    double total = 0.0;
    for (const auto& other : cohorts) {
        if (other.id == cohort.id) continue;
        const double lam = intra[static_cast<std::size_t>(other.id)];
        if (lam == 0.0 || other.travel_time <= 0.0) continue;
        const double ot = overlap_time(cohort, other, assignment, network);
        if (ot > 0.0) total += lam * ot / other.travel_time;
    }
    return total;
}

namespace {

std::vector<double> size_factors(const std::vector<std::size_t>& sizes, double alpha)
{
    std::vector<double> out(sizes.size(), 0.0);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] > 0) out[i] = std::pow(static_cast<double>(sizes[i]), -alpha);
    }
    return out;
}

} // namespace

TransmissionModel::TransmissionModel(const City& city, TransmissionParams params) : city_(city), params_(params)
{
    params_.validate();
    household_size_.assign(city.households.size(), 0);
    std::vector<std::size_t> workplace(city.workplaces.size(), 0), project(city.projects.size(), 0),
        school(city.schools.size(), 0), school_class(city.classes.size(), 0);
    ward_kernel_mass_.assign(city.wards.size(), 0.0);
    for (const auto& a : city.agents) {
        if (a.household != kNone) ++household_size_[static_cast<std::size_t>(a.household)];
        if (a.workplace != kNone) ++workplace[static_cast<std::size_t>(a.workplace)];
        if (a.project != kNone) ++project[static_cast<std::size_t>(a.project)];
        if (a.school != kNone) ++school[static_cast<std::size_t>(a.school)];
        if (a.school_class != kNone) ++school_class[static_cast<std::size_t>(a.school_class)];
        ward_kernel_mass_[static_cast<std::size_t>(a.ward)] += a.community_weight;
    }
    household_factor_ = size_factors(household_size_, params_.household_alpha);
    workplace_factor_ = size_factors(workplace, params_.work_alpha);
    project_factor_ = size_factors(project, params_.work_alpha);
    school_factor_ = size_factors(school, params_.school_alpha);
    class_factor_ = size_factors(school_class, params_.school_alpha);
}

SpaceAggregates TransmissionModel::aggregate(std::span<const AgentHealth> health,
                                             std::span<const Modulation> kappa) const
{
    SpaceAggregates agg;
    agg.household.assign(city_.households.size(), 0.0);
    agg.workplace.assign(city_.workplaces.size(), 0.0);
    agg.project.assign(city_.projects.size(), 0.0);
    agg.school.assign(city_.schools.size(), 0.0);
    agg.school_class.assign(city_.classes.size(), 0.0);
    agg.ward.assign(city_.wards.size(), 0.0);

    for (const auto& a : city_.agents) {
        const auto i = static_cast<std::size_t>(a.id);
        const auto& h = health[i];
        if (!is_infective(h.state)) continue;
        const auto& k = kappa[i];
        const double rho = h.infectiousness;
        if (a.household != kNone) agg.household[static_cast<std::size_t>(a.household)] += rho * k[Space::home];
        if (a.workplace != kNone) agg.workplace[static_cast<std::size_t>(a.workplace)] += rho * k[Space::work];
        if (a.project != kNone) agg.project[static_cast<std::size_t>(a.project)] += rho * k[Space::work];
        if (a.school != kNone) agg.school[static_cast<std::size_t>(a.school)] += rho * k[Space::school];
        if (a.school_class != kNone)
            agg.school_class[static_cast<std::size_t>(a.school_class)] += rho * k[Space::school];
        agg.ward[static_cast<std::size_t>(a.ward)] += a.community_weight * rho * k[Space::community];
    }
    for (std::size_t w = 0; w < agg.ward.size(); ++w) {
        if (ward_kernel_mass_[w] > 0.0) agg.ward[w] /= ward_kernel_mass_[w];
    }
    return agg;
}

TrainRates TransmissionModel::train_rates(std::span<const Cohort> cohorts, const CoachAssignment& assignment,
                                          const RailNetwork& network, std::span<const AgentHealth> health,
                                          std::span<const Modulation> kappa) const
{
    TrainRates out;
    out.intra.assign(cohorts.size(), 0.0);
    out.inter.assign(cohorts.size(), 0.0);

    // x_j = intra(j) / tau(j): shedding per minute of co-riding.
    std::vector<double> per_minute(cohorts.size(), 0.0);
    bool any = false;
    for (const auto& c : cohorts) {
        const auto ci = static_cast<std::size_t>(c.id);
        out.intra[ci] = lambda_intra_cohort(c, health, kappa, params_);
        if (out.intra[ci] > 0.0 && c.travel_time > 0.0) {
            per_minute[ci] = out.intra[ci] / c.travel_time;
            any = true;
        }
    }
    if (!any) return out;

    std::vector<std::size_t> offset(assignment.coaches.size() + 1, 0);
    for (std::size_t k = 0; k < assignment.coaches.size(); ++k)
        offset[k + 1] = offset[k] + assignment.coaches[k].occupancy.size();
    std::vector<double> load(offset.back(), 0.0);

    auto for_each_leg = [&](const Cohort& c, auto&& fn) {
        const auto ci = static_cast<std::size_t>(c.id);
        for (std::size_t l = 0; l < c.route.legs.size(); ++l) {
            const CoachId coach = assignment.leg_coach[ci][l];
            if (coach == kNoCoach) continue;
            fn(c.route.legs[l], static_cast<std::size_t>(coach));
        }
    };
    for (const auto& c : cohorts) {
        const double x = per_minute[static_cast<std::size_t>(c.id)];
        if (x == 0.0) continue;
        for_each_leg(c, [&](const RouteLeg& leg, std::size_t coach) {
            const auto [first, last] = leg.segments();
            for (std::size_t s = first; s < last; ++s) load[offset[coach] + s] += x;
        });
    }
    for (const auto& c : cohorts) {
        const auto ci = static_cast<std::size_t>(c.id);
        const double own = per_minute[ci];
        double total = 0.0;
        for_each_leg(c, [&](const RouteLeg& leg, std::size_t coach) {
            const auto& times = network.line(leg.line).segment_times;
            const auto [first, last] = leg.segments();
            for (std::size_t s = first; s < last; ++s) {
                const double others = load[offset[coach] + s] - own;
                if (others > 0.0) total += times[s] * others;
            }
        });
        out.inter[ci] = total;
    }
    return out;
}

LambdaBreakdown TransmissionModel::lambda(AgentId agent, const Modulation& kappa, const SpaceAggregates& agg,
                                          const TrainRates* trains, std::span<const CohortId> cohort_of_agent) const
{
    const auto& a = city_.agents[static_cast<std::size_t>(agent)];
    const auto& p = params_;
    LambdaBreakdown out;
    if (a.household != kNone) {
        const auto h = static_cast<std::size_t>(a.household);
        out.home = kappa[Space::home] * p.beta_home * household_factor_[h] * agg.household[h];
    }
    if (a.workplace != kNone) {
        const auto w = static_cast<std::size_t>(a.workplace);
        out.workplace = kappa[Space::work] * p.beta_work * workplace_factor_[w] * agg.workplace[w];
        if (a.project != kNone) {
            const auto g = static_cast<std::size_t>(a.project);
            out.subnetwork =
                kappa[Space::work] * p.beta_work * p.subnetwork_upscale * project_factor_[g] * agg.project[g];
        }
    }
    if (a.school != kNone) {
        const auto s = static_cast<std::size_t>(a.school);
        out.workplace += kappa[Space::school] * p.beta_school * school_factor_[s] * agg.school[s];
        if (a.school_class != kNone) {
            const auto g = static_cast<std::size_t>(a.school_class);
            out.subnetwork +=
                kappa[Space::school] * p.beta_school * p.subnetwork_upscale * class_factor_[g] * agg.school_class[g];
        }
    }
    const auto w = static_cast<std::size_t>(a.ward);
    const double crowding = city_.wards[w].density == DensityClass::high ? p.community_crowding : 1.0;
    out.community = kappa[Space::community] * p.beta_community * crowding * a.community_weight * agg.ward[w];

    if (trains != nullptr && !trains->empty()) {
        const auto idx = static_cast<std::size_t>(agent);
        if (idx < cohort_of_agent.size() && cohort_of_agent[idx] >= 0)
            out.trains = lambda_trains(trains->intra[static_cast<std::size_t>(cohort_of_agent[idx])],
                                       trains->inter[static_cast<std::size_t>(cohort_of_agent[idx])],
                                       kappa[Space::train]);
    }
    return out;
}

} // namespace cohortsim
