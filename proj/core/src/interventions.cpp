#include "cohortsim/interventions.hpp"

#include "cohortsim/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace cohortsim {

using namespace std::chrono;

Date parse_date(std::string_view text)
{
    const auto parts = detail::split(detail::trim(text), '-');
    if (parts.size() != 3) throw ParseError("expected a YYYY-MM-DD date, got '" + std::string(text) + "'");
    const Date d{year{detail::parse_int(parts[0])}, month{static_cast<unsigned>(detail::parse_int(parts[1]))},
                 day{static_cast<unsigned>(detail::parse_int(parts[2]))}};
    if (!d.ok()) throw ParseError("invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string format_date(Date d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

int days_between(Date from, Date to) { return static_cast<int>((sys_days{to} - sys_days{from}).count()); }

PolicyTimeline::PolicyTimeline(std::vector<PolicyPhase> phases) : phases_(std::move(phases))
{
    if (phases_.empty()) throw ValidationError("policy timeline needs at least one phase");
    for (std::size_t i = 0; i < phases_.size(); ++i) {
        const auto& p = phases_[i];
        if (!(p.office_attendance >= 0.0 && p.office_attendance <= 1.0))
            throw ValidationError("office attendance outside [0,1]");
        if (i > 0 && p.start_day <= phases_[i - 1].start_day)
            throw ValidationError("policy phases must start on strictly increasing days");
    }
}

const PolicyPhase& PolicyTimeline::at(int day) const
{
    auto it = std::upper_bound(phases_.begin(), phases_.end(), day,
                               [](int d, const PolicyPhase& p) { return d < p.start_day; });
    return it == phases_.begin() ? phases_.front() : *std::prev(it);
}

PolicyTimeline PolicyTimeline::no_intervention() { return PolicyTimeline({PolicyPhase{}}); }

PolicyTimeline PolicyTimeline::mumbai_2020(Date start)
{
    const auto on = [&](int m, int d) { return days_between(start, year{2020} / m / d); };
    std::vector<PolicyPhase> phases;

    PolicyPhase open;
    open.start_day = std::min(0, on(3, 16) - 1);
    phases.push_back(open);

    PolicyPhase pre = open;
    pre.start_day = on(3, 16);
    pre.testing = true;
    pre.schools_closed = true;
    phases.push_back(pre);

    PolicyPhase lockdown = pre;
    lockdown.start_day = on(3, 25);
    lockdown.lockdown = true;
    lockdown.trains_running = false;
    lockdown.containment = true;
    phases.push_back(lockdown);

    PolicyPhase masked = lockdown;
    masked.start_day = on(4, 9);
    masked.masks = true;
    phases.push_back(masked);

    PolicyPhase reopen = masked;
    reopen.start_day = on(5, 18);
    reopen.lockdown = false;
    reopen.home_quarantine = true;
    reopen.elderly_distancing = true;
    reopen.office_attendance = 0.05;
    phases.push_back(reopen);

    for (const auto& [m, attendance] : {std::pair{6, 0.15}, std::pair{7, 0.25}, std::pair{8, 0.33}}) {
        PolicyPhase p = phases.back();
        p.start_day = on(m, 1);
        p.office_attendance = attendance;
        phases.push_back(p);
    }
    PolicyPhase full = phases.back();
    full.start_day = on(9, 1);
    full.office_attendance = 1.0;
    full.containment = false;
    phases.push_back(full);

    PolicyPhase trains = full;
    trains.start_day = on(9, 7);
    trains.trains_running = true;
    phases.push_back(trains);

    // A start date after some of the milestones collapses them onto day 0;
    // the latest collapsed phase wins.
    std::vector<PolicyPhase> kept;
    for (auto p : phases) {
        p.start_day = std::max(p.start_day, 0);
        if (!kept.empty() && p.start_day == kept.back().start_day)
            kept.back() = p;
        else
            kept.push_back(p);
    }
    return PolicyTimeline(std::move(kept));
}

std::string_view to_string(QuarantineCause c)
{
    switch (c) {
    case QuarantineCause::household_symptomatic: return "household_symptomatic";
    case QuarantineCause::contact_traced: return "contact_traced";
    case QuarantineCause::cohort_isolation: return "cohort_isolation";
    case QuarantineCause::index_case: return "index_case";
    }
    return "unknown";
}

void InterventionParams::validate() const
{
    const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    for (const double v :
         {compliance_high_density, compliance_other, lockdown_work_compliant, lockdown_work_noncompliant,
          lockdown_community_compliant, lockdown_community_noncompliant, mask_factor, elderly_community_factor,
          quarantine_home, quarantine_work, quarantine_community, containment_community, trace_on_hospitalisation,
          trace_on_positive, trace_on_symptoms, trace_fraction, symptomatic_test_probability, station_detection,
          self_declaration, severe_attendance_multiplier}) {
        if (!unit(v)) throw ValidationError("intervention probabilities and factors must lie in [0,1]");
    }
    if (quarantine_days <= 0) throw ValidationError("quarantine duration must be positive");
    if (test_turnaround_days < 0) throw ValidationError("test turnaround cannot be negative");
    if (!(containment_threshold >= 0.0)) throw ValidationError("containment threshold cannot be negative");
}

std::vector<AgentId> close_network(const City& city, AgentId agent, const CohortPlan* cohorts, bool include_cohort)
{
    const auto& a = city.agents[static_cast<std::size_t>(agent)];
    std::vector<AgentId> out;
    auto add = [&](const std::vector<AgentId>& members) {
        for (const AgentId m : members) {
            if (m != agent) out.push_back(m);
        }
    };
    if (a.household != kNone) add(city.households[static_cast<std::size_t>(a.household)].members);
    if (a.project != kNone) add(city.projects[static_cast<std::size_t>(a.project)].members);
    if (a.school_class != kNone) add(city.classes[static_cast<std::size_t>(a.school_class)].members);
    if (include_cohort && cohorts != nullptr) {
        if (const auto* c = cohorts->cohort_of(agent)) add(c->members);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<AgentId> contact_trace(std::span<const AgentId> network, double trigger, double fraction, Rng& rng)
{
    std::vector<AgentId> out;
    if (network.empty() || !bernoulli(rng, trigger)) return out;
    for (const AgentId a : network) {
        if (bernoulli(rng, fraction)) out.push_back(a);
    }
    return out;
}

bool station_screen(DiseaseState state, double detection_probability, Rng& rng)
{
    return state == DiseaseState::symptomatic && bernoulli(rng, detection_probability);
}

Interventions::Interventions(const City& city, InterventionParams params, Rng rng)
    : city_(city), params_(params), rng_(std::move(rng))
{
    params_.validate();
    const auto n = city.agents.size();
    compliant_.resize(n);
    for (const auto& a : city.agents) {
        const bool high = city.wards[static_cast<std::size_t>(a.ward)].density == DensityClass::high;
        compliant_[static_cast<std::size_t>(a.id)] =
            bernoulli(rng_, high ? params_.compliance_high_density : params_.compliance_other) ? 1 : 0;
    }
    contained_.assign(city.wards.size(), 0);
    q_start_.assign(n, 0);
    q_end_.assign(n, 0);
    q_cause_.assign(n, QuarantineCause::index_case);
    detected_episode_.assign(n, 0);
    screened_episode_.assign(n, 0);
    test_pending_.assign(n, 0);
}

void Interventions::update_containment(const PolicyPhase& phase, std::span<const AgentHealth> health)
{
    std::fill(contained_.begin(), contained_.end(), 0);
    if (!phase.containment) return;
    std::vector<std::int32_t> hospitalised(city_.wards.size(), 0);
    for (const auto& a : city_.agents) {
        const auto s = health[static_cast<std::size_t>(a.id)].state;
        if (s == DiseaseState::hospitalised || s == DiseaseState::critical)
            ++hospitalised[static_cast<std::size_t>(a.ward)];
    }
    for (std::size_t w = 0; w < hospitalised.size(); ++w) {
        const double residents = city_.ward_population.empty() ? 0.0 : city_.ward_population[w];
        if (residents <= 0.0) continue;
        contained_[w] = hospitalised[w] * 1e4 / residents > params_.containment_threshold ? 1 : 0;
    }
}

Modulation Interventions::modulation(AgentId id, const PolicyPhase& phase, const AgentHealth& health, int now) const
{
    const auto i = static_cast<std::size_t>(id);
    const auto& a = city_.agents[i];
    const bool c = compliant_[i] != 0;
    const auto& p = params_;
    Modulation m;
    auto scale = [&m](Space s, double f) { m[s] = static_cast<float>(m[s] * f); };

    if (!phase.trains_running) m[Space::train] = 0.0f;
    if (phase.schools_closed) m[Space::school] = 0.0f;
    scale(Space::work, phase.office_attendance);
    scale(Space::train, phase.office_attendance);
    if (phase.lockdown) {
        const double work = c ? p.lockdown_work_compliant : p.lockdown_work_noncompliant;
        scale(Space::work, work);
        scale(Space::train, work);
        scale(Space::community, c ? p.lockdown_community_compliant : p.lockdown_community_noncompliant);
    }
    if (phase.masks && c) {
        for (const Space s : {Space::work, Space::school, Space::community, Space::train}) scale(s, p.mask_factor);
    }
    if (phase.elderly_distancing && c && a.age > p.elderly_age) scale(Space::community, p.elderly_community_factor);
    if (health.severe && health.state == DiseaseState::symptomatic && p.severe_attendance_multiplier != 1.0) {
        scale(Space::work, p.severe_attendance_multiplier);
        scale(Space::train, p.severe_attendance_multiplier);
    }
    if (contained_[static_cast<std::size_t>(a.ward)] != 0) scale(Space::community, p.containment_community);
    if (quarantined(id, now)) {
        scale(Space::home, p.quarantine_home);
        scale(Space::work, p.quarantine_work);
        m[Space::school] = 0.0f;
        scale(Space::community, p.quarantine_community);
        m[Space::train] = 0.0f;
    }
    return m;
}

void Interventions::modulation_all(const PolicyPhase& phase, std::span<const AgentHealth> health, int now,
                                   std::vector<Modulation>& out) const
{
    out.resize(city_.agents.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = modulation(static_cast<AgentId>(i), phase, health[i], now);
}

bool Interventions::quarantine(AgentId a, QuarantineCause cause, int now)
{
    const int start = now + 1;
    if (quarantined(a, start)) return false;
    const auto i = static_cast<std::size_t>(a);
    q_start_[i] = start;
    q_end_[i] = start + params_.quarantine_steps();
    q_cause_[i] = cause;
    records_.push_back({a, cause, q_start_[i], q_end_[i]});
    return true;
}

std::size_t Interventions::isolate_cohort(CohortId cohort, int now)
{
    if (cohorts_ == nullptr || cohort < 0) return 0;
    ++counters_.cohort_isolations;
    std::size_t created = 0;
    for (const AgentId m : cohorts_->cohorts[static_cast<std::size_t>(cohort)].members)
        created += quarantine(m, QuarantineCause::cohort_isolation, now) ? 1 : 0;
    return created;
}

void Interventions::on_exposed(AgentId a)
{
    const auto i = static_cast<std::size_t>(a);
    detected_episode_[i] = 0;
    screened_episode_[i] = 0;
}

void Interventions::trace(AgentId a, double trigger, int now)
{
    if (trigger <= 0.0) return;
    const auto network = close_network(city_, a, cohorts_, params_.trace_includes_cohort);
    const auto traced = contact_trace(network, trigger, params_.trace_fraction, rng_);
    for (const AgentId t : traced) {
        if (quarantine(t, QuarantineCause::contact_traced, now)) ++counters_.traced;
    }
}

void Interventions::detect(AgentId a, const PolicyPhase& phase, int now, double trace_trigger)
{
    const auto i = static_cast<std::size_t>(a);
    if (detected_episode_[i] != 0) return;
    detected_episode_[i] = 1;
    ++counters_.detected;
    quarantine(a, QuarantineCause::index_case, now);
    if (phase.testing) trace(a, trace_trigger, now);
    if (params_.cohort_isolation && cohorts_ != nullptr) {
        const auto& map = cohorts_->cohort_of_agent;
        if (i < map.size() && map[i] >= 0) isolate_cohort(map[i], now);
    }
}

void Interventions::on_symptomatic(AgentId a, const PolicyPhase& phase, int now)
{
    const auto i = static_cast<std::size_t>(a);
    if (phase.home_quarantine && compliant_[i] != 0) {
        const auto& agent = city_.agents[i];
        if (agent.household != kNone) {
            for (const AgentId m : city_.households[static_cast<std::size_t>(agent.household)].members)
                quarantine(m, QuarantineCause::household_symptomatic, now);
        }
    }
    if (phase.testing) {
        if (test_pending_[i] == 0 && bernoulli(rng_, params_.symptomatic_test_probability)) {
            test_pending_[i] = 1;
            ++counters_.tests;
            pending_tests_.emplace_back(now + params_.test_turnaround_days * kStepsPerDay, a);
        }
        trace(a, params_.trace_on_symptoms, now);
    }
}

void Interventions::on_hospitalised(AgentId a, const PolicyPhase& phase, int now)
{
    // Admission confirms the case whether or not testing is running.
    detect(a, phase, now, params_.trace_on_hospitalisation);
}

bool Interventions::screen_traveller(AgentId a, const AgentHealth& health, const PolicyPhase& phase, int now)
{
    const auto i = static_cast<std::size_t>(a);
    if (health.state != DiseaseState::symptomatic || screened_episode_[i] != 0) return false;
    screened_episode_[i] = 1;
    bool caught = station_screen(health.state, params_.station_detection, rng_);
    if (!caught && params_.self_declaration > 0.0) caught = bernoulli(rng_, params_.self_declaration);
    if (!caught) return false;
    ++counters_.station_detections;
    ++counters_.tests;
    detect(a, phase, now, params_.trace_on_positive);
    return true;
}

void Interventions::process_tests(const PolicyPhase& phase, int now)
{
    while (pending_head_ < pending_tests_.size() && pending_tests_[pending_head_].first <= now) {
        const AgentId a = pending_tests_[pending_head_].second;
        ++pending_head_;
        const auto i = static_cast<std::size_t>(a);
        test_pending_[i] = 0;
        // Swabs are taken at symptom onset, so every result is positive.
        detect(a, phase, now, params_.trace_on_positive);
    }
    if (pending_head_ > 4096 && pending_head_ * 2 > pending_tests_.size()) {
        pending_tests_.erase(pending_tests_.begin(), pending_tests_.begin() + static_cast<std::ptrdiff_t>(pending_head_));
        pending_head_ = 0;
    }
}

std::int64_t Interventions::take_new_detections()
{
    const auto fresh = counters_.detected - reported_detections_;
    reported_detections_ = counters_.detected;
    return fresh;
}

std::size_t Interventions::active_quarantines(int step) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < q_start_.size(); ++i) n += (q_start_[i] <= step && step < q_end_[i]) ? 1 : 0;
    return n;
}

std::size_t Interventions::active_quarantines(int step, QuarantineCause cause) const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < q_start_.size(); ++i)
        n += (q_cause_[i] == cause && q_start_[i] <= step && step < q_end_[i]) ? 1 : 0;
    return n;
}

void Interventions::reset_episode_flags()
{
    std::fill(detected_episode_.begin(), detected_episode_.end(), 0);
    std::fill(screened_episode_.begin(), screened_episode_.end(), 0);
}

void write_quarantine_csv(std::ostream& out, std::span<const QuarantineRecord> records)
{
    out << "start_step,end_step,agent,cause\n";
    for (const auto& r : records) out << r.start_step << ',' << r.end_step << ',' << r.agent << ',' << to_string(r.cause) << '\n';
}

} // namespace cohortsim
