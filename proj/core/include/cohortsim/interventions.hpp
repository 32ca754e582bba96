#pragma once

#include "cohortsim/cohorting.hpp"
#include "cohortsim/disease.hpp"
#include "cohortsim/synthetic_city.hpp"
#include "cohortsim/transmission.hpp"

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cohortsim {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date d);
int days_between(Date from, Date to);

/// Rules in force from `start_day` until the next phase begins.
struct PolicyPhase {
    int start_day = 0;
    bool lockdown = false;
    bool schools_closed = false;
    double office_attendance = 1.0;
    bool masks = false;
    bool containment = false;
    bool trains_running = true;
    bool testing = false;         ///< testing and contact tracing protocols
    bool home_quarantine = false; ///< symptomatic compliant agents quarantine their household
    bool elderly_distancing = false;
};

class PolicyTimeline {
public:
    PolicyTimeline() : phases_{PolicyPhase{}} {}
    explicit PolicyTimeline(std::vector<PolicyPhase> phases);

    /// Phase active on `day`; days before the first phase use the first phase.
    const PolicyPhase& at(int day) const;
    const std::vector<PolicyPhase>& phases() const { return phases_; }

    /// Everything open, nothing enforced.
    static PolicyTimeline no_intervention();

    /// Lockdown, phased office reopening and a train restart on the historical
    /// calendar, expressed as offsets from `start`.
    static PolicyTimeline mumbai_2020(Date start);

private:
    std::vector<PolicyPhase> phases_;
};

enum class QuarantineCause : std::uint8_t { household_symptomatic, contact_traced, cohort_isolation, index_case };
inline constexpr std::size_t kQuarantineCauseCount = 4;
std::string_view to_string(QuarantineCause c);

struct QuarantineRecord {
    AgentId agent = 0;
    QuarantineCause cause = QuarantineCause::index_case;
    std::int32_t start_step = 0; ///< first quarantined timestep
    std::int32_t end_step = 0;   ///< exclusive
};

struct InterventionParams {
    double compliance_high_density = 0.6;
    double compliance_other = 0.4;

    double lockdown_work_compliant = 0.1;
    double lockdown_work_noncompliant = 0.25;
    double lockdown_community_compliant = 0.25;
    double lockdown_community_noncompliant = 0.5;

    double mask_factor = 0.8; ///< on every non-household space, compliant agents only
    int elderly_age = 65;
    double elderly_community_factor = 0.5;

    int quarantine_days = 14;
    double quarantine_home = 0.75;
    double quarantine_work = 0.0;
    double quarantine_community = 0.1;

    double containment_threshold = 2.0; ///< hospitalised residents per 10k above which a ward is contained
    double containment_community = 0.25;

    // Testing and tracing.
    double trace_on_hospitalisation = 1.0;
    double trace_on_positive = 1.0;
    double trace_on_symptoms = 0.0;
    double trace_fraction = 0.5;
    bool trace_includes_cohort = false;
    double symptomatic_test_probability = 0.3;
    int test_turnaround_days = 1;

    // Cohort policy.
    bool cohort_isolation = true;
    double station_detection = 0.0;
    double self_declaration = 0.0;

    double severe_attendance_multiplier = 1.0; ///< experimental; scales work kappa of severe symptomatic agents

    void validate() const;
    int quarantine_steps() const { return quarantine_days * kStepsPerDay; }
};

/// Close network of an agent for contact tracing.
std::vector<AgentId> close_network(const City& city, AgentId agent, const CohortPlan* cohorts, bool include_cohort);

/// With probability `trigger` the event starts tracing; each close contact is
/// then traced independently with probability `fraction`.
std::vector<AgentId> contact_trace(std::span<const AgentId> network, double trigger, double fraction, Rng& rng);

/// Bernoulli screening of a traveller; only symptomatic agents can be caught.
bool station_screen(DiseaseState state, double detection_probability, Rng& rng);

struct EventCounters {
    std::int64_t detected = 0;
    std::int64_t tests = 0;
    std::int64_t station_detections = 0;
    std::int64_t traced = 0;
    std::int64_t cohort_isolations = 0;
};

/// Per-run intervention state: compliance flags, quarantine windows, the
/// per-episode detection bookkeeping and pending test results.
class Interventions {
public:
    Interventions(const City& city, InterventionParams params, Rng rng);

    const InterventionParams& params() const { return params_; }
    bool compliant(AgentId a) const { return compliant_[static_cast<std::size_t>(a)] != 0; }
    void set_cohorts(const CohortPlan* plan) { cohorts_ = plan; }

    /// Refreshes the ward containment flags from current hospitalisations.
    void update_containment(const PolicyPhase& phase, std::span<const AgentHealth> health);
    bool contained(WardId w) const { return contained_[static_cast<std::size_t>(w)] != 0; }

    Modulation modulation(AgentId a, const PolicyPhase& phase, const AgentHealth& health, int now) const;
    void modulation_all(const PolicyPhase& phase, std::span<const AgentHealth> health, int now,
                        std::vector<Modulation>& out) const;

    bool quarantined(AgentId a, int step) const
    {
        const auto i = static_cast<std::size_t>(a);
        return q_start_[i] <= step && step < q_end_[i];
    }
    QuarantineCause quarantine_cause(AgentId a) const { return q_cause_[static_cast<std::size_t>(a)]; }

    /// Starts a window at `now + 1` unless the agent is already covered then.
    bool quarantine(AgentId a, QuarantineCause cause, int now);
    /// Quarantines every member of the agent's cohort; returns records created.
    std::size_t isolate_cohort(CohortId cohort, int now);

    // Event hooks, called by the engine after health updates.
    void on_exposed(AgentId a);
    void on_symptomatic(AgentId a, const PolicyPhase& phase, int now);
    void on_hospitalised(AgentId a, const PolicyPhase& phase, int now);
    /// Station screening in a travel slot. Returns true on detection.
    bool screen_traveller(AgentId a, const AgentHealth& health, const PolicyPhase& phase, int now);
    /// Delivers test results due at `now`.
    void process_tests(const PolicyPhase& phase, int now);

    const std::vector<QuarantineRecord>& records() const { return records_; }
    const EventCounters& counters() const { return counters_; }
    /// Detections since the last call.
    std::int64_t take_new_detections();

    std::size_t active_quarantines(int step) const;
    std::size_t active_quarantines(int step, QuarantineCause cause) const;

    // Checkpoint-free reset of per-agent state (compliance is kept).
    void reset_episode_flags();

private:
    void detect(AgentId a, const PolicyPhase& phase, int now, double trace_trigger);
    void trace(AgentId a, double trigger, int now);

    const City& city_;
    InterventionParams params_;
    Rng rng_;
    const CohortPlan* cohorts_ = nullptr;
    std::vector<std::uint8_t> compliant_;
    std::vector<std::uint8_t> contained_;
    std::vector<std::int32_t> q_start_;
    std::vector<std::int32_t> q_end_;
    std::vector<QuarantineCause> q_cause_;
    std::vector<std::uint8_t> detected_episode_;
    std::vector<std::uint8_t> screened_episode_;
    std::vector<std::uint8_t> test_pending_;
    std::vector<std::pair<std::int32_t, AgentId>> pending_tests_; ///< (result step, agent), FIFO by step
    std::size_t pending_head_ = 0;
    std::vector<QuarantineRecord> records_;
    EventCounters counters_;
    std::int64_t reported_detections_ = 0;
};

/// CSV `start_step,end_step,agent,cause` of every quarantine window.
void write_quarantine_csv(std::ostream& out, std::span<const QuarantineRecord> records);

} // namespace cohortsim
