#pragma once

#include "cohortsim/cohorting.hpp"
#include "cohortsim/disease.hpp"
#include "cohortsim/interventions.hpp"
#include "cohortsim/rail_network.hpp"
#include "cohortsim/synthetic_city.hpp"
#include "cohortsim/transmission.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cohortsim {

struct CohortingParams {
    int cohort_size = 1;
    double one_off_ratio = 0.0;
    CoachCapacity capacity;
    CoachStrategy strategy = CoachStrategy::static_assignment;
};

struct ScenarioConfig {
    TransmissionParams transmission;
    ProgressionParams progression = ProgressionParams::defaults();
    InterventionParams interventions;
    PolicyTimeline policy;
    CohortingParams cohorting;
    std::string start_date = "2020-02-15"; ///< calendar date of day 0
    int horizon_days = 120;
    int initial_exposed = 100;
    std::uint64_t seed = 1;
    int num_runs = 5;

    void validate() const;
};

/// Morning commute is slot 0 and the evening commute slot 2 of each day.
constexpr bool is_travel_slot(int step) { return step % kStepsPerDay == 0 || step % kStepsPerDay == 2; }

struct DailyMetrics {
    int day = 0;
    std::int64_t new_detected = 0;
    std::int64_t cumulative_detected = 0;
    std::int64_t new_infections = 0;
    std::int64_t cumulative_infections = 0;
    std::int64_t hospitalised = 0; ///< currently hospitalised or critical
    std::int64_t deceased = 0;     ///< cumulative
    std::int64_t quarantined_total = 0;
    std::int64_t quarantined_cohort = 0;
    std::int64_t station_detections = 0; ///< cumulative
    std::array<std::int64_t, kDiseaseStateCount> state_counts{};
};

/// Mean per-susceptible rate contribution by space over one day.
struct DailyContributions {
    double home = 0.0;
    double work = 0.0; ///< workplace, school and their subnetworks
    double community = 0.0;
    double trains = 0.0;
};

struct TimeSeries {
    std::vector<DailyMetrics> days;
    std::vector<DailyContributions> contributions;

    static const std::vector<std::string>& columns();
    /// Value of a named numeric column on one day.
    static double value(const DailyMetrics& m, std::size_t column);
};

void write_timeseries_csv(std::ostream& out, const TimeSeries& series);
TimeSeries read_timeseries_csv(std::istream& in);
void write_contributions_csv(std::ostream& out, const TimeSeries& series);

struct InvariantReport {
    std::size_t coach_violations = 0;
    std::size_t conservation_violations = 0;
    std::size_t quarantine_violations = 0;
    std::size_t monotonicity_violations = 0;
    std::size_t assignments_audited = 0;
    std::vector<std::string> messages; ///< first few violations, for diagnostics

    bool ok() const
    {
        return coach_violations == 0 && conservation_violations == 0 && quarantine_violations == 0 &&
               monotonicity_violations == 0;
    }
};

/// Infection state of every agent at a timestep boundary. RNG state and
/// cohort assignments are deliberately not part of it.
struct Checkpoint {
    std::int32_t step = 0;
    std::vector<AgentHealth> health;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws ValidationError if the checkpoint was taken on a different population size.
Checkpoint load_checkpoint(const City& city, const std::filesystem::path& path);

class Simulation {
public:
    /// Seeds `initial_exposed` random agents unless `resume` is given, in which
    /// case infection states and the clock come from the checkpoint while
    /// cohorts, coaches and random streams are rebuilt from `config`.
    Simulation(const City& city, const RailNetwork& network, ScenarioConfig config,
               const Checkpoint* resume = nullptr);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void step();
    /// Steps until `day` full days have been simulated since day 0.
    void run_until_day(int day);
    void run() { run_until_day(config_.horizon_days); }

    int current_step() const { return step_; }
    int current_day() const { return step_ / kStepsPerDay; }
    const ScenarioConfig& config() const { return config_; }
    const std::vector<AgentHealth>& health() const { return health_; }
    const TimeSeries& series() const { return series_; }
    const InvariantReport& invariants() const { return invariants_; }
    const CohortPlan& cohorts() const { return plan_; }
    const Interventions& interventions() const { return interventions_; }
    const TransmissionModel& model() const { return model_; }
    /// Most recent coach assignment used by a travel slot, if any.
    const CoachAssignment* last_assignment() const { return last_assignment_; }

    Checkpoint checkpoint() const { return {step_, health_}; }

private:
    void record_day();
    void audit(const CoachAssignment& assignment);

    const City& city_;
    const RailNetwork& network_;
    ScenarioConfig config_;
    RngStreams streams_;
    Rng disease_rng_;
    TransmissionModel model_;
    Interventions interventions_;
    CohortPlan plan_;
    std::unique_ptr<CoachScheduler> scheduler_;
    const CoachAssignment* last_assignment_ = nullptr;

    std::vector<AgentHealth> health_;
    std::vector<Modulation> kappa_;
    std::vector<AgentId> commuters_;
    int step_ = 0;

    std::int64_t day_infections_ = 0;
    std::int64_t cumulative_infections_ = 0;
    std::int64_t deaths_ = 0;
    std::int64_t cumulative_detected_ = 0;
    std::size_t audited_records_ = 0;
    DailyContributions day_contrib_;
    TimeSeries series_;
    InvariantReport invariants_;
};

/// Convenience: build, run to the horizon, and return the series.
TimeSeries run_scenario(const City& city, const RailNetwork& network, const ScenarioConfig& config,
                        InvariantReport* report = nullptr);

/// One point of a parameter grid; `params` are the swept key=value pairs.
struct SweepCell {
    std::vector<std::pair<std::string, std::string>> params;
    ScenarioConfig config;
};

struct CellStatistics {
    std::vector<std::vector<double>> mean; ///< [column][day]
    std::vector<std::vector<double>> sd;   ///< population standard deviation (ddof 0)
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<std::vector<TimeSeries>> runs; ///< [cell][run]
    std::vector<CellStatistics> stats;
    std::vector<InvariantReport> reports; ///< one per run, cell-major
    bool invariants_ok() const;
};

CellStatistics summarize(const std::vector<TimeSeries>& runs);

/// Runs every cell `runs_per_cell` times. Run r of every cell uses seed
/// base_seed + r, so cells differ only in their parameters. Jobs are spread
/// over `threads` workers (0 picks COHORTSIM_THREADS or the hardware count).
SweepResult sweep(const City& city, const RailNetwork& network, std::vector<SweepCell> cells, int runs_per_cell,
                  std::uint64_t base_seed, unsigned threads = 0);

/// Long-format summary: cell parameters, day, then `<metric>_mean` and
/// `<metric>_sd` for every time-series column.
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);

/// Worker count from COHORTSIM_THREADS, falling back to the hardware count.
unsigned default_thread_count();

} // namespace cohortsim
