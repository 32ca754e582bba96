#pragma once

#include "cohortsim/engine.hpp"
#include "cohortsim/interventions.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cohortsim {

/// Least-squares slope of ln(count) against day. With `days` empty the
/// points are taken one day apart. Throws ValidationError on non-positive
/// counts or fewer than two points.
double log_slope(std::span<const double> counts, std::span<const double> days = {});

/// Slope of ln(cumulative) over the stretch where the series first reaches
/// `lo` until it first reaches `hi` (inclusive), or until the end of the
/// series. Returns 0 when fewer than two points qualify.
double windowed_log_slope(std::span<const double> cumulative, double lo, double hi);

/// (beta_H * r_T / r_H) / dt: per-minute coach coefficient from household
/// contacts per day and train contacts per minute.
double derive_beta_coach(double beta_home, double household_contacts_per_day, double train_contacts_per_minute,
                         double dt_days);

struct CalibrationTarget {
    std::vector<Date> dates;
    std::vector<double> cumulative; ///< observed cumulative fatalities

    /// Slope of the observed series against calendar days.
    double slope() const;
    void validate() const;
};

/// Two columns `date,cumulative` with a header row.
CalibrationTarget read_target_csv(std::istream& in);
void write_target_csv(std::ostream& out, const CalibrationTarget& target);

struct Betas {
    double home = 0.0;
    double school = 0.0;
    double work = 0.0;
    double community = 0.0;

    static Betas from(const TransmissionParams& p) { return {p.beta_home, p.beta_school, p.beta_work, p.beta_community}; }
    void apply(TransmissionParams& p) const;
};

/// What one simulated calibration run reports back.
struct CalibrationObservation {
    std::vector<double> cumulative_fatalities; ///< per day
    std::array<double, 3> contributions{};     ///< summed home, work, community rate contributions
};

using CalibrationRunner = std::function<CalibrationObservation(const Betas&, std::uint64_t seed)>;

struct CalibrationOptions {
    double window_lo = 10.0;    ///< simulated fatality count opening the fitting window
    double window_hi = 199.0;   ///< simulated fatality count closing it
    int seeds = 3;              ///< runs averaged per evaluation
    std::uint64_t base_seed = 1;
    double tolerance = 0.05;    ///< relative slope mismatch accepted
    double share_lo = 0.28;
    double share_hi = 0.39;
    bool balance_shares = true;
    double school_work_ratio = 2.0; ///< beta_s tied to beta_w
    int max_iterations = 25;
    double probe = 0.15;        ///< initial finite-difference half-width in log-beta
    double max_step = 0.7;      ///< largest log-scale change per iteration

    void validate() const;
};

struct CalibrationStep {
    int iteration = 0;
    Betas betas;
    double slope = 0.0;
    std::array<double, 3> shares{};
};

struct CalibrationResult {
    Betas betas;
    double slope = 0.0;
    double target_slope = 0.0;
    std::array<double, 3> shares{}; ///< home, work, community; sums to 1
    bool converged = false;
    int iterations = 0;
    /// Simulation day on which the mean fatality curve first reaches the
    /// target's first count; day 0 then maps to target.dates[0] - this.
    int alignment_day = 0;
    std::string start_date;
    std::vector<CalibrationStep> trace;
};

/// Two-part stochastic approximation. A common scale on (beta_h, beta_w,
/// beta_c) is moved by finite-difference secant steps in log space with
/// shrinking probes until the simulated slope is within tolerance of the
/// target; when share balancing is on, a multiplicative update pulls each
/// space's contribution share toward one third at the same time. beta_s
/// follows beta_w. Every evaluation averages `seeds` runs with common seeds.
CalibrationResult calibrate(const CalibrationTarget& target, const CalibrationRunner& runner, Betas initial,
                            const CalibrationOptions& options);

/// Runner that simulates `base` (normally a no-intervention scenario) with
/// the proposed betas.
CalibrationRunner simulation_runner(const City& city, const RailNetwork& network, ScenarioConfig base);

/// Config overlay (YAML) carrying the calibrated betas and start date.
void write_calibration_overlay(std::ostream& out, const CalibrationResult& result);

} // namespace cohortsim
