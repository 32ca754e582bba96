#include "cohortsim/calibration.hpp"

#include "cohortsim/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>

namespace cohortsim {

double log_slope(std::span<const double> counts, std::span<const double> days)
{
    if (counts.size() < 2) throw ValidationError("log slope needs at least two points");
    if (!days.empty() && days.size() != counts.size()) throw ValidationError("days and counts differ in length");
    const auto n = static_cast<double>(counts.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> x(counts.size()), y(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!(counts[i] > 0.0)) throw ValidationError("log slope requires strictly positive counts");
        x[i] = days.empty() ? static_cast<double>(i) : days[i];
        y[i] = std::log(counts[i]);
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("log slope needs at least two distinct days");
    return sxy / sxx;
}

double windowed_log_slope(std::span<const double> cumulative, double lo, double hi)
{
    std::vector<double> counts, days;
    for (std::size_t d = 0; d < cumulative.size(); ++d) {
        if (cumulative[d] < lo || cumulative[d] <= 0.0) {
            if (counts.empty()) continue;
            break;
        }
        counts.push_back(cumulative[d]);
        days.push_back(static_cast<double>(d));
        if (cumulative[d] >= hi) break;
    }
    if (counts.size() < 2) return 0.0;
    return log_slope(counts, days);
}

double derive_beta_coach(double beta_home, double household_contacts_per_day, double train_contacts_per_minute,
                         double dt_days)
{
    if (!(household_contacts_per_day > 0.0)) throw ValidationError("household contact rate must be positive");
    if (!(dt_days > 0.0)) throw ValidationError("timestep must be positive");
    const double p_contact = beta_home / household_contacts_per_day;
    return p_contact * train_contacts_per_minute / dt_days;
}

void CalibrationTarget::validate() const
{
    if (dates.size() != cumulative.size()) throw ValidationError("target dates and counts differ in length");
    if (dates.size() < 2) throw ValidationError("calibration target needs at least two observations");
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
        if (!(cumulative[i] > 0.0)) throw ValidationError("target counts must be positive");
        if (i > 0 && cumulative[i] < cumulative[i - 1]) throw ValidationError("target counts must be nondecreasing");
        if (i > 0 && days_between(dates[i - 1], dates[i]) <= 0)
            throw ValidationError("target dates must be strictly increasing");
    }
}

double CalibrationTarget::slope() const
{
    validate();
    std::vector<double> days;
    for (const auto& d : dates) days.push_back(days_between(dates.front(), d));
    return log_slope(cumulative, days);
}

CalibrationTarget read_target_csv(std::istream& in)
{
    CalibrationTarget t;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        if (header) {
            header = false;
            if (!trimmed.empty() && !std::isdigit(static_cast<unsigned char>(trimmed[0]))) continue;
        }
        const auto f = detail::split(trimmed, ',');
        if (f.size() != 2) throw ParseError("target rows need exactly two fields: '" + trimmed + "'");
        t.dates.push_back(parse_date(f[0]));
        t.cumulative.push_back(detail::parse_double(f[1]));
    }
    t.validate();
    return t;
}

void write_target_csv(std::ostream& out, const CalibrationTarget& target)
{
    out << "date,cumulative\n";
    for (std::size_t i = 0; i < target.dates.size(); ++i)
        out << format_date(target.dates[i]) << ',' << target.cumulative[i] << '\n';
}

void Betas::apply(TransmissionParams& p) const
{
    p.beta_home = home;
    p.beta_school = school;
    p.beta_work = work;
    p.beta_community = community;
}

void CalibrationOptions::validate() const
{
    if (!(window_lo > 0.0) || !(window_hi > window_lo)) throw ValidationError("calibration window must satisfy 0 < lo < hi");
    if (seeds < 1) throw ValidationError("calibration needs at least one seed per evaluation");
    if (!(tolerance > 0.0)) throw ValidationError("calibration tolerance must be positive");
    if (!(share_lo >= 0.0 && share_lo < share_hi && share_hi <= 1.0))
        throw ValidationError("share band must satisfy 0 <= lo < hi <= 1");
    if (!(school_work_ratio >= 0.0)) throw ValidationError("school/work ratio cannot be negative");
    if (max_iterations < 0) throw ValidationError("max iterations cannot be negative");
    if (!(probe > 0.0) || !(max_step > 0.0)) throw ValidationError("probe and step size must be positive");
}

namespace {

struct Evaluation {
    double slope = 0.0;
    std::array<double, 3> shares{};
    std::vector<double> mean_fatalities;
};

} // namespace

CalibrationResult calibrate(const CalibrationTarget& target, const CalibrationRunner& runner, Betas initial,
                            const CalibrationOptions& options)
{
    options.validate();
    const double target_slope = target.slope();
    if (!(target_slope > 0.0)) throw ValidationError("calibration target must be growing");

    const Betas base = initial;
    double theta = 0.0; // log of the common scale
    std::array<double, 3> weight{1.0, 1.0, 1.0};
    auto betas_at = [&](double t) {
        const double s = std::exp(t);
        Betas b;
        b.home = std::max(0.0, base.home * s * weight[0]);
        b.work = std::max(0.0, base.work * s * weight[1]);
        b.community = std::max(0.0, base.community * s * weight[2]);
        b.school = b.work * options.school_work_ratio;
        return b;
    };
    auto evaluate = [&](const Betas& b) {
        Evaluation e;
        std::array<double, 3> contrib{};
        std::vector<std::vector<double>> series;
        for (int s = 0; s < options.seeds; ++s) {
            auto obs = runner(b, options.base_seed + static_cast<std::uint64_t>(s));
            for (std::size_t k = 0; k < 3; ++k) contrib[k] += obs.contributions[k];
            series.push_back(std::move(obs.cumulative_fatalities));
        }
        std::size_t days = series.front().size();
        for (const auto& v : series) days = std::min(days, v.size());
        e.mean_fatalities.assign(days, 0.0);
        for (const auto& v : series) {
            for (std::size_t d = 0; d < days; ++d) e.mean_fatalities[d] += v[d] / static_cast<double>(series.size());
        }
        e.slope = windowed_log_slope(e.mean_fatalities, options.window_lo, options.window_hi);
        const double total = contrib[0] + contrib[1] + contrib[2];
        for (std::size_t k = 0; k < 3; ++k) e.shares[k] = total > 0.0 ? contrib[k] / total : 1.0 / 3.0;
        return e;
    };

    CalibrationResult result;
    result.target_slope = target_slope;
    Betas current = betas_at(theta);
    Evaluation eval = evaluate(current);
    double last_gradient = 0.0;
    int it = 0;
    for (;; ++it) {
        result.trace.push_back({it, current, eval.slope, eval.shares});
        const bool slope_ok = std::abs(eval.slope - target_slope) <= options.tolerance * target_slope;
        const bool shares_ok = !options.balance_shares ||
                               std::all_of(eval.shares.begin(), eval.shares.end(), [&](double s) {
                                   return s >= options.share_lo && s <= options.share_hi;
                               });
        if (slope_ok && shares_ok) {
            result.converged = true;
            break;
        }
        if (it >= options.max_iterations) break;

        const double k = static_cast<double>(it);
        if (!slope_ok) {
            // Two-sided finite-difference estimate of d(slope)/d(log scale).
            const double c = options.probe / std::pow(1.0 + k, 1.0 / 6.0);
            const double up = evaluate(betas_at(theta + c)).slope;
            const double down = evaluate(betas_at(theta - c)).slope;
            double g = (up - down) / (2.0 * c);
            if (!(g > 1e-6)) g = last_gradient > 1e-6 ? last_gradient : 0.0;
            const double gain = 1.0 / std::pow(1.0 + k, 0.3);
            double step;
            if (g > 0.0) {
                step = -gain * (eval.slope - target_slope) / g;
                last_gradient = g;
            } else {
                // Flat response (e.g. epidemic never reaching the window): push outward.
                step = eval.slope < target_slope ? options.max_step : -options.max_step;
            }
            theta += std::clamp(step, -options.max_step, options.max_step);
        }
        if (options.balance_shares) {
            for (std::size_t s = 0; s < 3; ++s) {
                const double share = std::max(eval.shares[s], 1e-6);
                weight[s] *= std::clamp(std::sqrt((1.0 / 3.0) / share), 0.5, 2.0);
            }
            const double geo = std::cbrt(weight[0] * weight[1] * weight[2]);
            for (auto& w : weight) w /= geo;
        }
        current = betas_at(theta);
        eval = evaluate(current);
    }

    result.betas = current;
    result.slope = eval.slope;
    result.shares = eval.shares;
    result.iterations = it;
    const auto& mf = eval.mean_fatalities;
    const auto reach = std::find_if(mf.begin(), mf.end(), [&](double v) { return v >= target.cumulative.front(); });
    result.alignment_day = reach == mf.end() ? static_cast<int>(mf.size()) : static_cast<int>(reach - mf.begin());
    const auto start = std::chrono::sys_days{target.dates.front()} - std::chrono::days{result.alignment_day};
    result.start_date = format_date(Date{start});
    return result;
}

CalibrationRunner simulation_runner(const City& city, const RailNetwork& network, ScenarioConfig base)
{
    return [&city, &network, base](const Betas& betas, std::uint64_t seed) {
        ScenarioConfig config = base;
        betas.apply(config.transmission);
        config.seed = seed;
        Simulation sim(city, network, config);
        sim.run();
        CalibrationObservation obs;
        for (const auto& m : sim.series().days) obs.cumulative_fatalities.push_back(static_cast<double>(m.deceased));
        for (const auto& c : sim.series().contributions) {
            obs.contributions[0] += c.home;
            obs.contributions[1] += c.work;
            obs.contributions[2] += c.community;
        }
        return obs;
    };
}

void write_calibration_overlay(std::ostream& out, const CalibrationResult& result)
{
    const auto old = out.precision(10);
    out << "# calibrated: slope " << result.slope << " vs target " << result.target_slope << " after "
        << result.iterations << " iterations" << (result.converged ? "" : " (not converged)") << '\n';
    out << "# shares home/work/community: " << result.shares[0] << ' ' << result.shares[1] << ' '
        << result.shares[2] << '\n';
    out << "transmission:\n"
        << "  beta_home: " << result.betas.home << '\n'
        << "  beta_school: " << result.betas.school << '\n'
        << "  beta_work: " << result.betas.work << '\n'
        << "  beta_community: " << result.betas.community << '\n'
        << "scenario:\n"
        << "  start_date: " << result.start_date << '\n';
    out.precision(old);
}

} // namespace cohortsim
