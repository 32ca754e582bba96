// Acceptance suite: scaled-city checks of the formula oracles, hard
// invariants, qualitative cohorting trends, ridership, determinism and
// calibration. Prints one PASS/FAIL line per criterion and exits non-zero if
// any fails. An optional argument restricts the run to criteria whose name
// contains it.

#include "cohortsim/calibration.hpp"
#include "cohortsim/config.hpp"
#include "fixtures.hpp"
#include "transmission_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace cohortsim;

namespace {

constexpr int kSeedsPerCell = 5;
constexpr int kRepetitions = 5;

std::uint64_t repetition_seed(int rep) { return 1000 + 100 * static_cast<std::uint64_t>(rep); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4)
{
    std::ostringstream o;
    o << std::setprecision(precision) << v;
    return o.str();
}

class Harness {
public:
    Harness()
    {
        config_ = load_config(bundled_data_dir() / "scenarios" / "restart.yaml");
        network_ = load_config_network(config_);
        city_ = build_city(config_, network_);
        std::cout << "city: " << city_.population() << " agents, " << city_.train_commuters()
                  << " train commuters; scenario horizon " << config_.scenario.horizon_days << " days\n";
    }

    const City& city() const { return city_; }
    const RailNetwork& network() const { return network_; }
    const ScenarioConfig& base() const { return config_.scenario; }

    /// Five seeds of a scenario variant; cached by name and repetition.
    const std::vector<TimeSeries>& cell(const std::string& name, int rep,
                                        const std::function<void(ScenarioConfig&)>& edit = {})
    {
        const auto key = name + "#" + std::to_string(rep);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second.runs;
        ScenarioConfig sc = base();
        if (edit) edit(sc);
        const auto t0 = std::chrono::steady_clock::now();
        auto result = sweep(city_, network_, {{{}, sc}}, kSeedsPerCell, repetition_seed(rep));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "  simulated " << key << " (" << kSeedsPerCell << " seeds, " << fmt(secs, 3) << " s)\n"
                  << std::flush;
        for (const auto& r : result.reports) reports_.push_back(r);
        auto& slot = cache_[key];
        slot.runs = std::move(result.runs.front());
        return slot.runs;
    }

    const std::vector<InvariantReport>& reports() const { return reports_; }

private:
    struct Cached {
        std::vector<TimeSeries> runs;
    };
    Config config_;
    RailNetwork network_;
    City city_;
    std::map<std::string, Cached> cache_;
    std::vector<InvariantReport> reports_;
};

std::size_t column(const std::string& name)
{
    const auto& cols = TimeSeries::columns();
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
}

double peak_mean(const std::vector<TimeSeries>& runs, const std::string& col)
{
    const auto st = summarize(runs);
    const auto& m = st.mean[column(col)];
    return *std::max_element(m.begin(), m.end());
}

double final_mean(const std::vector<TimeSeries>& runs, const std::string& col)
{
    const auto st = summarize(runs);
    return st.mean[column(col)].back();
}

double total_mean(const std::vector<TimeSeries>& runs, const std::string& col)
{
    const auto st = summarize(runs);
    double s = 0.0;
    for (const double v : st.mean[column(col)]) s += v;
    return s;
}

void with_size(ScenarioConfig& sc, int size) { sc.cohorting.cohort_size = size; }

// --- criteria ---------------------------------------------------------------

Outcome formula_oracles(Harness&)
{
    fixtures::OracleWorld w;
    TransmissionParams p;
    TransmissionModel model(w.city, p);
    const auto agg = model.aggregate(w.health, w.kappa);
    const auto trains = model.train_rates(w.plan.cohorts, w.asg, w.net, w.health, w.kappa);
    double worst = 0.0;
    for (AgentId a = 0; a < 20; ++a) {
        const auto got = model.lambda(a, w.kappa[static_cast<std::size_t>(a)], agg, &trains, w.plan.cohort_of_agent);
        const auto want = fixtures::oracle(w, p, a);
        for (const auto& [g, e] : {std::pair{got.home, want.home}, std::pair{got.workplace, want.workplace},
                                   std::pair{got.subnetwork, want.subnetwork}, std::pair{got.community, want.community},
                                   std::pair{got.trains, want.trains}})
            worst = std::max(worst, fixtures::rel_diff(g, e));
    }
    for (const auto& h : w.city.households) {
        double sum = 0.0;
        for (const AgentId m : h.members) sum += fixtures::shed(w, static_cast<std::size_t>(m), Space::home);
        const double want = p.beta_home * std::pow(static_cast<double>(h.members.size()), -p.household_alpha) * sum;
        worst = std::max(worst, fixtures::rel_diff(lambda_household(h.members, w.health, w.kappa, p), want));
    }
    for (const double lambda : {0.01, 0.3, 2.0, 25.0})
        worst = std::max(worst, fixtures::rel_diff(infection_probability(lambda, 0.25), 1.0 - std::exp(-lambda * 0.25)));
    const double coach = derive_beta_coach(0.7928, 50.0, 0.01, 0.25);
    worst = std::max(worst, fixtures::rel_diff(coach, 0.7928 * 0.01 / (50.0 * 0.25)));
    const double vs_value = fixtures::rel_diff(coach, 0.00063424);
    const bool pass = worst <= 1e-12 && vs_value <= 1e-12;
    return {pass, "max relative error " + fmt(worst, 3) + "; derive_beta_coach(0.7928, 50, 0.01, 0.25) = " +
                      fmt(coach, 17)};
}

Outcome isolated_cohort_sizes(Harness& h)
{
    int ok = 0;
    std::string detail;
    for (int rep = 0; rep < kRepetitions; ++rep) {
        std::array<double, 3> peak{};
        const std::array<int, 3> sizes{1, 4, 16};
        for (std::size_t i = 0; i < 3; ++i)
            peak[i] = peak_mean(h.cell("iso1_size" + std::to_string(sizes[i]), rep,
                                       [&](ScenarioConfig& sc) { with_size(sc, sizes[i]); }),
                                "new_detected");
        const bool dec = peak[0] > peak[1] && peak[1] > peak[2];
        ok += dec ? 1 : 0;
        detail += (rep ? "; " : "") + fmt(peak[0]) + ">" + fmt(peak[1]) + ">" + fmt(peak[2]) + (dec ? "" : " (x)");
    }
    return {ok >= 4, std::to_string(ok) + "/5 repetitions strictly decreasing peak detected: " + detail};
}

Outcome unisolated_cohort_overlap(Harness& h)
{
    std::vector<CellStatistics> st;
    for (const int size : {1, 4, 16}) {
        st.push_back(summarize(h.cell("iso0_size" + std::to_string(size), 0, [&](ScenarioConfig& sc) {
            with_size(sc, size);
            sc.interventions.cohort_isolation = false;
        })));
    }
    const auto c = column("new_detected");
    const auto days = st[0].mean[c].size();
    std::size_t overlap = 0;
    for (std::size_t d = 0; d < days; ++d) {
        bool all = true;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i + 1; j < 3; ++j)
                all = all && std::abs(st[i].mean[c][d] - st[j].mean[c][d]) <= st[i].sd[c][d] + st[j].sd[c][d];
        }
        overlap += all ? 1 : 0;
    }
    const double frac = static_cast<double>(overlap) / static_cast<double>(days);
    return {frac >= 0.8, "daily detected bands of sizes 1/4/16 overlap on " + fmt(100.0 * frac, 3) + "% of days"};
}

Outcome crowding_vs_isolation(Harness& h)
{
    int ok = 0;
    std::string detail;
    for (int rep = 0; rep < kRepetitions; ++rep) {
        const double halved = final_mean(h.cell("crowd1_iso0_size16", rep,
                                                [](ScenarioConfig& sc) {
                                                    with_size(sc, 16);
                                                    sc.cohorting.capacity.crowding_factor = 1.0;
                                                    sc.interventions.cohort_isolation = false;
                                                }),
                                         "cumulative_infections");
        const double isolated = final_mean(h.cell("iso1_size16", rep, [](ScenarioConfig& sc) { with_size(sc, 16); }),
                                           "cumulative_infections");
        ok += halved < isolated ? 1 : 0;
        detail += (rep ? "; " : "") + fmt(halved, 6) + " vs " + fmt(isolated, 6);
    }
    return {ok >= 4, std::to_string(ok) + "/5 repetitions with crowding 1 below isolation at crowding 2: " + detail};
}

Outcome station_detection(Harness& h)
{
    std::vector<double> cum;
    std::string detail;
    for (const double p : {0.0, 0.25, 0.5, 1.0}) {
        cum.push_back(final_mean(h.cell("detect" + fmt(p), 0,
                                        [&](ScenarioConfig& sc) { sc.interventions.station_detection = p; }),
                                 "cumulative_infections"));
        detail += (detail.empty() ? "" : ", ") + fmt(p) + ":" + fmt(cum.back(), 6);
    }
    const bool mono = std::is_sorted(cum.rbegin(), cum.rend());
    return {mono, "mean cumulative infections by detection probability " + detail};
}

Outcome static_vs_dynamic(Harness& h)
{
    const auto fixed = summarize(h.cell("iso1_size16", 0, [](ScenarioConfig& sc) { with_size(sc, 16); }));
    const auto dyn = summarize(h.cell("dynamic_size16", 0, [](ScenarioConfig& sc) {
        with_size(sc, 16);
        sc.cohorting.strategy = CoachStrategy::dynamic_assignment;
    }));
    // Same statistic between two independent seed sets of the static
    // strategy, reported alongside for scale; it does not affect the verdict.
    const auto reference = summarize(h.cell("iso1_size16", 1, [](ScenarioConfig& sc) { with_size(sc, 16); }));
    const auto c = column("new_detected");
    auto inside_fraction = [&](const CellStatistics& a, const CellStatistics& b) {
        const auto days = a.mean[c].size();
        std::size_t inside = 0;
        for (std::size_t d = 0; d < days; ++d) {
            const double gap = std::abs(a.mean[c][d] - b.mean[c][d]);
            inside += gap <= a.sd[c][d] && gap <= b.sd[c][d] ? 1 : 0;
        }
        return static_cast<double>(inside) / static_cast<double>(days);
    };
    const double frac = inside_fraction(fixed, dyn);
    return {frac >= 0.8, "static and dynamic daily detected means inside each other's band on " +
                             fmt(100.0 * frac, 3) + "% of days (two static seed sets: " +
                             fmt(100.0 * inside_fraction(fixed, reference), 3) + "%); cumulative infections " +
                             fmt(fixed.mean[column("cumulative_infections")].back(), 6) + " static vs " +
                             fmt(dyn.mean[column("cumulative_infections")].back(), 6) + " dynamic"};
}

Outcome quarantines_and_one_off(Harness& h)
{
    std::array<double, 3> cohort_q{}, total_q{};
    const std::array<int, 3> sizes{1, 4, 16};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& runs =
            h.cell("iso1_size" + std::to_string(sizes[i]), 0, [&](ScenarioConfig& sc) { with_size(sc, sizes[i]); });
        cohort_q[i] = total_mean(runs, "quarantined_cohort");
        total_q[i] = total_mean(runs, "quarantined_total");
    }
    const bool cohort_up = cohort_q[0] < cohort_q[1] && cohort_q[1] < cohort_q[2];
    const double change = std::abs(total_q[2] - total_q[0]) / total_q[0];
    const double baseline = final_mean(h.cell("iso1_size1", 0, [](ScenarioConfig& sc) { with_size(sc, 1); }),
                                       "cumulative_infections");
    bool one_off_ok = true;
    std::string one_off;
    for (const double ratio : {0.0, 0.1, 0.4}) {
        const auto name = ratio == 0.0 ? std::string("iso1_size16") : "one_off" + fmt(ratio) + "_size16";
        const double cum = final_mean(h.cell(name, 0,
                                             [&](ScenarioConfig& sc) {
                                                 with_size(sc, 16);
                                                 sc.cohorting.one_off_ratio = ratio;
                                             }),
                                      "cumulative_infections");
        one_off_ok = one_off_ok && cum < baseline;
        one_off += (one_off.empty() ? "" : ", ") + fmt(ratio) + ":" + fmt(cum, 6);
    }
    const bool pass = cohort_up && change < 0.2 && one_off_ok;
    return {pass, "cohort quarantine person-days " + fmt(cohort_q[0], 6) + " < " + fmt(cohort_q[1], 6) + " < " +
                      fmt(cohort_q[2], 6) + "; total change size 1->16 " + fmt(100.0 * change, 3) +
                      "%; one-off cumulative infections " + one_off + " vs size-1 baseline " + fmt(baseline, 6)};
}

Outcome ridership(Harness&)
{
    const auto config = default_config();
    const auto net = load_config_network(config);
    const auto city = build_city(config, net);
    const double share = city.train_share();
    return {share >= 0.2 && share <= 0.4, "default city train-commuter share " + fmt(100.0 * share, 3) + "%"};
}

std::string csv_of(const TimeSeries& s)
{
    std::ostringstream out;
    write_timeseries_csv(out, s);
    write_contributions_csv(out, s);
    return out.str();
}

Outcome determinism_and_checkpoint(Harness& h)
{
    ScenarioConfig sc = h.base();
    sc.seed = repetition_seed(0);
    const auto& swept = h.cell("iso1_size16", 0, [](ScenarioConfig& c) { with_size(c, 16); });
    const auto again = run_scenario(h.city(), h.network(), sc);
    const bool same = csv_of(again) == csv_of(swept.front());

    Simulation sim(h.city(), h.network(), sc);
    sim.run_until_day(60);
    const auto cp = sim.checkpoint();
    const auto path = fixtures::temp_path("acceptance_checkpoint.bin");
    save_checkpoint(cp, path);
    const auto back = load_checkpoint(h.city(), path);
    std::filesystem::remove(path);
    std::size_t mismatches = back.health.size() == cp.health.size() ? 0 : cp.health.size();
    for (std::size_t i = 0; mismatches == 0 && i < cp.health.size(); ++i) {
        const auto& a = cp.health[i];
        const auto& b = back.health[i];
        const bool eq = a.state == b.state && a.severe == b.severe && a.entered_step == b.entered_step &&
                        a.next_step == b.next_step &&
                        std::memcmp(&a.infectiousness, &b.infectiousness, sizeof a.infectiousness) == 0;
        mismatches += eq ? 0 : 1;
    }
    const bool pass = same && mismatches == 0 && back.step == cp.step;
    return {pass, std::string("repeat run CSV ") + (same ? "identical" : "DIFFERS") + "; checkpoint of " +
                      std::to_string(cp.health.size()) + " agents at step " + std::to_string(cp.step) + ", " +
                      std::to_string(mismatches) + " mismatches after reload"};
}

Outcome calibration(Harness& h)
{
    std::vector<double> doubling;
    for (int t = 0; t < 40; ++t) doubling.push_back(5.0 * std::pow(2.0, t));
    const double err = std::abs(log_slope(doubling) - std::log(2.0));

    // Self-consistency: the target is the simulator's own fatality curve at
    // known contact rates (seeds disjoint from the ones calibration uses);
    // calibration starts 50% high and must match the slope to tolerance.
    ScenarioConfig open = h.base();
    open.policy = PolicyTimeline::no_intervention();
    open.horizon_days = 150;
    const auto runner = simulation_runner(h.city(), h.network(), open);
    const Betas truth = Betas::from(open.transmission);
    CalibrationOptions opt;
    opt.balance_shares = false;
    opt.seeds = 3;
    opt.base_seed = 1;
    std::vector<double> mean;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto obs = runner(truth, 501 + s);
        if (mean.empty()) mean.assign(obs.cumulative_fatalities.size(), 0.0);
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += obs.cumulative_fatalities[d] / 3.0;
    }
    CalibrationTarget target;
    const Date day0 = parse_date(open.start_date);
    for (std::size_t d = 0; d < mean.size(); ++d) {
        if (mean[d] < opt.window_lo) {
            if (!target.dates.empty()) break;
            continue;
        }
        target.dates.push_back(Date{std::chrono::sys_days{day0} + std::chrono::days{d}});
        target.cumulative.push_back(mean[d]);
        if (mean[d] >= opt.window_hi) break;
    }
    Betas start = truth;
    start.home *= 1.5;
    start.work *= 1.5;
    start.school *= 1.5;
    start.community *= 1.5;
    const auto result = calibrate(target, runner, start, opt);
    const double mismatch = std::abs(result.slope - result.target_slope) / result.target_slope;
    const double scale = result.betas.home / truth.home;
    const bool pass = err <= 1e-9 && result.converged && mismatch <= 0.05;
    return {pass, "ln 2 error " + fmt(err, 3) + "; self-consistency target slope " + fmt(result.target_slope) +
                      " over " + std::to_string(target.dates.size()) + " days, recovered " + fmt(result.slope) +
                      " (" + fmt(100.0 * mismatch, 3) + "% off) after " + std::to_string(result.iterations) +
                      " iterations, contact scale " + fmt(scale, 3) + "x truth" +
                      (result.converged ? "" : ", NOT converged")};
}

Outcome hard_invariants(Harness& h)
{
    // Make sure the most varied configurations have been simulated.
    h.cell("one_off0.4_size16", 0, [](ScenarioConfig& sc) {
        with_size(sc, 16);
        sc.cohorting.one_off_ratio = 0.4;
    });
    h.cell("dynamic_size16", 0, [](ScenarioConfig& sc) {
        with_size(sc, 16);
        sc.cohorting.strategy = CoachStrategy::dynamic_assignment;
    });
    InvariantReport sum;
    for (const auto& r : h.reports()) {
        sum.coach_violations += r.coach_violations;
        sum.conservation_violations += r.conservation_violations;
        sum.quarantine_violations += r.quarantine_violations;
        sum.monotonicity_violations += r.monotonicity_violations;
        sum.assignments_audited += r.assignments_audited;
        if (sum.messages.empty() && !r.messages.empty()) sum.messages = r.messages;
    }
    const bool pass = sum.ok() && sum.assignments_audited > 0 && !h.reports().empty();
    std::string detail = std::to_string(h.reports().size()) + " runs, " + std::to_string(sum.assignments_audited) +
                         " coach assignments audited; violations coach " + std::to_string(sum.coach_violations) +
                         ", conservation " + std::to_string(sum.conservation_violations) + ", quarantine " +
                         std::to_string(sum.quarantine_violations) + ", monotonicity " +
                         std::to_string(sum.monotonicity_violations);
    if (!sum.messages.empty()) detail += "; first: " + sum.messages.front();
    return {pass, detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::string filter = argc > 1 ? argv[1] : "";
    const std::vector<std::pair<std::string, std::function<Outcome(Harness&)>>> criteria{
        {"formula-oracles", formula_oracles},
        {"isolation-cohort-size", isolated_cohort_sizes},
        {"no-isolation-overlap", unisolated_cohort_overlap},
        {"crowding-vs-isolation", crowding_vs_isolation},
        {"station-detection", station_detection},
        {"static-vs-dynamic", static_vs_dynamic},
        {"quarantines-one-off", quarantines_and_one_off},
        {"ridership", ridership},
        {"determinism-checkpoint", determinism_and_checkpoint},
        {"calibration", calibration},
        // Last, so that it covers every run made above.
        {"hard-invariants", hard_invariants},
    };

    Harness harness;
    std::vector<std::string> lines;
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        if (!filter.empty() && name.find(filter) == std::string::npos) continue;
        std::cout << "[" << name << "]\n" << std::flush;
        Outcome o;
        try {
            o = fn(harness);
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        lines.push_back((o.pass ? "PASS " : "FAIL ") + name + ": " + o.detail);
        std::cout << lines.back() << "\n" << std::flush;
    }
    std::cout << "\n==== acceptance summary ====\n";
    for (const auto& l : lines) std::cout << l << '\n';
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
