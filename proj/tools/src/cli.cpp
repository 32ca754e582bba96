#include "cohortsim_cli/cli.hpp"

#include "cohortsim/calibration.hpp"
#include "cohortsim/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace cohortsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Command command)
{
    switch (command) {
    case Command::generate_city: return "generate-city";
    case Command::run: return "run";
    case Command::sweep: return "sweep";
    case Command::calibrate: return "calibrate";
    case Command::checkpoint: return "checkpoint";
    }
    return "?";
}

std::size_t RunSpec::cell_count() const
{
    std::size_t n = 1;
    for (const auto& axis : grid) n *= axis.values.size();
    return n;
}

namespace {

// Checks a single override against the schema by applying it to a default
// config; the value then stays exactly as typed.
Override checked_override(const std::string& text)
{
    try {
        Override o = parse_override(text);
        Config scratch = default_config();
        apply_overrides(scratch, {o});
        return o;
    } catch (const std::exception& e) {
        throw UsageError("--set " + text + ": " + e.what());
    }
}

GridAxis parse_grid_axis(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("--grid expects key=v1,v2,...: '" + text + "'");
    GridAxis axis;
    try {
        axis.key = canonical_key(text.substr(0, eq));
    } catch (const std::exception& e) {
        throw UsageError(std::string("--grid: ") + e.what());
    }
    if (axis.key.rfind("city.", 0) == 0) throw UsageError("--grid cannot vary city settings; the city is shared by all cells");
    std::stringstream values(text.substr(eq + 1));
    std::string v;
    while (std::getline(values, v, ',')) {
        if (v.empty()) throw UsageError("--grid " + text + ": empty value");
        checked_override(axis.key + "=" + v);
        axis.values.push_back(v);
    }
    if (axis.values.empty()) throw UsageError("--grid " + text + ": no values");
    return axis;
}

void add_common(CLI::App* sub, RunSpec& spec, std::string& config, std::vector<std::string>& overlays)
{
    sub->add_option("-c,--config", config, "YAML config file (defaults apply when omitted)");
    sub->add_option("--overlay", overlays, "Extra YAML file applied on top of the config (repeatable)");
    sub->add_option("--set", spec.raw_overrides, "Override key=value (repeatable)");
    sub->add_option("-o,--out", spec.output_root, "Parent directory for run folders")->capture_default_str();
    sub->add_option("--threads", spec.threads, "Worker threads (0: COHORTSIM_THREADS or all cores)");
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL)
{
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
}

json invariants_json(const std::vector<InvariantReport>& reports)
{
    json j = {{"ok", true},
              {"coach_violations", 0},
              {"conservation_violations", 0},
              {"quarantine_violations", 0},
              {"monotonicity_violations", 0},
              {"assignments_audited", 0}};
    std::vector<std::string> messages;
    for (const auto& r : reports) {
        j["ok"] = j["ok"].get<bool>() && r.ok();
        j["coach_violations"] = j["coach_violations"].get<std::size_t>() + r.coach_violations;
        j["conservation_violations"] = j["conservation_violations"].get<std::size_t>() + r.conservation_violations;
        j["quarantine_violations"] = j["quarantine_violations"].get<std::size_t>() + r.quarantine_violations;
        j["monotonicity_violations"] = j["monotonicity_violations"].get<std::size_t>() + r.monotonicity_violations;
        j["assignments_audited"] = j["assignments_audited"].get<std::size_t>() + r.assignments_audited;
        for (const auto& m : r.messages) {
            if (messages.size() < 20) messages.push_back(m);
        }
    }
    j["messages"] = messages;
    return j;
}

class RunContext {
public:
    RunContext(const RunSpec& spec, Config config) : spec_(spec), config_(std::move(config))
    {
        const auto snapshot = to_yaml(config_);
        dir_ = spec.output_root / run_directory_name(snapshot, spec.argv);
        for (int k = 1; fs::exists(dir_); ++k)
            dir_ = spec.output_root / (run_directory_name(snapshot, spec.argv) + "-" + std::to_string(k));
        fs::create_directories(dir_);
        write_text(dir_ / "config.yaml", snapshot);
        files_.push_back("config.yaml");
        meta_ = {{"command", to_string(spec.command)},
                 {"argv", spec.argv},
                 {"overrides", spec.raw_overrides},
                 {"grid", spec.raw_grid},
                 {"config", spec.config_path ? spec.config_path->string() : std::string{}},
                 {"started_utc", utc_timestamp()},
                 {"population", config_.city.population},
                 {"city_seed", config_.city.seed},
                 {"base_seed", config_.scenario.seed},
                 {"runs", config_.scenario.num_runs}};
        std::vector<std::string> overlays;
        for (const auto& o : spec.overlays) overlays.push_back(o.string());
        meta_["overlays"] = overlays;
        if (spec.resume) meta_["resume"] = spec.resume->string();
    }

    const Config& config() const { return config_; }
    const fs::path& dir() const { return dir_; }
    json& meta() { return meta_; }

    template <typename Fn>
    void emit(const std::string& name, Fn&& fn)
    {
        write_with(dir_ / name, std::forward<Fn>(fn));
        files_.push_back(name);
    }

    int finish(int exit_code)
    {
        meta_["exit_code"] = exit_code;
        meta_["finished_utc"] = utc_timestamp();
        files_.push_back("metadata.json");
        meta_["files"] = files_;
        write_text(dir_ / "metadata.json", meta_.dump(2) + "\n");
        std::cout << "output: " << dir_.string() << '\n';
        return exit_code;
    }

private:
    const RunSpec& spec_;
    Config config_;
    fs::path dir_;
    json meta_;
    std::vector<std::string> files_;
};

struct World {
    RailNetwork network;
    City city;
};

World build_world(const Config& config)
{
    World w{load_config_network(config), {}};
    w.city = build_city(config, w.network);
    return w;
}

void write_run_files(RunContext& ctx, const std::string& prefix, const TimeSeries& series)
{
    ctx.emit(prefix + ".csv", [&](std::ostream& o) { write_timeseries_csv(o, series); });
    ctx.emit(prefix + "_contributions.csv", [&](std::ostream& o) { write_contributions_csv(o, series); });
}

int do_generate_city(RunContext& ctx)
{
    const World w = build_world(ctx.config());
    save_city(w.city, ctx.dir() / "city.bin");
    const double share = static_cast<double>(w.city.train_commuters()) / static_cast<double>(w.city.population());
    ctx.meta()["city"] = {{"population", w.city.population()},
                          {"households", w.city.households.size()},
                          {"train_commuters", w.city.train_commuters()},
                          {"train_share", share}};
    std::cout << "agents " << w.city.population() << ", train commuters " << w.city.train_commuters() << " ("
              << std::fixed << std::setprecision(1) << 100.0 * share << "%)\n";
    return ctx.finish(0);
}

int do_run(RunContext& ctx, const RunSpec& spec)
{
    const auto& config = ctx.config();
    const World w = build_world(config);
    std::optional<Checkpoint> resume;
    if (spec.resume) resume = load_checkpoint(w.city, *spec.resume);

    SweepResult summary;
    summary.cells.push_back({{}, config.scenario});
    summary.runs.emplace_back();
    for (int r = 0; r < config.scenario.num_runs; ++r) {
        ScenarioConfig sc = config.scenario;
        sc.seed = config.scenario.seed + static_cast<std::uint64_t>(r);
        Simulation sim(w.city, w.network, sc, resume ? &*resume : nullptr);
        sim.run();
        const auto prefix = "run_" + std::to_string(r);
        write_run_files(ctx, prefix, sim.series());
        ctx.emit(prefix + "_quarantine.csv",
                 [&](std::ostream& o) { write_quarantine_csv(o, sim.interventions().records()); });
        summary.runs.back().push_back(sim.series());
        summary.reports.push_back(sim.invariants());
        const auto& last = sim.series().days.back();
        std::cout << "run " << r << " seed " << sc.seed << ": infections " << last.cumulative_infections
                  << ", detected " << last.cumulative_detected << ", deaths " << last.deceased
                  << (sim.invariants().ok() ? "" : "  [INVARIANT VIOLATION]") << '\n';
    }
    summary.stats.push_back(summarize(summary.runs.back()));
    ctx.emit("summary.csv", [&](std::ostream& o) { write_sweep_summary_csv(o, summary); });
    ctx.meta()["invariants"] = invariants_json(summary.reports);
    return ctx.finish(summary.invariants_ok() ? 0 : 1);
}

int do_sweep(RunContext& ctx, const RunSpec& spec)
{
    const auto& config = ctx.config();
    const World w = build_world(config);
    std::vector<SweepCell> cells;
    for (const auto& params : expand_grid(spec.grid)) {
        Config cell = config;
        std::vector<Override> ov;
        for (const auto& [k, v] : params) ov.push_back({k, v});
        apply_overrides(cell, ov);
        cells.push_back({params, cell.scenario});
    }
    std::cout << cells.size() << " cells x " << config.scenario.num_runs << " runs\n";
    const auto result = sweep(w.city, w.network, cells, config.scenario.num_runs, config.scenario.seed, spec.threads);

    ctx.emit("summary.csv", [&](std::ostream& o) { write_sweep_summary_csv(o, result); });
    ctx.emit("cells.csv", [&](std::ostream& o) {
        o << "cell";
        for (const auto& axis : spec.grid) o << ',' << axis.key;
        o << '\n';
        for (std::size_t i = 0; i < result.cells.size(); ++i) {
            o << i;
            for (const auto& kv : result.cells[i].params) o << ',' << kv.second;
            o << '\n';
        }
    });
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        for (std::size_t r = 0; r < result.runs[i].size(); ++r)
            write_run_files(ctx, "cell" + std::to_string(i) + "_run" + std::to_string(r), result.runs[i][r]);
    }
    ctx.meta()["invariants"] = invariants_json(result.reports);
    return ctx.finish(result.invariants_ok() ? 0 : 1);
}

int do_calibrate(RunContext& ctx)
{
    const auto& config = ctx.config();
    const World w = build_world(config);
    std::ifstream in(resolve_data_path(config, config.calibration_target));
    const auto target = read_target_csv(in);

    ScenarioConfig base = config.scenario;
    base.policy = PolicyTimeline::no_intervention();
    base.horizon_days = config.calibration_horizon_days;
    auto result = calibrate(target, simulation_runner(w.city, w.network, base), Betas::from(base.transmission),
                            config.calibration);

    ctx.emit("calibrated.yaml", [&](std::ostream& o) { write_calibration_overlay(o, result); });
    ctx.emit("calibration_trace.csv", [&](std::ostream& o) {
        o << "iteration,beta_home,beta_school,beta_work,beta_community,slope,share_home,share_work,share_community\n";
        o << std::setprecision(10);
        for (const auto& s : result.trace) {
            o << s.iteration << ',' << s.betas.home << ',' << s.betas.school << ',' << s.betas.work << ','
              << s.betas.community << ',' << s.slope << ',' << s.shares[0] << ',' << s.shares[1] << ','
              << s.shares[2] << '\n';
        }
    });
    ctx.meta()["calibration"] = {{"converged", result.converged},
                                 {"iterations", result.iterations},
                                 {"slope", result.slope},
                                 {"target_slope", result.target_slope},
                                 {"start_date", result.start_date}};
    std::cout << "slope " << result.slope << " (target " << result.target_slope << ") after " << result.iterations
              << " iterations" << (result.converged ? "" : ", not converged") << '\n';
    return ctx.finish(result.converged ? 0 : 1);
}

int do_checkpoint(RunContext& ctx, const RunSpec& spec)
{
    const auto& config = ctx.config();
    const World w = build_world(config);
    std::optional<Checkpoint> resume;
    if (spec.resume) resume = load_checkpoint(w.city, *spec.resume);
    Simulation sim(w.city, w.network, config.scenario, resume ? &*resume : nullptr);
    const int day = spec.checkpoint_day.value_or(config.scenario.horizon_days);
    if (day * kStepsPerDay < sim.current_step())
        throw UsageError("--day " + std::to_string(day) + " lies before the resumed checkpoint");
    sim.run_until_day(day);
    save_checkpoint(sim.checkpoint(), ctx.dir() / "checkpoint.bin");
    ctx.meta()["checkpoint_day"] = day;
    write_run_files(ctx, "run_0", sim.series());
    ctx.meta()["invariants"] = invariants_json({sim.invariants()});
    std::cout << "checkpoint at day " << day << " written\n";
    return ctx.finish(sim.invariants().ok() ? 0 : 1);
}

} // namespace

RunSpec parse_cli(const std::vector<std::string>& args)
{
    RunSpec spec;
    spec.argv = args;
    CLI::App app{"City-scale epidemic simulator for cohorted train travel", "cohortsim"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> overlays;
    std::string resume;
    int runs = 0;
    int day = -1;

    auto* gen = app.add_subcommand("generate-city", "Build the synthetic city and save it");
    auto* run = app.add_subcommand("run", "Simulate one scenario for the configured number of seeds");
    auto* swp = app.add_subcommand("sweep", "Simulate every cell of a parameter grid");
    auto* cal = app.add_subcommand("calibrate", "Fit contact rates to a fatality series");
    auto* ckp = app.add_subcommand("checkpoint", "Run to a given day and save the infection state");
    for (auto* sub : {gen, run, swp, cal, ckp}) add_common(sub, spec, config, overlays);
    for (auto* sub : {run, swp}) sub->add_option("--runs", runs, "Seeds per scenario or cell")->check(CLI::PositiveNumber);
    for (auto* sub : {run, ckp}) sub->add_option("--resume", resume, "Start from a saved checkpoint");
    swp->add_option("--grid", spec.raw_grid, "Swept key=v1,v2,... (repeatable; cells are the cartesian product)")
        ->required();
    ckp->add_option("--day", day, "Day at which to save")->check(CLI::NonNegativeNumber);

    std::vector<const char*> cargv;
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    for (auto* sub : app.get_subcommands()) {
        if (sub->get_name() == "generate-city") spec.command = Command::generate_city;
        else if (sub->get_name() == "run") spec.command = Command::run;
        else if (sub->get_name() == "sweep") spec.command = Command::sweep;
        else if (sub->get_name() == "calibrate") spec.command = Command::calibrate;
        else spec.command = Command::checkpoint;
    }

    if (!config.empty()) {
        if (!fs::exists(config)) throw UsageError("config file not found: " + config);
        spec.config_path = config;
    }
    for (const auto& o : overlays) {
        if (!fs::exists(o)) throw UsageError("overlay file not found: " + o);
        spec.overlays.emplace_back(o);
    }
    if (!resume.empty()) {
        if (!fs::exists(resume)) throw UsageError("checkpoint not found: " + resume);
        spec.resume = resume;
    }
    if (runs > 0) spec.runs = runs;
    if (day >= 0) spec.checkpoint_day = day;
    for (const auto& text : spec.raw_overrides) spec.overrides.push_back(checked_override(text));
    for (const auto& text : spec.raw_grid) {
        auto axis = parse_grid_axis(text);
        for (const auto& other : spec.grid) {
            if (other.key == axis.key) throw UsageError("--grid names " + axis.key + " twice");
        }
        spec.grid.push_back(std::move(axis));
    }
    return spec;
}

Config resolve_config(const RunSpec& spec)
{
    Config config = spec.config_path ? load_config(*spec.config_path) : default_config();
    for (const auto& o : spec.overlays) apply_overlay(config, o);
    apply_overrides(config, spec.overrides);
    if (spec.runs) config.scenario.num_runs = *spec.runs;
    config.validate();
    return config;
}

std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(const std::vector<GridAxis>& grid)
{
    std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
    for (const auto& axis : grid) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& cell : cells) {
            for (const auto& v : axis.values) {
                auto c = cell;
                c.emplace_back(axis.key, v);
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    return cells;
}

std::string run_directory_name(const std::string& config_yaml, const std::vector<std::string>& argv)
{
    std::uint64_t h = fnv1a(config_yaml);
    for (const auto& a : argv) h = fnv1a(a + '\0', h);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return utc_timestamp() + "-" + std::string(hex, 8);
}

int execute(const RunSpec& spec)
{
    RunContext ctx(spec, resolve_config(spec));
    switch (spec.command) {
    case Command::generate_city: return do_generate_city(ctx);
    case Command::run: return do_run(ctx, spec);
    case Command::sweep: return do_sweep(ctx, spec);
    case Command::calibrate: return do_calibrate(ctx);
    case Command::checkpoint: return do_checkpoint(ctx, spec);
    }
    return 1;
}

int main(int argc, char** argv)
{
    RunSpec spec;
    try {
        spec = parse_cli(std::vector<std::string>(argv, argv + argc));
    } catch (const HelpRequested& h) {
        std::cout << h.what();
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "cohortsim: " << e.what() << "\nRun 'cohortsim --help' for usage.\n";
        return 2;
    }
    try {
        return execute(spec);
    } catch (const std::exception& e) {
        std::cerr << "cohortsim: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cohortsim::cli
