#include "cohortsim/engine.hpp"

#include "binary_io.hpp"
#include "cohortsim/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace cohortsim {

void ScenarioConfig::validate() const
{
    transmission.validate();
    progression.validate();
    interventions.validate();
    if (horizon_days <= 0) throw ValidationError("horizon must be at least one day");
    if (initial_exposed < 0) throw ValidationError("initial exposed count cannot be negative");
    if (num_runs < 1) throw ValidationError("num_runs must be at least 1");
    if (cohorting.cohort_size < 1) throw ValidationError("cohort size must be >= 1");
    if (!(cohorting.one_off_ratio >= 0.0 && cohorting.one_off_ratio <= 1.0))
        throw ValidationError("one-off ratio outside [0,1]");
    if (cohorting.capacity.seating_capacity <= 0 || !(cohorting.capacity.crowding_factor > 0.0))
        throw ValidationError("coach capacity and crowding must be positive");
    if (cohorting.capacity.occupancy_limit() < cohorting.cohort_size)
        throw ValidationError("cohort size exceeds the coach occupancy limit");
    if (cohorting.capacity.rejection_threshold < 0) throw ValidationError("rejection threshold cannot be negative");
    (void)parse_date(start_date);
}

// ---------------------------------------------------------------------------
// Time series

const std::vector<std::string>& TimeSeries::columns()
{
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"day",
                                   "new_detected",
                                   "cumulative_detected",
                                   "new_infections",
                                   "cumulative_infections",
                                   "hospitalised",
                                   "deceased",
                                   "quarantined_total",
                                   "quarantined_cohort",
                                   "station_detections"};
        for (std::size_t s = 0; s < kDiseaseStateCount; ++s)
            c.push_back("n_" + std::string(to_string(static_cast<DiseaseState>(s))));
        return c;
    }();
    return cols;
}

double TimeSeries::value(const DailyMetrics& m, std::size_t column)
{
    switch (column) {
    case 0: return m.day;
    case 1: return static_cast<double>(m.new_detected);
    case 2: return static_cast<double>(m.cumulative_detected);
    case 3: return static_cast<double>(m.new_infections);
    case 4: return static_cast<double>(m.cumulative_infections);
    case 5: return static_cast<double>(m.hospitalised);
    case 6: return static_cast<double>(m.deceased);
    case 7: return static_cast<double>(m.quarantined_total);
    case 8: return static_cast<double>(m.quarantined_cohort);
    case 9: return static_cast<double>(m.station_detections);
    default: return static_cast<double>(m.state_counts.at(column - 10));
    }
}

void write_timeseries_csv(std::ostream& out, const TimeSeries& series)
{
    const auto& cols = TimeSeries::columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const auto& m : series.days) {
        out << m.day << ',' << m.new_detected << ',' << m.cumulative_detected << ',' << m.new_infections << ','
            << m.cumulative_infections << ',' << m.hospitalised << ',' << m.deceased << ',' << m.quarantined_total << ','
            << m.quarantined_cohort << ',' << m.station_detections;
        for (const auto n : m.state_counts) out << ',' << n;
        out << '\n';
    }
}

TimeSeries read_timeseries_csv(std::istream& in)
{
    const auto& cols = TimeSeries::columns();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty time-series CSV");
    const auto header = detail::split(line, ',');
    if (header.size() != cols.size()) throw ParseError("unexpected time-series header");
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (detail::trim(header[c]) != cols[c]) throw ParseError("unexpected time-series column '" + header[c] + "'");
    }
    TimeSeries series;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != cols.size()) throw ParseError("time-series row has " + std::to_string(f.size()) + " fields");
        std::vector<std::int64_t> v(f.size());
        for (std::size_t c = 0; c < f.size(); ++c) v[c] = std::stoll(detail::trim(f[c]));
        DailyMetrics m;
        m.day = static_cast<int>(v[0]);
        m.new_detected = v[1];
        m.cumulative_detected = v[2];
        m.new_infections = v[3];
        m.cumulative_infections = v[4];
        m.hospitalised = v[5];
        m.deceased = v[6];
        m.quarantined_total = v[7];
        m.quarantined_cohort = v[8];
        m.station_detections = v[9];
        for (std::size_t s = 0; s < kDiseaseStateCount; ++s) m.state_counts[s] = v[10 + s];
        series.days.push_back(m);
    }
    return series;
}

void write_contributions_csv(std::ostream& out, const TimeSeries& series)
{
    out << "day,home,work,community,trains\n";
    const auto old = out.precision(17);
    for (std::size_t d = 0; d < series.contributions.size(); ++d) {
        const auto& c = series.contributions[d];
        const int day = d < series.days.size() ? series.days[d].day : static_cast<int>(d);
        out << day << ',' << c.home << ',' << c.work << ',' << c.community << ',' << c.trains << '\n';
    }
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'O', 'H', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

} // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint)
{
    detail::BinaryWriter w(out);
    w.put_bytes(kCheckpointMagic, sizeof kCheckpointMagic);
    w.put(kCheckpointVersion);
    w.put<std::uint64_t>(checkpoint.health.size());
    w.put(checkpoint.step);
    for (const auto& h : checkpoint.health) {
        w.put(static_cast<std::uint8_t>(h.state));
        w.put(static_cast<std::uint8_t>(h.severe ? 1 : 0));
        w.put(h.infectiousness);
        w.put(h.entered_step);
        w.put(h.next_step);
    }
    if (!out) throw std::runtime_error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in)
{
    detail::BinaryReader r(in);
    char magic[sizeof kCheckpointMagic];
    r.get_bytes(magic, sizeof magic);
    if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw ParseError("not a checkpoint file");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
    const auto n = r.get<std::uint64_t>();
    if (n > (std::uint64_t{1} << 32)) throw ParseError("corrupt checkpoint (implausible population)");
    Checkpoint cp;
    cp.step = r.get<std::int32_t>();
    if (cp.step < 0) throw ParseError("corrupt checkpoint (negative timestep)");
    cp.health.resize(static_cast<std::size_t>(n));
    for (auto& h : cp.health) {
        const auto state = r.get<std::uint8_t>();
        if (state >= kDiseaseStateCount) throw ParseError("corrupt checkpoint (bad disease state)");
        h.state = static_cast<DiseaseState>(state);
        h.severe = r.get<std::uint8_t>() != 0;
        h.infectiousness = r.get<float>();
        h.entered_step = r.get<std::int32_t>();
        h.next_step = r.get<std::int32_t>();
    }
    return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const City& city, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    auto cp = read_checkpoint(in);
    if (cp.health.size() != city.population())
        throw ValidationError("checkpoint population " + std::to_string(cp.health.size()) +
                              " does not match city population " + std::to_string(city.population()));
    return cp;
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(const City& city, const RailNetwork& network, ScenarioConfig config, const Checkpoint* resume)
    : city_(city),
      network_(network),
      config_((config.validate(), std::move(config))),
      streams_(config_.seed),
      disease_rng_(streams_.stream("disease")),
      model_(city, config_.transmission),
      interventions_(city, config_.interventions, streams_.stream("interventions"))
{
    const auto n = city.population();
    Rng cohort_rng = streams_.stream("cohorting");
    const auto commuters = train_commuters(city);
    plan_ = form_cohorts(commuters, network, config_.cohorting.cohort_size, config_.cohorting.one_off_ratio,
                         cohort_rng, n);
    interventions_.set_cohorts(&plan_);
    scheduler_ = std::make_unique<CoachScheduler>(plan_.cohorts, network, config_.cohorting.capacity,
                                                  config_.cohorting.strategy, streams_.stream("coaches"));
    for (const auto& c : plan_.cohorts) commuters_.insert(commuters_.end(), c.members.begin(), c.members.end());
    std::sort(commuters_.begin(), commuters_.end());

    if (resume != nullptr) {
        if (resume->health.size() != n)
            throw ValidationError("checkpoint population does not match the city");
        health_ = resume->health;
        step_ = resume->step;
        for (const auto& h : health_) cumulative_infections_ += h.state != DiseaseState::susceptible ? 1 : 0;
        for (const auto& h : health_) deaths_ += h.state == DiseaseState::deceased ? 1 : 0;
        return;
    }

    health_.assign(n, AgentHealth{});
    const auto seeds = std::min<std::size_t>(static_cast<std::size_t>(config_.initial_exposed), n);
    std::vector<AgentId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<AgentId> chosen;
    chosen.reserve(seeds);
    Rng seed_rng = streams_.stream("seeding");
    std::sample(ids.begin(), ids.end(), std::back_inserter(chosen), seeds, seed_rng);
    for (const AgentId a : chosen) {
        expose(health_[static_cast<std::size_t>(a)], config_.progression, disease_rng_, 0);
        ++cumulative_infections_;
    }
}

void Simulation::audit(const CoachAssignment& assignment)
{
    ++invariants_.assignments_audited;
    const auto report = audit_assignment(plan_.cohorts, assignment, network_, config_.cohorting.capacity);
    if (report.ok()) return;
    invariants_.coach_violations +=
        report.occupancy_violations + report.colocation_violations + report.pool_violations;
    for (const auto& m : report.messages) {
        if (invariants_.messages.size() < 20) invariants_.messages.push_back(m);
    }
}

void Simulation::step()
{
    const int now = step_;
    const int day = now / kStepsPerDay;
    const int slot = now % kStepsPerDay;
    const auto& phase = config_.policy.at(day);
    const auto& tp = config_.transmission;

    if (slot == 0) interventions_.update_containment(phase, health_);
    interventions_.modulation_all(phase, health_, now, kappa_);
    const auto agg = model_.aggregate(health_, kappa_);

    TrainRates trains;
    const bool travel = is_travel_slot(now) && phase.trains_running && !plan_.cohorts.empty();
    if (travel) {
        const auto& assignment = scheduler_->assignment_for(day, slot == 2);
        if (last_assignment_ != &assignment || scheduler_->strategy() == CoachStrategy::dynamic_assignment)
            audit(assignment);
        last_assignment_ = &assignment;
        trains = model_.train_rates(plan_.cohorts, assignment, network_, health_, kappa_);
    }

    // Infection sampling against the frozen aggregates.
    std::vector<AgentId> infected;
    double home = 0.0, work = 0.0, community = 0.0, train = 0.0;
    std::size_t susceptible = 0;
    for (std::size_t i = 0; i < health_.size(); ++i) {
        if (health_[i].state != DiseaseState::susceptible) continue;
        ++susceptible;
        const auto br =
            model_.lambda(static_cast<AgentId>(i), kappa_[i], agg, travel ? &trains : nullptr, plan_.cohort_of_agent);
        home += br.home;
        work += br.workplace + br.subnetwork;
        community += br.community;
        train += br.trains;
        const double total = br.total();
        if (total > 0.0 && bernoulli(disease_rng_, infection_probability(total, tp.dt_days)))
            infected.push_back(static_cast<AgentId>(i));
    }
    if (susceptible > 0) {
        const double norm = 1.0 / (static_cast<double>(susceptible) * kStepsPerDay);
        day_contrib_.home += home * norm;
        day_contrib_.work += work * norm;
        day_contrib_.community += community * norm;
        day_contrib_.trains += train * norm;
    }
    for (const AgentId a : infected) {
        expose(health_[static_cast<std::size_t>(a)], config_.progression, disease_rng_, now);
        interventions_.on_exposed(a);
    }
    day_infections_ += static_cast<std::int64_t>(infected.size());
    cumulative_infections_ += static_cast<std::int64_t>(infected.size());

    // Progression, then event dispatch in agent order.
    std::vector<std::pair<AgentId, DiseaseState>> transitions;
    for (std::size_t i = 0; i < health_.size(); ++i) {
        auto& h = health_[i];
        if (h.state == DiseaseState::susceptible || is_absorbing(h.state) || h.next_step > now) continue;
        const auto before = h.state;
        h = advance_health(h, city_.agents[i].age, config_.progression, disease_rng_, now);
        if (h.state != before) transitions.emplace_back(static_cast<AgentId>(i), h.state);
    }
    for (const auto& [a, state] : transitions) {
        switch (state) {
        case DiseaseState::symptomatic: interventions_.on_symptomatic(a, phase, now); break;
        case DiseaseState::hospitalised: interventions_.on_hospitalised(a, phase, now); break;
        case DiseaseState::deceased: ++deaths_; break;
        default: break;
        }
    }
    if (travel) {
        for (const AgentId a : commuters_) {
            const auto i = static_cast<std::size_t>(a);
            if (health_[i].state == DiseaseState::symptomatic && kappa_[i][Space::train] > 0.0f)
                interventions_.screen_traveller(a, health_[i], phase, now);
        }
    }
    interventions_.process_tests(phase, now);

    ++step_;
    if (step_ % kStepsPerDay == 0) record_day();
}

void Simulation::record_day()
{
    const int day = step_ / kStepsPerDay - 1;
    const int last_step = step_ - 1;
    DailyMetrics m;
    m.day = day;
    for (const auto& h : health_) ++m.state_counts[static_cast<std::size_t>(h.state)];
    m.new_infections = day_infections_;
    m.cumulative_infections = cumulative_infections_;
    m.new_detected = interventions_.take_new_detections();
    cumulative_detected_ += m.new_detected;
    m.cumulative_detected = cumulative_detected_;
    m.hospitalised = m.state_counts[static_cast<std::size_t>(DiseaseState::hospitalised)] +
                     m.state_counts[static_cast<std::size_t>(DiseaseState::critical)];
    m.deceased = m.state_counts[static_cast<std::size_t>(DiseaseState::deceased)];
    m.quarantined_total = static_cast<std::int64_t>(interventions_.active_quarantines(last_step));
    m.quarantined_cohort =
        static_cast<std::int64_t>(interventions_.active_quarantines(last_step, QuarantineCause::cohort_isolation));
    m.station_detections = interventions_.counters().station_detections;

    auto flag = [this](std::size_t& counter, std::string message) {
        ++counter;
        if (invariants_.messages.size() < 20) invariants_.messages.push_back(std::move(message));
    };
    std::int64_t total = 0;
    for (const auto n : m.state_counts) total += n;
    if (total != static_cast<std::int64_t>(city_.population()))
        flag(invariants_.conservation_violations, "day " + std::to_string(day) + ": state counts sum to " +
                                                      std::to_string(total));
    if (m.deceased != deaths_)
        flag(invariants_.conservation_violations, "day " + std::to_string(day) + ": death ledger mismatch");
    if (!series_.days.empty()) {
        const auto& prev = series_.days.back();
        if (m.cumulative_detected < prev.cumulative_detected || m.cumulative_infections < prev.cumulative_infections ||
            m.deceased < prev.deceased)
            flag(invariants_.monotonicity_violations, "day " + std::to_string(day) + ": cumulative counter decreased");
    }
    if (m.cumulative_detected > m.cumulative_infections)
        flag(invariants_.monotonicity_violations, "day " + std::to_string(day) + ": more detections than infections");
    const auto& records = interventions_.records();
    const int window = config_.interventions.quarantine_steps();
    for (; audited_records_ < records.size(); ++audited_records_) {
        const auto& r = records[audited_records_];
        if (r.end_step - r.start_step != window)
            flag(invariants_.quarantine_violations,
                 "quarantine of agent " + std::to_string(r.agent) + " lasts " +
                     std::to_string(r.end_step - r.start_step) + " steps");
    }

    series_.days.push_back(m);
    series_.contributions.push_back(day_contrib_);
    day_contrib_ = {};
    day_infections_ = 0;
}

void Simulation::run_until_day(int day)
{
    while (step_ < day * kStepsPerDay) step();
}

TimeSeries run_scenario(const City& city, const RailNetwork& network, const ScenarioConfig& config,
                        InvariantReport* report)
{
    Simulation sim(city, network, config);
    sim.run();
    if (report != nullptr) *report = sim.invariants();
    return sim.series();
}

// ---------------------------------------------------------------------------
// Sweeps

bool SweepResult::invariants_ok() const
{
    return std::all_of(reports.begin(), reports.end(), [](const InvariantReport& r) { return r.ok(); });
}

CellStatistics summarize(const std::vector<TimeSeries>& runs)
{
    const auto columns = TimeSeries::columns().size();
    CellStatistics st;
    st.mean.assign(columns, {});
    st.sd.assign(columns, {});
    if (runs.empty()) return st;
    std::size_t days = runs.front().days.size();
    for (const auto& r : runs) days = std::min(days, r.days.size());
    const auto n = static_cast<double>(runs.size());
    for (std::size_t c = 0; c < columns; ++c) {
        st.mean[c].assign(days, 0.0);
        st.sd[c].assign(days, 0.0);
        for (std::size_t d = 0; d < days; ++d) {
            double sum = 0.0;
            for (const auto& r : runs) sum += TimeSeries::value(r.days[d], c);
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& r : runs) {
                const double dev = TimeSeries::value(r.days[d], c) - mean;
                ss += dev * dev;
            }
            st.mean[c][d] = mean;
            st.sd[c][d] = std::sqrt(ss / n);
        }
    }
    return st;
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("COHORTSIM_THREADS")) {
        try {
            const int v = detail::parse_int(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult sweep(const City& city, const RailNetwork& network, std::vector<SweepCell> cells, int runs_per_cell,
                  std::uint64_t base_seed, unsigned threads)
{
    if (cells.empty()) throw ValidationError("sweep grid is empty");
    if (runs_per_cell < 1) throw ValidationError("runs per cell must be at least 1");
    for (const auto& c : cells) c.config.validate();

    SweepResult result;
    result.cells = std::move(cells);
    const auto ncells = result.cells.size();
    const auto runs = static_cast<std::size_t>(runs_per_cell);
    result.runs.assign(ncells, std::vector<TimeSeries>(runs));
    result.reports.assign(ncells * runs, InvariantReport{});

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t job = next++; job < ncells * runs; job = next++) {
            const auto cell = job / runs;
            const auto r = job % runs;
            try {
                auto config = result.cells[cell].config;
                config.seed = base_seed + r;
                result.runs[cell][r] = run_scenario(city, network, config, &result.reports[job]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                                        static_cast<unsigned>(ncells * runs)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (const auto& cell_runs : result.runs) result.stats.push_back(summarize(cell_runs));
    return result;
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& result)
{
    std::vector<std::string> keys;
    for (const auto& cell : result.cells) {
        for (const auto& [k, v] : cell.params) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        }
    }
    const auto& cols = TimeSeries::columns();
    out << "cell";
    for (const auto& k : keys) out << ',' << k;
    out << ",runs,day";
    for (std::size_t c = 1; c < cols.size(); ++c) out << ',' << cols[c] << "_mean," << cols[c] << "_sd";
    out << '\n';
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& cell = result.cells[i];
        const auto& st = result.stats[i];
        const auto days = st.mean.empty() ? 0 : st.mean[0].size();
        for (std::size_t d = 0; d < days; ++d) {
            out << i;
            for (const auto& k : keys) {
                auto it = std::find_if(cell.params.begin(), cell.params.end(),
                                       [&](const auto& kv) { return kv.first == k; });
                out << ',' << (it == cell.params.end() ? std::string{} : it->second);
            }
            out << ',' << result.runs[i].size() << ',' << st.mean[0][d];
            for (std::size_t c = 1; c < cols.size(); ++c) out << ',' << st.mean[c][d] << ',' << st.sd[c][d];
            out << '\n';
        }
    }
    out.precision(old);
}

} // namespace cohortsim
