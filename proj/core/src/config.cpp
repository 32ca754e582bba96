#include "cohortsim/config.hpp"

#include "cohortsim/error.hpp"
#include "text_util.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#ifndef COHORTSIM_DATA_DIR
#define COHORTSIM_DATA_DIR "data"
#endif

namespace cohortsim {

namespace {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string scalar(const YAML::Node& n, const std::string& key)
{
    if (!n.IsScalar()) throw ValidationError(key + ": expected a scalar value");
    return n.Scalar();
}

double to_double(const YAML::Node& n, const std::string& key)
{
    try {
        return detail::parse_double(scalar(n, key));
    } catch (const std::exception&) {
        throw ValidationError(key + ": '" + n.Scalar() + "' is not a number");
    }
}

int to_int(const YAML::Node& n, const std::string& key)
{
    try {
        return detail::parse_int(scalar(n, key));
    } catch (const std::exception&) {
        throw ValidationError(key + ": '" + n.Scalar() + "' is not an integer");
    }
}

std::uint64_t to_u64(const YAML::Node& n, const std::string& key)
{
    const auto s = detail::trim(scalar(n, key));
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(key + ": '" + s + "' is not a non-negative integer");
    return v;
}

bool to_flag(const YAML::Node& n, const std::string& key)
{
    const auto s = detail::trim(scalar(n, key));
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ValidationError(key + " must be 0 or 1, got '" + s + "'");
}

CoachStrategy to_strategy(const YAML::Node& n, const std::string& key)
{
    const auto s = detail::trim(scalar(n, key));
    if (s == "0" || s == "static") return CoachStrategy::static_assignment;
    if (s == "1" || s == "dynamic") return CoachStrategy::dynamic_assignment;
    throw ValidationError(key + " must be 0 (static) or 1 (dynamic), got '" + s + "'");
}

std::array<double, kAgeBands> to_bands(const YAML::Node& n, const std::string& key)
{
    if (!n.IsSequence() || n.size() != kAgeBands)
        throw ValidationError(key + ": expected a list of " + std::to_string(kAgeBands) + " probabilities");
    std::array<double, kAgeBands> out{};
    for (std::size_t i = 0; i < kAgeBands; ++i) out[i] = to_double(n[i], key);
    return out;
}

YAML::Node bands_node(const std::array<double, kAgeBands>& v)
{
    YAML::Node n(YAML::NodeType::Sequence);
    for (const double d : v) n.push_back(format_double(d));
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(Config&, const YAML::Node&, const std::string&)> read;
    std::function<YAML::Node(const Config&)> write;
};

template <typename Access>
Field real(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](Config& c, const YAML::Node& n, const std::string& k) { access(c) = to_double(n, k); },
            [access](const Config& c) { return YAML::Node(format_double(access(const_cast<Config&>(c)))); }};
}

template <typename Access>
Field integer(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](Config& c, const YAML::Node& n, const std::string& k) { access(c) = to_int(n, k); },
            [access](const Config& c) { return YAML::Node(std::to_string(access(const_cast<Config&>(c)))); }};
}

template <typename Access>
Field flag(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](Config& c, const YAML::Node& n, const std::string& k) { access(c) = to_flag(n, k); },
            [access](const Config& c) { return YAML::Node(access(const_cast<Config&>(c)) ? "1" : "0"); }};
}

template <typename Access>
Field text(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](Config& c, const YAML::Node& n, const std::string& k) { access(c) = scalar(n, k); },
            [access](const Config& c) { return YAML::Node(access(const_cast<Config&>(c))); }};
}

template <typename Access>
Field bands(std::string section, std::string key, Access access)
{
    return {std::move(section), std::move(key),
            [access](Config& c, const YAML::Node& n, const std::string& k) { access(c) = to_bands(n, k); },
            [access](const Config& c) { return bands_node(access(const_cast<Config&>(c))); }};
}

#define FIELD_REF(expr) [](Config & c) -> auto& { return expr; }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // city
        f.push_back(text("city", "preset", FIELD_REF(c.city.preset)));
        f.push_back({"city", "population",
                     [](Config& c, const YAML::Node& n, const std::string& k) {
                         c.city.population = static_cast<std::size_t>(to_u64(n, k));
                     },
                     [](const Config& c) { return YAML::Node(std::to_string(c.city.population)); }});
        f.push_back({"city", "seed",
                     [](Config& c, const YAML::Node& n, const std::string& k) { c.city.seed = to_u64(n, k); },
                     [](const Config& c) { return YAML::Node(std::to_string(c.city.seed)); }});
        f.push_back(text("city", "network", FIELD_REF(c.city.network)));
        f.push_back(text("city", "snapshot", FIELD_REF(c.city.snapshot)));
        // scenario
        f.push_back(text("scenario", "start_date", FIELD_REF(c.scenario.start_date)));
        f.push_back(integer("scenario", "horizon_days", FIELD_REF(c.scenario.horizon_days)));
        f.push_back(integer("scenario", "initial_exposed", FIELD_REF(c.scenario.initial_exposed)));
        f.push_back({"scenario", "seed",
                     [](Config& c, const YAML::Node& n, const std::string& k) { c.scenario.seed = to_u64(n, k); },
                     [](const Config& c) { return YAML::Node(std::to_string(c.scenario.seed)); }});
        f.push_back(integer("scenario", "num_runs", FIELD_REF(c.scenario.num_runs)));
        // transmission
        f.push_back(real("transmission", "beta_home", FIELD_REF(c.scenario.transmission.beta_home)));
        f.push_back(real("transmission", "beta_school", FIELD_REF(c.scenario.transmission.beta_school)));
        f.push_back(real("transmission", "beta_work", FIELD_REF(c.scenario.transmission.beta_work)));
        f.push_back(real("transmission", "beta_community", FIELD_REF(c.scenario.transmission.beta_community)));
        f.push_back(real("transmission", "subnetwork_upscale", FIELD_REF(c.scenario.transmission.subnetwork_upscale)));
        f.push_back(real("transmission", "beta_coach", FIELD_REF(c.scenario.transmission.beta_coach)));
        f.push_back(real("transmission", "household_alpha", FIELD_REF(c.scenario.transmission.household_alpha)));
        f.push_back(real("transmission", "work_alpha", FIELD_REF(c.scenario.transmission.work_alpha)));
        f.push_back(real("transmission", "school_alpha", FIELD_REF(c.scenario.transmission.school_alpha)));
        f.push_back(real("transmission", "community_crowding", FIELD_REF(c.scenario.transmission.community_crowding)));
        f.push_back(real("transmission", "kernel_a_km", FIELD_REF(c.scenario.transmission.kernel_a_km)));
        f.push_back(real("transmission", "kernel_b", FIELD_REF(c.scenario.transmission.kernel_b)));
        f.push_back(real("transmission", "dt_days", FIELD_REF(c.scenario.transmission.dt_days)));
        // disease
        f.push_back(bands("disease", "p_hospitalise", FIELD_REF(c.scenario.progression.p_hospitalise)));
        f.push_back(bands("disease", "p_critical", FIELD_REF(c.scenario.progression.p_critical)));
        f.push_back(bands("disease", "p_death", FIELD_REF(c.scenario.progression.p_death)));
        f.push_back(real("disease", "asymptomatic_fraction", FIELD_REF(c.scenario.progression.asymptomatic_fraction)));
        f.push_back(real("disease", "mean_exposed_days", FIELD_REF(c.scenario.progression.mean_exposed_days)));
        f.push_back(
            real("disease", "mean_presymptomatic_days", FIELD_REF(c.scenario.progression.mean_presymptomatic_days)));
        f.push_back(real("disease", "mean_asymptomatic_days", FIELD_REF(c.scenario.progression.mean_asymptomatic_days)));
        f.push_back(real("disease", "mean_symptomatic_days", FIELD_REF(c.scenario.progression.mean_symptomatic_days)));
        f.push_back(real("disease", "mean_hospitalised_days", FIELD_REF(c.scenario.progression.mean_hospitalised_days)));
        f.push_back(real("disease", "mean_critical_days", FIELD_REF(c.scenario.progression.mean_critical_days)));
        f.push_back(real("disease", "infectiousness_shape", FIELD_REF(c.scenario.progression.infectiousness_shape)));
        f.push_back(real("disease", "infectiousness_scale", FIELD_REF(c.scenario.progression.infectiousness_scale)));
        f.push_back(real("disease", "severity_probability", FIELD_REF(c.scenario.progression.severity_probability)));
        // cohorting
        f.push_back(integer("cohorting", "cohort_size", FIELD_REF(c.scenario.cohorting.cohort_size)));
        f.push_back(real("cohorting", "one_off_ratio", FIELD_REF(c.scenario.cohorting.one_off_ratio)));
        f.push_back(integer("cohorting", "seating_capacity", FIELD_REF(c.scenario.cohorting.capacity.seating_capacity)));
        f.push_back(real("cohorting", "crowding", FIELD_REF(c.scenario.cohorting.capacity.crowding_factor)));
        f.push_back(
            integer("cohorting", "rejection_threshold", FIELD_REF(c.scenario.cohorting.capacity.rejection_threshold)));
        f.push_back({"cohorting", "coach_strategy",
                     [](Config& c, const YAML::Node& n, const std::string& k) {
                         c.scenario.cohorting.strategy = to_strategy(n, k);
                     },
                     [](const Config& c) {
                         return YAML::Node(std::to_string(static_cast<int>(c.scenario.cohorting.strategy)));
                     }});
        // interventions
        auto& iv = f;
        iv.push_back(real("interventions", "compliance_high_density",
                          FIELD_REF(c.scenario.interventions.compliance_high_density)));
        iv.push_back(real("interventions", "compliance_other", FIELD_REF(c.scenario.interventions.compliance_other)));
        iv.push_back(real("interventions", "lockdown_work_compliant",
                          FIELD_REF(c.scenario.interventions.lockdown_work_compliant)));
        iv.push_back(real("interventions", "lockdown_work_noncompliant",
                          FIELD_REF(c.scenario.interventions.lockdown_work_noncompliant)));
        iv.push_back(real("interventions", "lockdown_community_compliant",
                          FIELD_REF(c.scenario.interventions.lockdown_community_compliant)));
        iv.push_back(real("interventions", "lockdown_community_noncompliant",
                          FIELD_REF(c.scenario.interventions.lockdown_community_noncompliant)));
        iv.push_back(real("interventions", "mask_factor", FIELD_REF(c.scenario.interventions.mask_factor)));
        iv.push_back(integer("interventions", "elderly_age", FIELD_REF(c.scenario.interventions.elderly_age)));
        iv.push_back(real("interventions", "elderly_community_factor",
                          FIELD_REF(c.scenario.interventions.elderly_community_factor)));
        iv.push_back(integer("interventions", "quarantine_days", FIELD_REF(c.scenario.interventions.quarantine_days)));
        iv.push_back(real("interventions", "quarantine_home", FIELD_REF(c.scenario.interventions.quarantine_home)));
        iv.push_back(real("interventions", "quarantine_work", FIELD_REF(c.scenario.interventions.quarantine_work)));
        iv.push_back(
            real("interventions", "quarantine_community", FIELD_REF(c.scenario.interventions.quarantine_community)));
        iv.push_back(
            real("interventions", "containment_threshold", FIELD_REF(c.scenario.interventions.containment_threshold)));
        iv.push_back(
            real("interventions", "containment_community", FIELD_REF(c.scenario.interventions.containment_community)));
        iv.push_back(real("interventions", "trace_on_hospitalisation",
                          FIELD_REF(c.scenario.interventions.trace_on_hospitalisation)));
        iv.push_back(real("interventions", "trace_on_positive", FIELD_REF(c.scenario.interventions.trace_on_positive)));
        iv.push_back(real("interventions", "trace_on_symptoms", FIELD_REF(c.scenario.interventions.trace_on_symptoms)));
        iv.push_back(real("interventions", "trace_fraction", FIELD_REF(c.scenario.interventions.trace_fraction)));
        iv.push_back(
            flag("interventions", "trace_includes_cohort", FIELD_REF(c.scenario.interventions.trace_includes_cohort)));
        iv.push_back(real("interventions", "symptomatic_test_probability",
                          FIELD_REF(c.scenario.interventions.symptomatic_test_probability)));
        iv.push_back(
            integer("interventions", "test_turnaround_days", FIELD_REF(c.scenario.interventions.test_turnaround_days)));
        iv.push_back(flag("interventions", "isolation", FIELD_REF(c.scenario.interventions.cohort_isolation)));
        iv.push_back(real("interventions", "station_detection", FIELD_REF(c.scenario.interventions.station_detection)));
        iv.push_back(real("interventions", "self_declaration", FIELD_REF(c.scenario.interventions.self_declaration)));
        iv.push_back(real("interventions", "severe_attendance_multiplier",
                          FIELD_REF(c.scenario.interventions.severe_attendance_multiplier)));
        // policy (phases are handled separately)
        f.push_back(text("policy", "preset", FIELD_REF(c.policy_preset)));
        // calibration
        f.push_back(text("calibration", "target", FIELD_REF(c.calibration_target)));
        f.push_back(integer("calibration", "horizon_days", FIELD_REF(c.calibration_horizon_days)));
        f.push_back(real("calibration", "window_lo", FIELD_REF(c.calibration.window_lo)));
        f.push_back(real("calibration", "window_hi", FIELD_REF(c.calibration.window_hi)));
        f.push_back(integer("calibration", "seeds", FIELD_REF(c.calibration.seeds)));
        f.push_back(real("calibration", "tolerance", FIELD_REF(c.calibration.tolerance)));
        f.push_back(real("calibration", "share_lo", FIELD_REF(c.calibration.share_lo)));
        f.push_back(real("calibration", "share_hi", FIELD_REF(c.calibration.share_hi)));
        f.push_back(flag("calibration", "balance_shares", FIELD_REF(c.calibration.balance_shares)));
        f.push_back(real("calibration", "school_work_ratio", FIELD_REF(c.calibration.school_work_ratio)));
        f.push_back(integer("calibration", "max_iterations", FIELD_REF(c.calibration.max_iterations)));
        return f;
    }();
    return table;
}

#undef FIELD_REF

const Field* find_field(const std::string& section, const std::string& key)
{
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

const std::map<std::string, std::string>& aliases()
{
    static const std::map<std::string, std::string> table{
        {"cohort_size", "cohorting.cohort_size"},
        {"crowding", "cohorting.crowding"},
        {"coach_strategy", "cohorting.coach_strategy"},
        {"one_off_ratio", "cohorting.one_off_ratio"},
        {"beta_coach", "transmission.beta_coach"},
        {"isolation", "interventions.isolation"},
        {"station_detection", "interventions.station_detection"},
        {"horizon", "scenario.horizon_days"},
        {"seed", "scenario.seed"},
        {"runs", "scenario.num_runs"},
        {"population", "city.population"},
    };
    return table;
}

// Phase fields, shared by reading and writing.
struct PhaseField {
    const char* key;
    bool PolicyPhase::*flag = nullptr;
    double PolicyPhase::*real = nullptr;
};

constexpr std::array<PhaseField, 9> kPhaseFields{{
    {"lockdown", &PolicyPhase::lockdown, nullptr},
    {"schools_closed", &PolicyPhase::schools_closed, nullptr},
    {"office_attendance", nullptr, &PolicyPhase::office_attendance},
    {"masks", &PolicyPhase::masks, nullptr},
    {"containment", &PolicyPhase::containment, nullptr},
    {"trains_running", &PolicyPhase::trains_running, nullptr},
    {"testing", &PolicyPhase::testing, nullptr},
    {"home_quarantine", &PolicyPhase::home_quarantine, nullptr},
    {"elderly_distancing", &PolicyPhase::elderly_distancing, nullptr},
}};

void read_phases(Config& c, const YAML::Node& list)
{
    if (!list.IsSequence()) throw ValidationError("policy.phases must be a list");
    c.phases.clear();
    PolicyPhase carry;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& node = list[i];
        if (!node.IsMap()) throw ValidationError("policy.phases entries must be maps");
        PhaseSpec spec;
        spec.values = carry;
        bool has_from = false;
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            const auto where = "policy.phases[" + std::to_string(i) + "]." + key;
            if (key == "from") {
                spec.from = scalar(kv.second, where);
                has_from = true;
                continue;
            }
            auto it = std::find_if(kPhaseFields.begin(), kPhaseFields.end(),
                                   [&](const PhaseField& f) { return key == f.key; });
            if (it == kPhaseFields.end()) throw ValidationError("unknown policy phase key '" + where + "'");
            if (it->flag != nullptr)
                spec.values.*(it->flag) = to_flag(kv.second, where);
            else
                spec.values.*(it->real) = to_double(kv.second, where);
        }
        if (!has_from) throw ValidationError("policy.phases[" + std::to_string(i) + "] needs a 'from' date or day");
        carry = spec.values;
        c.phases.push_back(std::move(spec));
    }
}

void apply_node(Config& c, const YAML::Node& root)
{
    if (!root || root.IsNull()) return;
    if (!root.IsMap()) throw ParseError("config root must be a map of sections");
    for (const auto& section : root) {
        const auto name = section.first.as<std::string>();
        const auto& body = section.second;
        if (body.IsNull()) continue;
        if (!body.IsMap()) throw ValidationError("section '" + name + "' must be a map");
        for (const auto& kv : body) {
            const auto key = kv.first.as<std::string>();
            if (name == "policy" && key == "phases") {
                read_phases(c, kv.second);
                continue;
            }
            const Field* f = find_field(name, key);
            if (f == nullptr) throw ValidationError("unknown config key '" + name + "." + key + "'");
            f->read(c, kv.second, name + "." + key);
        }
    }
}

YAML::Node load_yaml(const std::string& text)
{
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("config is not valid YAML: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void Config::resolve_policy()
{
    const Date start = parse_date(scenario.start_date);
    if (policy_preset == "none") {
        scenario.policy = PolicyTimeline::no_intervention();
    } else if (policy_preset == "mumbai_2020") {
        scenario.policy = PolicyTimeline::mumbai_2020(start);
    } else if (policy_preset == "custom") {
        if (phases.empty()) throw ValidationError("custom policy needs at least one phase");
        std::vector<PolicyPhase> resolved;
        for (const auto& spec : phases) {
            PolicyPhase p = spec.values;
            const auto from = detail::trim(spec.from);
            p.start_day = from.find('-') != std::string::npos && from.size() > 4 ? days_between(start, parse_date(from))
                                                                                 : detail::parse_int(from);
            resolved.push_back(p);
        }
        // Phases dated before day 0 collapse onto it; the latest such phase wins.
        std::vector<PolicyPhase> kept;
        for (auto& p : resolved) {
            p.start_day = std::max(0, p.start_day);
            if (!kept.empty() && kept.back().start_day == p.start_day)
                kept.back() = p;
            else
                kept.push_back(p);
        }
        kept.front().start_day = 0;
        scenario.policy = PolicyTimeline(std::move(kept));
    } else {
        throw ValidationError("unknown policy preset '" + policy_preset + "' (none, mumbai_2020, custom)");
    }
}

void Config::validate() const
{
    if (city.preset != "mumbai_like") throw ValidationError("unknown city preset '" + city.preset + "'");
    if (city.population == 0) throw ValidationError("city population must be positive");
    scenario.validate();
    calibration.validate();
    if (calibration_horizon_days <= 0) throw ValidationError("calibration horizon must be positive");
}

Override parse_override(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + text + "' is not key=value");
    Override o{detail::trim(text.substr(0, eq)), detail::trim(text.substr(eq + 1))};
    if (o.value.empty()) throw ValidationError("override '" + text + "' has an empty value");
    o.key = canonical_key(o.key);
    return o;
}

std::string canonical_key(const std::string& key)
{
    if (auto it = aliases().find(key); it != aliases().end()) return it->second;
    const auto dot = key.find('.');
    if (dot != std::string::npos && find_field(key.substr(0, dot), key.substr(dot + 1)) != nullptr) return key;
    throw ValidationError("unknown config key '" + key + "'");
}

std::vector<std::string> known_keys()
{
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.section + "." + f.key);
    return out;
}

Config default_config()
{
    Config c;
    c.resolve_policy();
    return c;
}

Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir)
{
    Config c;
    c.base_dir = base_dir;
    apply_node(c, load_yaml(yaml_text));
    c.resolve_policy();
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path)
{
    return parse_config(read_file(path), path.parent_path());
}

void apply_overlay_text(Config& config, const std::string& yaml_text)
{
    apply_node(config, load_yaml(yaml_text));
    config.resolve_policy();
    config.validate();
}

void apply_overlay(Config& config, const std::filesystem::path& path) { apply_overlay_text(config, read_file(path)); }

void apply_overrides(Config& config, const std::vector<Override>& overrides)
{
    for (const auto& o : overrides) {
        const auto key = canonical_key(o.key);
        const auto dot = key.find('.');
        const Field* f = find_field(key.substr(0, dot), key.substr(dot + 1));
        f->read(config, YAML::Node(o.value), key);
    }
    config.resolve_policy();
    config.validate();
}

std::string to_yaml(const Config& config)
{
    YAML::Node root;
    for (const auto& f : fields()) root[f.section][f.key] = f.write(config);
    if (config.policy_preset == "custom") {
        YAML::Node list(YAML::NodeType::Sequence);
        for (const auto& spec : config.phases) {
            YAML::Node p;
            p["from"] = spec.from;
            for (const auto& pf : kPhaseFields) {
                if (pf.flag != nullptr)
                    p[pf.key] = spec.values.*(pf.flag) ? "1" : "0";
                else
                    p[pf.key] = format_double(spec.values.*(pf.real));
            }
            list.push_back(p);
        }
        root["policy"]["phases"] = list;
    }
    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

std::filesystem::path bundled_data_dir()
{
    if (const char* env = std::getenv("COHORTSIM_DATA")) return env;
    return COHORTSIM_DATA_DIR;
}

std::filesystem::path resolve_data_path(const Config& config, const std::string& name)
{
    const std::filesystem::path p(name);
    if (p.is_absolute()) return p;
    if (!config.base_dir.empty() && std::filesystem::exists(config.base_dir / p)) return config.base_dir / p;
    if (std::filesystem::exists(p)) return p;
    const auto bundled = bundled_data_dir() / p;
    if (std::filesystem::exists(bundled)) return bundled;
    throw std::runtime_error("cannot find data file '" + name + "'");
}

RailNetwork load_config_network(const Config& config)
{
    return precompute_routes(load_network(resolve_data_path(config, config.city.network)));
}

City build_city(const Config& config, const RailNetwork& network)
{
    if (!config.city.snapshot.empty()) {
        City city = load_city(resolve_data_path(config, config.city.snapshot));
        if (city.population() != config.city.population)
            throw ValidationError("city snapshot population differs from city.population");
        return city;
    }
    return generate_city(mumbai_like_city_config(config.city.population, config.city.seed), network);
}

} // namespace cohortsim
