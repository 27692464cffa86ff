#include "cyclestab/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "cyclestab/errors.hpp"
#include "json.hpp"

namespace cyclestab {

using ojson = nlohmann::ordered_json;

namespace {

// ---- value conversions ----

BigDec decimal_from_json(const ojson& v, const std::string& where) {
    if (v.is_string()) {
        try {
            return BigDec::from_string(v.get<std::string>());
        } catch (const Error&) {
            throw ValidationError(where + ": '" + v.get<std::string>() + "' is not a decimal number");
        }
    }
    if (v.is_number_integer()) return BigDec(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return BigDec::from_string(std::to_string(v.get<std::uint64_t>()));
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(where + ": value is not finite");
        return BigDec::from_double(d);
    }
    throw ValidationError(where + ": expected a number or a decimal string");
}

int int_from_json(const ojson& v, const std::string& where) {
    if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
    auto x = v.get<std::int64_t>();
    if (x < -1000000000 || x > 1000000000) throw ValidationError(where + ": integer out of range");
    return static_cast<int>(x);
}

bool bool_from_json(const ojson& v, const std::string& where) {
    if (!v.is_boolean()) throw ValidationError(where + ": expected true or false");
    return v.get<bool>();
}

std::string string_from_json(const ojson& v, const std::string& where) {
    if (!v.is_string()) throw ValidationError(where + ": expected a string");
    return v.get<std::string>();
}

State state_from_json(const ojson& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ValidationError(where + ": expected a non-empty array");
    State s;
    for (std::size_t i = 0; i < v.size(); ++i) s.push_back(decimal_from_json(v[i], where + "[" + std::to_string(i) + "]"));
    return s;
}

std::vector<State> states_from_json(const ojson& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ValidationError(where + ": expected a non-empty array of states");
    std::vector<State> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(state_from_json(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

ojson to_json(const BigDec& x) { return x.to_string(); }

ojson to_json(const State& s) {
    ojson a = ojson::array();
    for (const auto& x : s) a.push_back(x.to_string());
    return a;
}

ojson to_json(const ComplexPair& z) { return ojson::array({z.re.to_string(), z.im.to_string()}); }

ojson to_json(const std::vector<ComplexPair>& v) {
    ojson a = ojson::array();
    for (const auto& z : v) a.push_back(to_json(z));
    return a;
}

ojson to_json(const SmallMatrix& m) {
    ojson rows = ojson::array();
    for (int i = 0; i < m.dim(); ++i) {
        ojson row = ojson::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j).to_string());
        rows.push_back(row);
    }
    return rows;
}

BigDec dec(const ojson& v) { return decimal_from_json(v, "result"); }

std::vector<BigDec> decs(const ojson& v) {
    std::vector<BigDec> out;
    for (const auto& x : v) out.push_back(dec(x));
    return out;
}

ComplexPair complex_from(const ojson& v) { return {dec(v.at(0)), dec(v.at(1))}; }

std::vector<ComplexPair> complexes(const ojson& v) {
    std::vector<ComplexPair> out;
    for (const auto& z : v) out.push_back(complex_from(z));
    return out;
}

SmallMatrix matrix_from(const ojson& v) {
    if (v.size() == 1) return SmallMatrix(dec(v.at(0).at(0)));
    return SmallMatrix(dec(v.at(0).at(0)), dec(v.at(0).at(1)), dec(v.at(1).at(0)), dec(v.at(1).at(1)));
}

Outcome outcome_from(const std::string& s) {
    for (Outcome o : {Outcome::Found, Outcome::NotFound, Outcome::Escaped, Outcome::Singular, Outcome::Stopped})
        if (outcome_name(o) == s) return o;
    throw ValidationError("unknown outcome '" + s + "'");
}

Verdict verdict_from(const std::string& s) {
    for (Verdict v : {Verdict::Stable, Verdict::Marginal, Verdict::Unstable})
        if (verdict_name(v) == s) return v;
    throw ValidationError("unknown verdict '" + s + "'");
}

// ---- result documents ----

ojson report_json(const StabilityReport& r) {
    ojson j;
    j["period"] = r.period;
    j["precision"] = r.precision;
    j["theta"] = to_json(r.theta.coefficients());
    j["verdict"] = verdict_name(r.verdict);
    j["open_loop_multipliers"] = to_json(r.open_loop);
    j["controlled_multipliers"] = to_json(r.controlled);
    j["controlled_moduli"] = to_json(r.controlled_moduli);
    j["stability_values"] = to_json(r.stability_values);
    j["open_loop_unstable"] = r.open_loop_unstable();
    j["lemma1_residual"] = to_json(r.lemma1_residual);
    j["coherence_residual"] = to_json(r.coherence_residual);
    j["coherence_tolerance"] = to_json(r.coherence_tolerance);
    j["coherent"] = r.coherent;
    j["cycle_jacobian"] = to_json(r.cycle_jacobian);
    j["controlled_jacobian"] = to_json(r.controlled_jacobian);
    return j;
}

StabilityReport report_from(const ojson& j) {
    StabilityReport r;
    r.period = j.at("period").get<int>();
    r.precision = j.at("precision").get<int>();
    r.theta = ControlPolynomial::unchecked(decs(j.at("theta")));
    r.verdict = verdict_from(j.at("verdict").get<std::string>());
    r.open_loop = complexes(j.at("open_loop_multipliers"));
    r.controlled = complexes(j.at("controlled_multipliers"));
    r.controlled_moduli = decs(j.at("controlled_moduli"));
    r.stability_values = complexes(j.at("stability_values"));
    r.lemma1_residual = dec(j.at("lemma1_residual"));
    r.coherence_residual = dec(j.at("coherence_residual"));
    r.coherence_tolerance = dec(j.at("coherence_tolerance"));
    r.coherent = j.at("coherent").get<bool>();
    r.cycle_jacobian = matrix_from(j.at("cycle_jacobian"));
    r.controlled_jacobian = matrix_from(j.at("controlled_jacobian"));
    return r;
}

ojson record_json(const CycleRecord& c) {
    ojson j;
    j["initial_index"] = c.initial_index;
    j["sweep"] = c.sweep;
    j["step"] = c.step;
    j["period"] = c.period;
    j["minimal_period"] = c.minimal_period;
    j["scheme"] = scheme_name(c.scheme);
    j["theta"] = to_json(c.theta.coefficients());
    j["scalar_theta"] = c.scalar_theta ? ojson(c.scalar_theta->to_string()) : ojson(nullptr);
    j["precision"] = c.precision;
    j["verified"] = c.verified;
    j["residual"] = to_json(c.residual);
    j["cycle_residual"] = to_json(c.cycle_residual);
    j["noise_floor"] = to_json(c.noise_floor);
    j["tolerance"] = to_json(c.tolerance);
    j["sweep_distances"] = to_json(c.sweep_distances);
    ojson pts = ojson::array();
    for (const auto& p : c.points) pts.push_back(to_json(p));
    j["points"] = pts;
    return j;
}

CycleRecord record_from(const ojson& j, const std::string& map) {
    CycleRecord c;
    c.map = map;
    c.initial_index = j.at("initial_index").get<int>();
    c.sweep = j.at("sweep").get<int>();
    c.step = j.at("step").get<int>();
    c.period = j.at("period").get<int>();
    c.minimal_period = j.at("minimal_period").get<int>();
    c.scheme = parse_scheme(j.at("scheme").get<std::string>());
    c.theta = ControlPolynomial::unchecked(decs(j.at("theta")));
    if (!j.at("scalar_theta").is_null()) c.scalar_theta = dec(j.at("scalar_theta"));
    c.precision = j.at("precision").get<int>();
    c.verified = j.at("verified").get<bool>();
    c.residual = dec(j.at("residual"));
    c.cycle_residual = dec(j.at("cycle_residual"));
    c.noise_floor = dec(j.at("noise_floor"));
    c.tolerance = dec(j.at("tolerance"));
    c.sweep_distances = decs(j.at("sweep_distances"));
    for (const auto& p : j.at("points")) c.points.push_back(decs(p));
    return c;
}

ojson state_json(const StateResult& s) {
    ojson j;
    j["index"] = s.index;
    j["initial"] = to_json(s.initial);
    j["outcome"] = outcome_name(s.outcome);
    j["message"] = s.message;
    j["sweeps"] = s.sweeps;
    j["evaluations"] = s.evaluations;
    j["sweep_log"] = s.sweep_log;
    return j;
}

StateResult state_from(const ojson& j) {
    StateResult s;
    s.index = j.at("index").get<int>();
    s.initial = decs(j.at("initial"));
    s.outcome = outcome_from(j.at("outcome").get<std::string>());
    s.message = j.at("message").get<std::string>();
    s.sweeps = j.at("sweeps").get<int>();
    s.evaluations = j.at("evaluations").get<std::uint64_t>();
    s.sweep_log = j.at("sweep_log").get<std::vector<double>>();
    return s;
}

std::string status_of(const SearchReport& r) {
    for (const auto& c : r.cycles)
        if (c.record.verified) return "found";
    bool all_div = !r.states.empty();
    for (const auto& s : r.states)
        if (s.outcome != Outcome::Escaped && s.outcome != Outcome::Singular) all_div = false;
    return all_div ? "divergence" : "not-found";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<std::pair<double, double>> cycle_pairs(const MapDef& map, const CycleRecord& rec) {
    std::vector<std::pair<double, double>> out;
    const std::size_t T = rec.points.size();
    for (std::size_t j = 0; j < T; ++j) {
        const State& p = rec.points[j];
        if (map.dimension() == 1)
            out.emplace_back(p[0].to_double(), rec.points[(j + 1) % T][0].to_double());
        else
            out.emplace_back(p[0].to_double(), p[1].to_double());
    }
    return out;
}

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(std::min(n, 16U));
}

}  // namespace

int precision_from_environment() {
    const char* v = std::getenv(kPrecisionEnv);
    if (!v || !*v) return kDefaultPrecision;
    char* end = nullptr;
    long p = std::strtol(v, &end, 10);
    if (*end != '\0' || p < kMinimumPrecision || p > 100000)
        throw ValidationError(std::string(kPrecisionEnv) + " must be an integer >= " +
                              std::to_string(kMinimumPrecision) + ", got '" + v + "'");
    return static_cast<int>(p);
}

RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                           const RunOverrides& overrides) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("manifest must be a JSON object");
    static const std::set<std::string> top_keys{"precision", "output_dir", "emit_plots", "stop_on_first",
                                                "jobs",      "workers",    "maps",       "searches"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!top_keys.count(it.key())) throw ValidationError("manifest: unknown key '" + it.key() + "'");

    RunManifest m;
    m.precision = doc.contains("precision") ? int_from_json(doc["precision"], "precision") : precision_from_environment();
    if (overrides.precision) m.precision = *overrides.precision;
    if (m.precision < kMinimumPrecision)
        throw ValidationError("precision must be at least " + std::to_string(kMinimumPrecision));
    PrecisionGuard guard(m.precision);

    std::filesystem::path out = doc.contains("output_dir") ? string_from_json(doc["output_dir"], "output_dir") : "results";
    if (overrides.output_dir) out = *overrides.output_dir;
    m.output_dir = out.is_absolute() ? out : base_dir / out;
    m.emit_plots = doc.contains("emit_plots") ? bool_from_json(doc["emit_plots"], "emit_plots") : true;
    m.stop_on_first = doc.contains("stop_on_first") ? bool_from_json(doc["stop_on_first"], "stop_on_first") : true;
    if (overrides.stop_on_first) m.stop_on_first = *overrides.stop_on_first;
    m.jobs = doc.contains("jobs") ? int_from_json(doc["jobs"], "jobs") : default_workers();
    if (overrides.jobs) m.jobs = *overrides.jobs;
    if (m.jobs < 1) throw ValidationError("jobs must be at least 1");
    const int workers = doc.contains("workers") ? int_from_json(doc["workers"], "workers") : default_workers();
    if (workers < 1) throw ValidationError("workers must be at least 1");

    m.registry = MapRegistry::with_catalog();
    if (doc.contains("maps")) {
        const ojson& maps = doc["maps"];
        if (!maps.is_array()) throw ValidationError("maps: expected an array");
        for (std::size_t i = 0; i < maps.size(); ++i) {
            const std::string where = "maps[" + std::to_string(i) + "]";
            const ojson& u = maps[i];
            if (!u.is_object()) throw ValidationError(where + ": expected an object");
            UserMapSpec spec;
            spec.name = string_from_json(u.value("name", ojson()), where + ".name");
            if (!u.contains("variables") || !u["variables"].is_array())
                throw ValidationError(where + ".variables: expected an array of names");
            for (const auto& v : u["variables"]) spec.variables.push_back(string_from_json(v, where + ".variables"));
            if (u.contains("parameters")) {
                if (!u["parameters"].is_object()) throw ValidationError(where + ".parameters: expected an object");
                for (auto it = u["parameters"].begin(); it != u["parameters"].end(); ++it)
                    spec.parameters.emplace_back(it.key(), decimal_from_json(it.value(), where + ".parameters." + it.key()));
            }
            if (!u.contains("step") || !u["step"].is_array())
                throw ValidationError(where + ".step: expected an array of expressions");
            for (const auto& e : u["step"]) spec.step.push_back(string_from_json(e, where + ".step"));
            if (!u.contains("initial_grid")) throw ValidationError(where + ".initial_grid: missing");
            spec.initial_grid = states_from_json(u["initial_grid"], where + ".initial_grid");
            if (u.contains("period")) spec.period = int_from_json(u["period"], where + ".period");
            if (u.contains("theta")) spec.theta = decimal_from_json(u["theta"], where + ".theta");
            try {
                if (m.registry.contains(spec.name)) throw ValidationError("name clashes with an existing map");
                m.registry.add(make_user_map(spec));
            } catch (const ValidationError& e) {
                throw ValidationError(where + " (" + spec.name + "): " + e.what());
            }
        }
    }

    if (doc.contains("searches") && !doc["searches"].is_array()) throw ValidationError("searches: expected an array");
    const ojson searches = doc.contains("searches") ? doc["searches"] : ojson::array();
    static const std::set<std::string> keys{"label",          "map",        "period",     "scheme",   "theta",
                                            "coefficients",   "theta_schedule", "initial_states", "grid_size",
                                            "max_sweeps",     "warmup",     "epsilon",    "workers",  "parameters"};
    std::set<std::string> labels;
    for (std::size_t i = 0; i < searches.size(); ++i) {
        const ojson& s = searches[i];
        std::string where = "searches[" + std::to_string(i) + "]";
        if (!s.is_object()) throw ValidationError(where + ": expected an object");
        for (auto it = s.begin(); it != s.end(); ++it)
            if (!keys.count(it.key())) throw ValidationError(where + ": unknown key '" + it.key() + "'");
        if (!s.contains("map")) throw ValidationError(where + ": missing 'map'");
        std::string map_name = string_from_json(s["map"], where + ".map");
        where += " (" + map_name + ")";
        if (!m.registry.contains(map_name)) throw ValidationError(where + ": unknown map '" + map_name + "'");
        SearchEntry entry;
        SearchConfig& cfg = entry.config;
        cfg.map = m.registry.find(map_name);
        if (s.contains("parameters")) {
            if (!s["parameters"].is_object()) throw ValidationError(where + ".parameters: expected an object");
            std::map<std::string, BigDec> ov;
            for (auto it = s["parameters"].begin(); it != s["parameters"].end(); ++it)
                ov[it.key()] = decimal_from_json(it.value(), where + ".parameters." + it.key());
            try {
                cfg.map = cfg.map.with_parameters(ov);
            } catch (const ValidationError& e) {
                throw ValidationError(where + ": " + e.what());
            }
        }
        cfg.period = s.contains("period") ? int_from_json(s["period"], where + ".period") : cfg.map.default_period();
        const std::optional<Preset> preset = cfg.map.preset_for(cfg.period);

        std::string scheme = s.contains("coefficients") ? "combination" : "scalar-theta";
        if (s.contains("scheme")) scheme = string_from_json(s["scheme"], where + ".scheme");
        try {
            cfg.scheme = parse_scheme(scheme);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        const bool adaptive = cfg.scheme == Scheme::Adaptive || cfg.scheme == Scheme::AdaptiveAbs;
        if (s.contains("theta_schedule")) {
            const ojson& t = s["theta_schedule"];
            if (!t.is_object() || !t.contains("theta0") || !t.contains("k_max"))
                throw ValidationError(where + ".theta_schedule: expected {theta0, k_max}");
            if (adaptive) throw ValidationError(where + ": theta_schedule does not apply to the adaptive scheme");
            entry.schedule = ThetaSchedule{decimal_from_json(t["theta0"], where + ".theta_schedule.theta0"),
                                           int_from_json(t["k_max"], where + ".theta_schedule.k_max")};
            if (!(entry.schedule->theta0 > BigDec(0)))
                throw ValidationError(where + ".theta_schedule.theta0 must be positive");
            if (entry.schedule->k_max < 0) throw ValidationError(where + ".theta_schedule.k_max must be non-negative");
        }
        try {
            if (s.contains("coefficients")) {
                if (cfg.scheme == Scheme::ScalarTheta || adaptive)
                    throw ValidationError("coefficients need the combination, pre-averaged or two-term scheme");
                cfg.theta = ControlPolynomial(state_from_json(s["coefficients"], "coefficients"));
                cfg.scalar_theta = BigDec(0);
            } else if (!adaptive && !entry.schedule) {
                BigDec theta;
                if (s.contains("theta"))
                    theta = decimal_from_json(s["theta"], "theta");
                else if (preset)
                    theta = preset->theta;
                else
                    throw ValidationError("no theta given and no reference preset for T = " + std::to_string(cfg.period));
                cfg.scalar_theta = theta;
                if (cfg.scheme != Scheme::ScalarTheta) cfg.theta = ControlPolynomial::from_scalar_theta(theta);
            }
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (s.contains("initial_states")) {
            cfg.initial_states = states_from_json(s["initial_states"], where + ".initial_states");
        } else {
            int n = s.contains("grid_size") ? int_from_json(s["grid_size"], where + ".grid_size")
                                            : (preset ? preset->grid_size : -1);
            try {
                cfg.initial_states = cfg.map.initial_grid(n);
            } catch (const ValidationError& e) {
                throw ValidationError(where + ": " + e.what());
            }
        }
        if (s.contains("max_sweeps")) cfg.max_sweeps = int_from_json(s["max_sweeps"], where + ".max_sweeps");
        if (s.contains("warmup")) cfg.warmup = int_from_json(s["warmup"], where + ".warmup");
        if (s.contains("epsilon")) {
            cfg.epsilon = decimal_from_json(s["epsilon"], where + ".epsilon");
            if (!(*cfg.epsilon > BigDec(0))) throw ValidationError(where + ".epsilon must be positive");
        }
        cfg.workers = s.contains("workers") ? int_from_json(s["workers"], where + ".workers") : workers;
        cfg.stop_on_first = m.stop_on_first;
        try {
            if (!entry.schedule) cfg.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        char num[16];
        std::snprintf(num, sizeof num, "%02zu", i + 1);
        entry.label = s.contains("label") ? string_from_json(s["label"], where + ".label")
                                          : std::string(num) + "-" + cfg.map.name() + "-T" + std::to_string(cfg.period);
        if (entry.label.empty() || entry.label.find_first_of("/\\") != std::string::npos)
            throw ValidationError(where + ": label must be a plain file name");
        if (!labels.insert(entry.label).second) throw ValidationError(where + ": duplicate label '" + entry.label + "'");
        m.searches.push_back(std::move(entry));
    }
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path, const RunOverrides& overrides) {
    std::string text = read_text_file(path);
    return parse_manifest(text, path.parent_path(), overrides);
}

SearchReport execute_search(const SearchEntry& entry) {
    const SearchConfig& cfg = entry.config;
    SearchReport rep;
    rep.label = entry.label;
    rep.map = cfg.map.name();
    rep.period = cfg.period;
    rep.scheme = cfg.scheme;
    rep.precision = precision();
    rep.epsilon = cfg.epsilon ? *cfg.epsilon : epsilon();
    rep.schedule = entry.schedule;
    rep.max_sweeps = cfg.max_sweeps;
    rep.warmup = cfg.warmup;
    rep.stop_on_first = cfg.stop_on_first;
    std::vector<CycleRecord> records;
    if (entry.schedule) {
        DoublingResult d = theta_doubling_search(cfg.map, cfg.period, entry.schedule->theta0, entry.schedule->k_max, cfg);
        for (const auto& [theta, result] : d.attempts) {
            Attempt a;
            a.theta = theta;
            a.found = result.found();
            a.states = result.states;
            rep.attempts.push_back(std::move(a));
        }
        const auto& last = d.attempts.back();
        rep.scalar_theta = last.first;
        rep.states = last.second.states;
    } else {
        rep.states = run_search(cfg).states;
        if (cfg.scheme == Scheme::ScalarTheta) rep.scalar_theta = cfg.scalar_theta;
    }
    if (cfg.scheme == Scheme::ScalarTheta || entry.schedule) {
        rep.theta = ControlPolynomial::from_scalar_theta(*rep.scalar_theta);
    } else if (cfg.scheme == Scheme::Adaptive || cfg.scheme == Scheme::AdaptiveAbs) {
        rep.theta = ControlPolynomial();
    } else {
        rep.theta = cfg.theta;
    }
    for (const auto& s : rep.states) {
        if (!s.record) continue;
        CycleResult c;
        c.record = *s.record;
        c.report = stability_verdict(cfg.map, c.record.points, c.record.theta, cfg.period);
        rep.cycles.push_back(std::move(c));
    }
    rep.status = status_of(rep);
    return rep;
}

std::string search_report_to_json(const SearchReport& r) {
    ojson j;
    j["label"] = r.label;
    j["map"] = r.map;
    j["period"] = r.period;
    j["scheme"] = scheme_name(r.scheme);
    j["precision"] = r.precision;
    j["epsilon"] = to_json(r.epsilon);
    j["theta"] = to_json(r.theta.coefficients());
    j["scalar_theta"] = r.scalar_theta ? ojson(r.scalar_theta->to_string()) : ojson(nullptr);
    if (r.schedule)
        j["theta_schedule"] = ojson{{"theta0", r.schedule->theta0.to_string()}, {"k_max", r.schedule->k_max}};
    else
        j["theta_schedule"] = nullptr;
    j["max_sweeps"] = r.max_sweeps;
    j["warmup"] = r.warmup;
    j["stop_on_first"] = r.stop_on_first;
    j["status"] = r.status;
    ojson states = ojson::array();
    for (const auto& s : r.states) states.push_back(state_json(s));
    j["states"] = states;
    ojson cycles = ojson::array();
    for (const auto& c : r.cycles) {
        ojson cj = record_json(c.record);
        cj["report"] = report_json(c.report);
        cycles.push_back(cj);
    }
    j["cycles"] = cycles;
    ojson attempts = ojson::array();
    for (const auto& a : r.attempts) {
        ojson aj;
        aj["theta"] = a.theta.to_string();
        aj["found"] = a.found;
        ojson st = ojson::array();
        for (const auto& s : a.states) st.push_back(state_json(s));
        aj["states"] = st;
        attempts.push_back(aj);
    }
    j["attempts"] = attempts;
    return j.dump(2) + "\n";
}

SearchReport search_report_from_json(const std::string& text) {
    try {
        ojson j = ojson::parse(text);
        SearchReport r;
        r.label = j.at("label").get<std::string>();
        r.map = j.at("map").get<std::string>();
        r.period = j.at("period").get<int>();
        r.scheme = parse_scheme(j.at("scheme").get<std::string>());
        r.precision = j.at("precision").get<int>();
        r.epsilon = dec(j.at("epsilon"));
        r.theta = ControlPolynomial::unchecked(decs(j.at("theta")));
        if (!j.at("scalar_theta").is_null()) r.scalar_theta = dec(j.at("scalar_theta"));
        if (!j.at("theta_schedule").is_null())
            r.schedule = ThetaSchedule{dec(j["theta_schedule"].at("theta0")), j["theta_schedule"].at("k_max").get<int>()};
        r.max_sweeps = j.at("max_sweeps").get<int>();
        r.warmup = j.at("warmup").get<int>();
        r.stop_on_first = j.at("stop_on_first").get<bool>();
        r.status = j.at("status").get<std::string>();
        for (const auto& s : j.at("states")) r.states.push_back(state_from(s));
        for (const auto& cj : j.at("cycles")) {
            CycleResult c;
            c.record = record_from(cj, r.map);
            c.report = report_from(cj.at("report"));
            for (auto& s : r.states)
                if (s.index == c.record.initial_index && s.outcome == Outcome::Found) s.record = c.record;
            r.cycles.push_back(std::move(c));
        }
        for (const auto& aj : j.at("attempts")) {
            Attempt a;
            a.theta = dec(aj.at("theta"));
            a.found = aj.at("found").get<bool>();
            for (const auto& s : aj.at("states")) a.states.push_back(state_from(s));
            r.attempts.push_back(std::move(a));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed result file: ") + e.what());
    }
}

std::string cycle_to_csv(const CycleRecord& record) {
    std::ostringstream os;
    const bool two = !record.points.empty() && record.points[0].size() > 1;
    os << (two ? "index,x,y\n" : "index,x\n");
    for (std::size_t i = 0; i < record.points.size(); ++i) {
        os << i << ',' << record.points[i][0].to_string();
        if (two) os << ',' << record.points[i][1].to_string();
        os << '\n';
    }
    return os.str();
}

std::vector<State> cycle_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty cycle file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t cols;
    if (line == "index,x,y")
        cols = 2;
    else if (line == "index,x")
        cols = 1;
    else
        throw ValidationError("cycle CSV must start with 'index,x,y' or 'index,x'");
    std::vector<State> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != cols + 1) throw ValidationError("cycle CSV row has the wrong number of fields: " + line);
        if (f[0] != std::to_string(out.size())) throw ValidationError("cycle CSV rows must be numbered 0, 1, ...");
        State s;
        for (std::size_t k = 1; k <= cols; ++k) s.push_back(BigDec::from_string(f[k]));
        out.push_back(std::move(s));
    }
    if (out.empty()) throw ValidationError("cycle CSV has no points");
    return out;
}

std::vector<State> load_cycle_file(const std::filesystem::path& path) {
    std::string text = read_text_file(path);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        SearchReport r = search_report_from_json(text);
        for (const auto& c : r.cycles)
            if (c.record.verified) return c.record.points;
        throw ValidationError("result file " + path.string() + " has no verified cycle");
    }
    return cycle_from_csv(text);
}

std::string stability_report_to_json(const StabilityReport& report, int indent) {
    return report_json(report).dump(indent) + "\n";
}

std::vector<std::pair<double, double>> background_orbit(const MapDef& map, const std::vector<State>& initial, int T) {
    std::vector<std::pair<double, double>> out;
    const long steps = static_cast<long>(200 / T + 1) * T;
    for (const auto& s0 : initial) {
        State s = s0;
        try {
            for (long n = 0; n < steps; ++n) {
                State next = map.step(s);
                if (map.dimension() == 1)
                    out.emplace_back(s[0].to_double(), next[0].to_double());
                else
                    out.emplace_back(next[0].to_double(), next[1].to_double());
                s = std::move(next);
            }
        } catch (const Error&) {
            // escaped orbits just end early
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const auto& p) { return !std::isfinite(p.first) || !std::isfinite(p.second); }),
              out.end());
    return out;
}

std::string plot_csv(const MapDef& map, const CycleRecord& record, const std::vector<std::pair<double, double>>& bg) {
    std::ostringstream os;
    os << "kind,index,x,y\n";
    for (std::size_t i = 0; i < bg.size(); ++i)
        os << "orbit," << i << ',' << format_double(bg[i].first) << ',' << format_double(bg[i].second) << '\n';
    auto cyc = cycle_pairs(map, record);
    for (std::size_t i = 0; i < cyc.size(); ++i)
        os << "cycle," << i << ',' << format_double(cyc[i].first) << ',' << format_double(cyc[i].second) << '\n';
    return os.str();
}

std::string plot_svg(const MapDef& map, const CycleRecord& record, const std::vector<std::pair<double, double>>& bg) {
    const double W = 640, H = 480, L = 60, R = 20, Tm = 40, B = 50;
    auto cyc = cycle_pairs(map, record);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const std::vector<std::pair<double, double>>* set : {&bg, &std::as_const(cyc)})
        for (const auto& [x, y] : *set) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
    x0 -= px, x1 += px, y0 -= py, y1 += py;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    os << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - Tm - B)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"320\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << map.name()
       << " T=" << record.period << "</text>\n";
    os << "<text x=\"" << L << "\" y=\"" << (H - 20) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_double(x0).substr(0, 10) << "</text>\n";
    os << "<text x=\"" << (W - R) << "\" y=\"" << (H - 20)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(x1).substr(0, 10)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << (H - B) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_double(y0).substr(0, 8) << "</text>\n";
    os << "<text x=\"5\" y=\"" << (Tm + 10) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_double(y1).substr(0, 8) << "</text>\n";
    os << "<g fill=\"#999999\">\n";
    for (const auto& [x, y] : bg)
        os << "<circle cx=\"" << format_fixed(sx(x)) << "\" cy=\"" << format_fixed(sy(y)) << "\" r=\"1\"/>\n";
    os << "</g>\n<g fill=\"#d62728\">\n";
    for (const auto& [x, y] : cyc)
        os << "<circle cx=\"" << format_fixed(sx(x)) << "\" cy=\"" << format_fixed(sy(y)) << "\" r=\"3\"/>\n";
    os << "</g>\n</svg>\n";
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

RunSummary run_manifest(const RunManifest& manifest) {
    std::error_code ec;
    std::filesystem::create_directories(manifest.output_dir, ec);
    if (ec || !std::filesystem::is_directory(manifest.output_dir))
        throw IoError("cannot create output directory " + manifest.output_dir.string());

    const std::size_t n = manifest.searches.size();
    RunSummary summary;
    summary.reports.resize(n);
    std::vector<std::vector<std::string>> files(n);
    std::vector<std::string> errors(n);
    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        PrecisionGuard g(manifest.precision);
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            const SearchEntry& e = manifest.searches[i];
            try {
                SearchReport rep = execute_search(e);
                std::vector<std::pair<std::string, std::string>> out;
                out.emplace_back(e.label + ".json", search_report_to_json(rep));
                for (std::size_t k = 0; k < rep.cycles.size(); ++k) {
                    const CycleRecord& c = rep.cycles[k].record;
                    if (!c.verified) continue;
                    std::string stem = e.label + "-cycle" + std::to_string(c.initial_index);
                    out.emplace_back(stem + ".csv", cycle_to_csv(c));
                    if (manifest.emit_plots) {
                        auto bg = background_orbit(e.config.map, e.config.initial_states, e.config.period);
                        out.emplace_back(stem + "-plot.csv", plot_csv(e.config.map, c, bg));
                        out.emplace_back(stem + ".svg", plot_svg(e.config.map, c, bg));
                    }
                }
                std::lock_guard<std::mutex> lock(io_mutex);
                for (const auto& [name, text] : out) {
                    write_text_file(manifest.output_dir / name, text);
                    files[i].push_back(name);
                }
                summary.reports[i] = std::move(rep);
            } catch (const IoError&) {
                throw;
            } catch (const Error& ex) {
                errors[i] = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(manifest.jobs), std::max<std::size_t>(n, 1));
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            try {
                work();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    ojson sj;
    sj["precision"] = manifest.precision;
    sj["stop_on_first"] = manifest.stop_on_first;
    ojson list = ojson::array();
    int code = kExitOk;
    for (std::size_t i = 0; i < n; ++i) {
        const SearchEntry& e = manifest.searches[i];
        const SearchReport& r = summary.reports[i];
        ojson item;
        item["label"] = e.label;
        item["map"] = e.config.map.name();
        item["period"] = e.config.period;
        item["scheme"] = scheme_name(e.config.scheme);
        if (!errors[i].empty()) {
            item["status"] = "error";
            item["error"] = errors[i];
            code = std::max(code, static_cast<int>(kExitDivergence));
        } else {
            item["status"] = r.status;
            if (r.status == "divergence") code = std::max(code, static_cast<int>(kExitDivergence));
            ojson cyc = ojson::array();
            for (const auto& c : r.cycles) {
                if (!c.record.verified) continue;
                cyc.push_back({{"initial_index", c.record.initial_index},
                               {"sweep", c.record.sweep},
                               {"minimal_period", c.record.minimal_period},
                               {"x", c.record.points[0][0].to_short_string(30)},
                               {"verdict", verdict_name(c.report.verdict)}});
            }
            item["cycles"] = cyc;
        }
        item["files"] = files[i];
        for (const auto& f : files[i]) summary.files.push_back(f);
        list.push_back(item);
    }
    sj["searches"] = list;
    sj["exit_code"] = code;
    write_text_file(manifest.output_dir / "summary.json", sj.dump(2) + "\n");
    summary.files.push_back("summary.json");
    summary.exit_code = code;
    return summary;
}

}  // namespace cyclestab
