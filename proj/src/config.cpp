#include "lstrack/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <type_traits>

#include "lstrack/error.hpp"

extern char** environ;

namespace lstrack {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    fail(ErrorKind::ConfigError, path + ": " + what);
}

void read_value(const json& j, double& out, const std::string& path) {
    if (!j.is_number()) config_fail(path, "expected a number");
    out = j.get<double>();
}

void read_value(const json& j, int& out, const std::string& path) {
    if (!j.is_number_integer()) config_fail(path, "expected an integer");
    out = j.get<int>();
}

void read_value(const json& j, long& out, const std::string& path) {
    if (!j.is_number_integer()) config_fail(path, "expected an integer");
    out = j.get<long>();
}

template <class T>
    requires(std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
void read_value(const json& j, T& out, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) config_fail(path, "expected a non-negative integer");
    out = j.get<T>();
}

void read_value(const json& j, bool& out, const std::string& path) {
    if (!j.is_boolean()) config_fail(path, "expected true or false");
    out = j.get<bool>();
}

void read_value(const json& j, std::string& out, const std::string& path) {
    if (!j.is_string()) config_fail(path, "expected a string");
    out = j.get<std::string>();
}

void read_value(const json& j, MegpcRule& out, const std::string& path) {
    std::string s;
    read_value(j, s, path);
    if (s == "gauss") {
        out = MegpcRule::Gauss;
    } else if (s == "uniform") {
        out = MegpcRule::Uniform;
    } else {
        config_fail(path, "expected \"gauss\" or \"uniform\"");
    }
}

template <class T>
void read_value(const json& j, std::vector<T>& out, const std::string& path) {
    if (!j.is_array()) config_fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
        T v{};
        read_value(j[i], v, path + "[" + std::to_string(i) + "]");
        out.push_back(v);
    }
}

json write_value(const MegpcRule& r) { return r == MegpcRule::Gauss ? "gauss" : "uniform"; }
template <class T>
json write_value(const T& v) {
    return v;
}

// One field list per struct, shared by parsing and serialization.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) config_fail(path_.empty() ? "config" : path_, "expected an object");
    }
    template <class T>
    void operator()(const char* key, T& field) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it != j_.end()) read_value(*it, field, child(key));
    }
    // Marks a key handled elsewhere.
    void skip(const char* key) { seen_.insert(key); }
    std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) config_fail(path_.empty() ? key : path_ + "." + key, "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

class Writer {
public:
    explicit Writer(json& j) : j_(j) {}
    template <class T>
    void operator()(const char* key, const T& field) {
        j_[key] = write_value(field);
    }

private:
    json& j_;
};

template <class V, class C>
void fields_burgers(V& v, C& c) {
    v("a", c.a);
    v("b", c.b);
    v("sigma_left", c.sigma_left);
    v("sigma_right", c.sigma_right);
    v("c", c.c);
    v("x0", c.x0);
    v("x_query", c.x_query);
    v("t_query", c.t_query);
}

template <class V, class C>
void fields_co2(V& v, C& c) {
    v("domain_length", c.domain_length);
    v("cells", c.cells);
    v("cfl", c.cfl);
    v("porosity", c.porosity);
    v("s_br", c.s_br);
    v("s_cr", c.s_cr);
    v("slope", c.slope);
    v("injection_years", c.injection_years);
    v("t_final", c.t_final);
    v("x_query", c.x_query);
    v("x_inject", c.x_inject);
    v("plume_height", c.plume_height);
    v("plume_half_width", c.plume_half_width);
    v("plume_ramp", c.plume_ramp);
    v("lambda_c_lo", c.lambda_c_lo);
    v("lambda_c_hi", c.lambda_c_hi);
    v("lambda_b_lo", c.lambda_b_lo);
    v("lambda_b_hi", c.lambda_b_hi);
    v("perm_mean", c.perm_mean);
    v("perm_std", c.perm_std);
    v("k_scale", c.k_scale);
    v("q_mean", c.q_mean);
    v("q_scale", c.q_scale);
    v("cdf_clip", c.cdf_clip);
}

template <class V, class C>
void fields_model(V& v, C& m) {
    if (m.name == "burgers" || m.name == "burgers_fv") fields_burgers(v, m.burgers);
    if (m.name == "burgers_fv") {
        v("cells", m.fv_cells);
        v("cfl", m.fv.cfl);
        v("second_order", m.fv.second_order);
    }
    if (m.name == "co2") fields_co2(v, m.co2);
    if (m.name == "blackbox") {
        v("command", m.command);
        v("dim", m.dim);
        v("work_dir", m.work_dir);
    }
}

template <class V, class C>
void fields_tracker(V& v, C& t) {
    v("m0", t.m0);
    v("band_tol", t.band_tol);
    v("seed_center", t.seed_center);
    v("seed_radius", t.seed_radius);
    v("gamma", t.gamma);
    v("epsilon_factor", t.epsilon_factor);
    v("cfl", t.evolve.cfl);
    v("lock_window", t.evolve.lock_window);
    v("max_steps", t.evolve.max_steps);
    v("use_curvature", t.evolve.use_curvature);
    v("tvd_rk2", t.evolve.tvd_rk2);
}

template <class V, class C>
void fields_megpc(V& v, C& m) {
    v("rule", m.rule);
    v("theta2", m.theta2);
    v("alpha", m.alpha);
    v("max_elements", m.max_elements);
}

template <class V, class C>
void fields_tessellation(V& v, C& t) {
    v("coarse_n", t.coarse_n);
    v("min_sep_factor", t.min_sep_factor);
    v("max_sweeps", t.max_sweeps);
    v("split_mixed", t.split_mixed);
}

template <class V, class C>
void fields_lad(V& v, C& l) {
    v("eps_qr", l.eps_qr);
    v("abs_tol", l.abs_tol);
    v("rel_tol", l.rel_tol);
    v("max_iter", l.max_iter);
    v("relaxation", l.relaxation);
    v("polish_every", l.polish_every);
}

template <class V, class C>
void fields_regression(V& v, C& r) {
    v("eps_svd", r.eps_svd);
    v("repair", r.repair);
    v("jump_floor", r.jump_floor);
}

template <class V, class C>
void fields_metrics(V& v, C& m) {
    v("grid_m", m.grid_m);
    v("refine", m.refine);
    v("mc_samples", m.mc_samples);
}

template <class V, class C>
void fields_sweep(V& v, C& s) {
    v("levels", s.levels);
    v("orders", s.orders);
    v("solvers", s.solvers);
    v("classifiers", s.classifiers);
    v("theta1", s.theta1);
}

template <class F, class C>
void read_section(const json& root, Reader& parent, const char* key, C& target, F fields) {
    parent.skip(key);
    const auto it = root.find(key);
    if (it == root.end()) return;
    Reader r(*it, parent.child(key));
    fields(r, target);
    r.finish();
}

ModelSpec read_model(const json& j, const std::string& path) {
    ModelSpec m;
    Reader r(j, path);
    r("name", m.name);
    const auto names = model_names();
    if (std::find(names.begin(), names.end(), m.name) == names.end()) {
        config_fail(path + ".name", "unknown model \"" + m.name + "\"");
    }
    fields_model(r, m);
    r.finish();
    return m;
}

json write_model(const ModelSpec& m) {
    json j;
    j["name"] = m.name;
    Writer w(j);
    fields_model(w, m);
    return j;
}

void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) config_fail(path, what);
}

void validate(const ExperimentConfig& c) {
    check(c.schema_version == kSchemaVersion, "schema_version",
          "unsupported schema version " + std::to_string(c.schema_version));
    check(!c.id.empty(), "id", "must not be empty");
    check(c.method == "megpc" || c.method == "sop" || c.method == "fgpc", "method",
          "expected megpc, sop or fgpc");
    check(c.workers >= 1, "workers", "must be >= 1");
    check(c.tracker.m0 >= 3, "tracker.m0", "must be >= 3");
    check(c.tracker.band_tol > 0.0, "tracker.band_tol", "must be positive");
    check(c.tracker.seed_radius > 0.0, "tracker.seed_radius", "must be positive");
    check(c.tracker.evolve.lock_window >= 1, "tracker.lock_window", "must be >= 1");
    check(c.megpc.alpha > 0.0 && c.megpc.alpha < 1.0, "megpc.alpha", "must lie in (0, 1)");
    check(c.megpc.theta2 > 0.0 && c.megpc.theta2 < 1.0, "megpc.theta2", "must lie in (0, 1)");
    check(c.tessellation.coarse_n >= 1, "tessellation.coarse_n", "must be >= 1");
    check(c.tessellation.min_sep_factor > 0.0, "tessellation.min_sep_factor", "must be positive");
    check(c.regression.eps_svd >= 0.0, "regression.eps_svd", "must be >= 0");
    check(c.regression.jump_floor >= 0.0, "regression.jump_floor", "must be >= 0");
    check(c.metrics.grid_m >= 2, "metrics.grid_m", "must be >= 2");
    check(c.metrics.refine == 0 || c.metrics.refine == 1, "metrics.refine", "must be 0 or 1");
    check(!c.sweep.levels.empty() && !c.sweep.orders.empty() && !c.sweep.solvers.empty() &&
              !c.sweep.classifiers.empty() && !c.sweep.theta1.empty(),
          "sweep", "lists must not be empty");
    for (int l : c.sweep.levels) check(l >= 1, "sweep.levels", "levels must be >= 1");
    for (int n : c.sweep.orders) check(n >= 0 && n <= 30, "sweep.orders", "orders must lie in [0, 30]");
    for (const auto& s : c.sweep.solvers) check(s == "lad" || s == "ols", "sweep.solvers", "expected lad or ols");
    for (const auto& s : c.sweep.classifiers) {
        check(s == "computed" || s == "exact", "sweep.classifiers", "expected computed or exact");
    }
    for (double t : c.sweep.theta1) check(t > 0.0, "sweep.theta1", "must be positive");
    if (c.method == "megpc") {
        for (int n : c.sweep.orders) check(n >= 1, "sweep.orders", "ME-gPC needs N >= 1");
    }
}

}  // namespace

std::vector<std::string> model_names() { return {"burgers", "burgers_fv", "co2", "blackbox"}; }

std::unique_ptr<ForwardModel> make_model(const ModelSpec& spec) {
    if (spec.name == "burgers") return std::make_unique<BurgersExactModel>(spec.burgers);
    if (spec.name == "burgers_fv") return std::make_unique<BurgersFvModel>(spec.burgers, spec.fv_cells, spec.fv);
    if (spec.name == "co2") return std::make_unique<CO2Model>(spec.co2);
    if (spec.name == "blackbox") return std::make_unique<BlackBoxModel>(spec.command, spec.dim, spec.work_dir);
    fail(ErrorKind::ConfigError, "unknown model \"" + spec.name + "\"");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    Reader r(j, "");
    r("schema_version", c.schema_version);
    r("id", c.id);
    r("method", c.method);
    r("seed", c.seed);
    r("workers", c.workers);
    r("dumps", c.dumps);
    r.skip("model");
    if (j.contains("model")) c.model = read_model(j["model"], "model");
    r.skip("reference_model");
    if (j.contains("reference_model")) {
        c.reference_model = read_model(j["reference_model"], "reference_model");
        c.has_reference_model = true;
    }
    read_section(j, r, "tracker", c.tracker, [](Reader& v, TrackerConfig& t) { fields_tracker(v, t); });
    read_section(j, r, "megpc", c.megpc, [](Reader& v, MegpcConfig& m) { fields_megpc(v, m); });
    read_section(j, r, "tessellation", c.tessellation,
                 [](Reader& v, TessellationConfig& t) { fields_tessellation(v, t); });
    r.skip("regression");
    if (j.contains("regression")) {
        Reader rr(j["regression"], "regression");
        fields_regression(rr, c.regression);
        read_section(j["regression"], rr, "lad", c.regression.lad, [](Reader& v, LadOptions& l) { fields_lad(v, l); });
        rr.finish();
    }
    read_section(j, r, "metrics", c.metrics, [](Reader& v, MetricConfig& m) { fields_metrics(v, m); });
    read_section(j, r, "sweep", c.sweep, [](Reader& v, SweepConfig& s) { fields_sweep(v, s); });
    r.finish();
    validate(c);
    // Worker counts propagate to every module.
    c.tracker.workers = c.workers;
    c.tracker.evolve.workers = c.workers;
    c.megpc.workers = c.workers;
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["id"] = c.id;
    j["method"] = c.method;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["dumps"] = c.dumps;
    j["model"] = write_model(c.model);
    if (c.has_reference_model) j["reference_model"] = write_model(c.reference_model);
    auto section = [&](const char* key, auto fields) {
        json s = json::object();
        Writer w(s);
        fields(w);
        j[key] = s;
    };
    section("tracker", [&](Writer& w) { fields_tracker(w, c.tracker); });
    section("megpc", [&](Writer& w) { fields_megpc(w, c.megpc); });
    section("tessellation", [&](Writer& w) { fields_tessellation(w, c.tessellation); });
    section("regression", [&](Writer& w) { fields_regression(w, c.regression); });
    json lad = json::object();
    Writer wl(lad);
    fields_lad(wl, c.regression.lad);
    j["regression"]["lad"] = lad;
    section("metrics", [&](Writer& w) { fields_metrics(w, c.metrics); });
    section("sweep", [&](Writer& w) { fields_sweep(w, c.sweep); });
    return j;
}

void apply_env_overrides(json& j, const std::map<std::string, std::string>& env) {
    for (const auto& [name, raw] : env) {
        std::string key = name;
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
        std::vector<std::string> parts;
        std::size_t pos = 0;
        for (;;) {
            const std::size_t next = key.find("__", pos);
            parts.push_back(key.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
            if (next == std::string::npos) break;
            pos = next + 2;
        }
        json* node = &j;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (!node->is_object()) config_fail(name, "override path crosses a non-object value");
            node = &(*node)[parts[i]];
            if (node->is_null()) *node = json::object();
        }
        if (!node->is_object()) config_fail(name, "override path crosses a non-object value");
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        (*node)[parts.back()] = value;
    }
}

std::map<std::string, std::string> environment_with_prefix(const std::string& prefix) {
    std::map<std::string, std::string> out;
    for (char** e = environ; e && *e; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq == std::string::npos || entry.compare(0, prefix.size(), prefix) != 0) continue;
        out[entry.substr(prefix.size(), eq - prefix.size())] = entry.substr(eq + 1);
    }
    return out;
}

ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& env) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, "cannot open config file " + path);
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) fail(ErrorKind::ConfigError, path + ": not valid JSON");
    apply_env_overrides(j, env);
    return config_from_json(j);
}

}  // namespace lstrack
