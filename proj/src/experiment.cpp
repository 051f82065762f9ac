#include "lstrack/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "lstrack/adaptive_tracker.hpp"
#include "lstrack/analytics.hpp"
#include "lstrack/error.hpp"
#include "lstrack/megpc_adaptive.hpp"
#include "lstrack/parallel.hpp"

namespace lstrack {

namespace fs = std::filesystem;
using nlohmann::json;

Solver parse_solver(const std::string& s) {
    if (s == "ols") return Solver::Ols;
    if (s == "lad") return Solver::Lad;
    fail(ErrorKind::ConfigError, "unknown solver \"" + s + "\"");
}

RegressionReport regress(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, Solver solver,
                         const RegressionConfig& rc, std::string* warning) {
    if (solver == Solver::Ols) return solve_ols_tsvd(psi, u, rc.eps_svd);
    try {
        return solve_lad(psi, u, rc.lad);
    } catch (const RegressionFailure& e) {
        if (warning) *warning = e.what();
        return e.best();
    }
}

// ---------------------------------------------------------------------------
// SOP

double SopSurrogate::mean() const {
    double m = 0.0;
    for (std::size_t s = 0; s < bases.size(); ++s) {
        if (active[s]) m += bases[s].probability() * coeffs[s][0];
    }
    return m;
}

double SopSurrogate::variance() const {
    double second = 0.0;
    for (std::size_t s = 0; s < bases.size(); ++s) {
        if (active[s]) second += bases[s].probability() * coeffs[s].squaredNorm();
    }
    const double m = mean();
    return std::max(0.0, second - m * m);
}

std::vector<double> SopSurrogate::evaluate(const StochasticGrid& target) const {
    if (target == grid) return fitted;
    const SimplexLocator locator(mesh);
    std::vector<double> out(target.size());
    std::vector<double> xi(static_cast<std::size_t>(target.dim()));
    std::vector<int> idx(static_cast<std::size_t>(target.dim()));
    for (std::size_t i = 0; i < target.size(); ++i) {
        target.point(i, xi);
        const std::size_t s = locator.locate(xi);
        if (active[s]) {
            std::vector<double> psi(bases[s].size());
            bases[s].eval_all(xi, psi);
            out[i] = Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()))
                         .dot(coeffs[s]);
        } else {
            for (int k = 0; k < grid.dim(); ++k) {
                idx[k] = std::clamp(static_cast<int>(std::lround((xi[k] + 1.0) / grid.spacing(k))), 0,
                                    grid.points(k) - 1);
            }
            out[i] = cache_values[grid.flat_index(idx)];
        }
    }
    return out;
}

SopSurrogate fit_sop(SimplexMesh mesh, const ModelEvaluationCache& cache, int order, Solver solver,
                     const RegressionConfig& rc, int workers) {
    require(order >= 0, ErrorKind::InvalidArgument, "order must be >= 0");
    require(mesh.points.size() == mesh.size(), ErrorKind::MissingData, "mesh points are not assigned");
    SopSurrogate sur;
    sur.grid = cache.grid();
    sur.cache_values.assign(cache.values().begin(), cache.values().end());
    const std::size_t n = mesh.size();
    sur.bases.resize(n);
    sur.coeffs.resize(n);
    sur.active.assign(n, 0);
    sur.fitted.assign(cache.size(), 0.0);
    std::vector<std::string> warn(n);
    const int d = mesh.dim;
    parallel_for(n, workers, [&](std::size_t s) {
        const auto& pts = mesh.points[s];
        if (pts.empty()) return;
        int N = order;
        while (N > 0 && count_basis(N, d) >= pts.size()) --N;
        SimplexBasis basis(mesh.simplex_vertices(s), N);
        Eigen::MatrixXd psi(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(basis.size()));
        Eigen::VectorXd u(static_cast<Eigen::Index>(pts.size()));
        std::vector<double> xi(static_cast<std::size_t>(d));
        std::vector<double> row(basis.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cache.grid().point(pts[i], xi);
            basis.eval_all(xi, row);
            for (std::size_t j = 0; j < row.size(); ++j) {
                psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
            }
            u[static_cast<Eigen::Index>(i)] = cache.value(pts[i]);
        }
        // A single point cannot support a null-space problem.
        const Solver use = pts.size() > basis.size() ? solver : Solver::Ols;
        std::string w;
        const RegressionReport rep = regress(psi, u, use, rc, &w);
        if (!w.empty()) warn[s] = "simplex " + std::to_string(s) + ": " + w;
        const Eigen::VectorXd fit = psi * rep.coeffs;
        for (std::size_t i = 0; i < pts.size(); ++i) sur.fitted[pts[i]] = fit[static_cast<Eigen::Index>(i)];
        sur.coeffs[s] = rep.coeffs;
        sur.bases[s] = std::move(basis);
        sur.active[s] = 1;
    });
    for (auto& w : warn) {
        if (!w.empty()) sur.warnings.push_back(std::move(w));
    }
    sur.mesh = std::move(mesh);
    return sur;
}

// ---------------------------------------------------------------------------
// Frames

double FrameSurrogate::evaluate(std::span<const double> xi, int label) const {
    std::vector<double> psi(frames.size());
    frames.eval_all(xi, label, psi);
    return Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size())).dot(coeffs);
}

namespace {

Eigen::MatrixXd frame_design(const StochasticGrid& grid, const FrameSet& frames) {
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(frames.size()));
    std::vector<double> xi(static_cast<std::size_t>(grid.dim()));
    std::vector<double> row(frames.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, xi);
        frames.eval_all(xi, frames.labels[i], row);
        for (std::size_t j = 0; j < row.size(); ++j) {
            psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    }
    return psi;
}

}  // namespace

FrameSurrogate fit_frames(const ModelEvaluationCache& cache, std::vector<std::int8_t> labels, int order,
                          Solver solver, const RegressionConfig& rc) {
    require(cache.complete(), ErrorKind::MissingData, "frame regression needs a complete cache");
    const auto& grid = cache.grid();
    const GpcBasis gpc(grid.dim(), order);
    const Eigen::Map<const Eigen::VectorXd> u(cache.values().data(), static_cast<Eigen::Index>(cache.size()));

    FrameSurrogate sur;
    sur.frames = build_frames(labels, gpc, grid);
    Eigen::MatrixXd psi = frame_design(grid, sur.frames);
    sur.report = regress(psi, u, solver, rc);

    if (rc.repair) {
        const double floor =
            rc.jump_floor > 0.0 ? rc.jump_floor : estimate_jump_floor(grid, cache.values(), labels);
        if (floor > 0.0) {
            const auto flip = repair_misclassified(sur.report, floor);
            long plus = 0;
            for (auto l : labels) plus += l > 0 ? 1 : 0;
            for (std::size_t i : flip) plus += labels[i] > 0 ? -1 : 1;
            // Keep both regions populated.
            if (!flip.empty() && plus > 0 && plus < static_cast<long>(labels.size())) {
                for (std::size_t i : flip) labels[i] = static_cast<std::int8_t>(-labels[i]);
                sur.frames = build_frames(labels, gpc, grid);
                psi = frame_design(grid, sur.frames);
                sur.report = regress(psi, u, solver, rc);
                sur.report.reassigned = flip;
                sur.repaired = flip.size();
            }
        }
    }
    sur.coeffs = sur.report.coeffs;
    const Eigen::VectorXd fit = psi * sur.coeffs;
    sur.fitted.assign(fit.data(), fit.data() + fit.size());
    return sur;
}

// ---------------------------------------------------------------------------
// Metrics CSV

std::string metrics_header() {
    return "experiment_id,method,N,P,N_ev,eps_l1,eps_mu,eps_sigma,levels,n_elements,p,solver,classifier,theta1";
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

double parse_num(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_row(const MetricsRow& r) {
    std::ostringstream os;
    os << r.experiment_id << ',' << r.method << ',' << r.order << ',' << r.basis_size << ',' << r.n_ev << ','
       << num(r.eps_l1) << ',' << num(r.eps_mu) << ',' << num(r.eps_sigma) << ',' << r.levels << ','
       << r.n_elements << ',' << num(r.p) << ',' << r.solver << ',' << r.classifier << ',' << num(r.theta1);
    return os.str();
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << metrics_header() << '\n';
    for (const auto& r : rows) os << format_row(r) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::MissingData, "metrics CSV is empty");
    require(split_csv(line) == split_csv(metrics_header()), ErrorKind::InvalidArgument,
            "unexpected metrics CSV header");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        require(f.size() == 14, ErrorKind::InvalidArgument, "malformed metrics CSV row");
        MetricsRow r;
        r.experiment_id = f[0];
        r.method = f[1];
        r.order = std::stoi(f[2]);
        r.basis_size = std::stoul(f[3]);
        r.n_ev = std::stoul(f[4]);
        r.eps_l1 = parse_num(f[5]);
        r.eps_mu = parse_num(f[6]);
        r.eps_sigma = parse_num(f[7]);
        r.levels = std::stoi(f[8]);
        r.n_elements = std::stoul(f[9]);
        r.p = parse_num(f[10]);
        r.solver = f[11];
        r.classifier = f[12];
        r.theta1 = parse_num(f[13]);
        rows.push_back(r);
    }
    return rows;
}

std::map<std::string, std::string> emit_plot_data(const std::vector<MetricsRow>& rows) {
    std::map<std::string, std::string> out;
    {
        std::ostringstream os;
        os << "series,solver,classifier,N,N_ev,eps_l1\n";
        for (const auto& r : rows) {
            if (r.method != "F-gPC") continue;
            os << r.solver << '/' << r.classifier << ',' << r.solver << ',' << r.classifier << ',' << r.order << ','
               << r.n_ev << ',' << num(r.eps_l1) << '\n';
        }
        out["fgpc_series.csv"] = os.str();
    }
    {
        std::set<int> orders;
        std::map<int, const MetricsRow*> by_level;
        std::map<std::pair<int, std::string>, double> cell;  // (levels, "N<n>_<SOLVER>")
        for (const auto& r : rows) {
            if (r.method != "SOP") continue;
            orders.insert(r.order);
            by_level.emplace(r.levels, &r);
            std::string solver = r.solver;
            std::transform(solver.begin(), solver.end(), solver.begin(), ::toupper);
            cell[{r.levels, "N" + std::to_string(r.order) + "_" + solver}] = r.eps_l1;
        }
        std::ostringstream os;
        os << "levels,elements,N_ev,p";
        for (int n : orders) os << ",N" << n << "_LAD,N" << n << "_OLS";
        os << '\n';
        for (const auto& [levels, r] : by_level) {
            os << levels << ',' << r->n_elements << ',' << r->n_ev << ',' << num(r->p);
            for (int n : orders) {
                for (const char* s : {"_LAD", "_OLS"}) {
                    const auto it = cell.find({levels, "N" + std::to_string(n) + s});
                    os << ',' << (it == cell.end() ? "" : num(it->second));
                }
            }
            os << '\n';
        }
        out["sop_table.csv"] = os.str();
    }
    {
        std::ostringstream os;
        os << "theta1,elements,N_ev,eps_l1,eps_mu,eps_sigma\n";
        for (const auto& r : rows) {
            if (r.method != "ME-gPC") continue;
            os << num(r.theta1) << ',' << r.n_elements << ',' << r.n_ev << ',' << num(r.eps_l1) << ','
               << num(r.eps_mu) << ',' << num(r.eps_sigma) << '\n';
        }
        out["megpc_table.csv"] = os.str();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

class RunDir {
public:
    RunDir(const std::string& root, const std::string& id) {
        const fs::path base = fs::path(root) / id;
        fs::create_directories(base);
        for (int k = 1;; ++k) {
            std::ostringstream name;
            name << "run-" << std::setw(4) << std::setfill('0') << k;
            const fs::path p = base / name.str();
            if (fs::create_directory(p)) {
                path_ = p;
                break;
            }
        }
    }
    const fs::path& path() const { return path_; }

    std::ofstream open(const std::string& name) {
        require(std::find(files_.begin(), files_.end(), name) == files_.end(), ErrorKind::InvalidArgument,
                "output file written twice: " + name);
        files_.push_back(name);
        std::ofstream os(path_ / name);
        require(static_cast<bool>(os), ErrorKind::InvalidArgument, "cannot write " + (path_ / name).string());
        return os;
    }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path path_;
    std::vector<std::string> files_;
};

class Events {
public:
    Events(std::ofstream os, std::ostream* echo) : os_(std::move(os)), echo_(echo) {}
    void emit(const json& j) {
        os_ << j.dump() << '\n';
        os_.flush();
        if (echo_) *echo_ << j.dump() << '\n';
    }

private:
    std::ofstream os_;
    std::ostream* echo_;
};

std::vector<double> evaluate_on(const ForwardModel& model, const StochasticGrid& grid, int workers) {
    std::vector<double> out(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t i) { out[i] = model.evaluate(grid.point(i)); });
    return out;
}

std::string method_label(const std::string& m) {
    if (m == "megpc") return "ME-gPC";
    if (m == "sop") return "SOP";
    return "F-gPC";
}

struct Reference {
    const ForwardModel* model = nullptr;
    bool has_moments = false;
    MonteCarloStats mc;
};

void fill_errors(MetricsRow& row, std::span<const double> surrogate, std::span<const double> ref,
                 const StochasticGrid& grid, double mean, double variance, const Reference& reference) {
    row.eps_l1 = rel_l1_error(surrogate, ref, grid);
    row.eps_mu = std::numeric_limits<double>::quiet_NaN();
    row.eps_sigma = std::numeric_limits<double>::quiet_NaN();
    if (reference.has_moments) {
        const auto e = rel_moment_errors(mean, std::sqrt(std::max(variance, 0.0)), reference.mc.mean,
                                         reference.mc.stddev);
        row.eps_mu = e.mean;
        row.eps_sigma = e.stddev;
    }
}

bool has_indicator(const ModelSpec& spec) { return spec.name == "burgers" || spec.name == "burgers_fv"; }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_root, std::ostream* log) {
    RunDir dir(out_root, cfg.id);
    ExperimentResult result;
    result.run_dir = dir.path().string();
    const auto started = std::chrono::system_clock::now();
    std::string status = "ok";
    std::string error;
    std::exception_ptr failure;

    try {
        dir.open("config.json") << config_to_json(cfg).dump(2) << '\n';
        Events events(dir.open("events.jsonl"), log);

        const auto model = make_model(cfg.model);
        const int d = model->dim();
        std::unique_ptr<ForwardModel> ref_owner;
        Reference reference;
        if (cfg.has_reference_model) {
            ref_owner = make_model(cfg.reference_model);
            require(ref_owner->dim() == d, ErrorKind::ConfigError, "reference model dimension differs");
            reference.model = ref_owner.get();
        } else if (model->known_exact()) {
            reference.model = model.get();
        }
        require(reference.model != nullptr, ErrorKind::ConfigError,
                "model has no exact solution; set reference_model");
        if (cfg.metrics.mc_samples > 0) {
            reference.mc = monte_carlo_reference(*reference.model, cfg.metrics.mc_samples, cfg.seed, cfg.workers);
            reference.has_moments = true;
            events.emit({{"event", "monte_carlo"},
                         {"samples", reference.mc.samples},
                         {"mean", reference.mc.mean},
                         {"stddev", reference.mc.stddev},
                         {"se_mean", reference.mc.se_mean},
                         {"se_stddev", reference.mc.se_stddev}});
        }

        auto push = [&](MetricsRow row) {
            row.experiment_id = cfg.id;
            events.emit({{"event", "metrics"}, {"row", format_row(row)}});
            result.rows.push_back(std::move(row));
        };

        if (cfg.method == "megpc") {
            StochasticGrid grid = build_grid(StochasticDomain::uniform(d), cfg.metrics.grid_m);
            if (cfg.metrics.refine) grid = refine_grid(grid);
            const auto ref = evaluate_on(*reference.model, grid, cfg.workers);
            for (int order : cfg.sweep.orders) {
                for (double theta : cfg.sweep.theta1) {
                    MegpcConfig mc = cfg.megpc;
                    mc.order = order;
                    mc.theta1 = theta;
                    const auto res = run_adaptive_megpc(*model, mc);
                    for (const auto& w : res.warnings) result.warnings.push_back(w);
                    std::vector<double> s(grid.size());
                    parallel_for(grid.size(), cfg.workers, [&](std::size_t i) { s[i] = res.evaluate(grid.point(i)); });
                    MetricsRow row;
                    row.method = "ME-gPC";
                    row.order = order;
                    row.basis_size = res.basis.size();
                    row.n_ev = res.n_ev;
                    row.n_elements = res.leaves.size();
                    row.p = std::numeric_limits<double>::quiet_NaN();
                    row.solver = "ols";
                    row.classifier = "none";
                    row.theta1 = theta;
                    fill_errors(row, s, ref, grid, res.mean, res.variance, reference);
                    push(row);
                }
            }
        } else {
            for (int levels : cfg.sweep.levels) {
                TrackerConfig tc = cfg.tracker;
                tc.levels = levels;
                const std::string tag = "_L" + std::to_string(levels);
                std::ofstream tlog = dir.open("tracker" + tag + ".jsonl");
                const TrackerResult tr = run_tracker(*model, tc, &tlog);
                for (const auto& w : tr.warnings) result.warnings.push_back(w);
                const auto& rec = tr.records.back();
                const auto& tgrid = tr.cache.grid();
                const auto crossings = zero_crossing_points(tr.field);
                events.emit({{"event", "tracker"},
                             {"levels", levels},
                             {"m", rec.m},
                             {"N_ev_high_cum", rec.n_ev_high},
                             {"p", rec.p},
                             {"crossings", crossings.size()}});
                if (cfg.dumps) {
                    auto field_out = dir.open("field" + tag + ".csv");
                    write_field_csv(field_out, tr.field);
                    auto crossings_out = dir.open("crossings" + tag + ".csv");
                    write_crossings_csv(crossings_out, crossings);
                    auto cache_out = dir.open("cache" + tag + ".csv");
                    write_grid_csv(cache_out, tr.cache);
                }

                StochasticGrid mgrid = tgrid;
                if (cfg.metrics.refine) mgrid = refine_grid(tgrid);
                const auto ref = evaluate_on(*reference.model, mgrid, cfg.workers);

                MetricsRow base;
                base.method = method_label(cfg.method);
                base.n_ev = rec.n_ev_high;
                base.levels = levels;
                base.p = rec.p;
                base.theta1 = std::numeric_limits<double>::quiet_NaN();

                if (cfg.method == "sop") {
                    RefineStats rs;
                    SimplexMesh mesh = refine_by_levelset(
                        initial_mesh(d, cfg.tessellation.coarse_n), tr.field,
                        cfg.tessellation.min_sep_factor * tgrid.spacing(), cfg.tessellation.max_sweeps, &rs,
                        cfg.tessellation.split_mixed);
                    std::size_t empty = 0;
                    for (const auto& p : mesh.points) empty += p.empty() ? 1 : 0;
                    events.emit({{"event", "tessellation"},
                                 {"levels", levels},
                                 {"simplices", mesh.size()},
                                 {"empty", empty},
                                 {"sweeps", rs.sweeps},
                                 {"inserted", rs.inserted}});
                    if (cfg.dumps) {
                        auto vout = dir.open("mesh_vertices" + tag + ".csv");
                        auto sout = dir.open("mesh_simplices" + tag + ".csv");
                        write_mesh_csv(vout, sout, mesh);
                    }
                    for (int order : cfg.sweep.orders) {
                        for (const auto& solver : cfg.sweep.solvers) {
                            const auto sur = fit_sop(mesh, tr.cache, order, parse_solver(solver), cfg.regression,
                                                     cfg.workers);
                            for (const auto& w : sur.warnings) result.warnings.push_back(w);
                            const auto s = sur.evaluate(mgrid);
                            MetricsRow row = base;
                            row.order = order;
                            row.basis_size = count_basis(order, d);
                            row.n_elements = mesh.size();
                            row.solver = solver;
                            row.classifier = "computed";
                            fill_errors(row, s, ref, mgrid, sur.mean(), sur.variance(), reference);
                            push(row);
                        }
                    }
                } else {
                    for (const auto& classifier : cfg.sweep.classifiers) {
                        const bool exact = classifier == "exact";
                        require(!exact || has_indicator(cfg.model), ErrorKind::ConfigError,
                                "exact classifier needs a model with a known discontinuity indicator");
                        auto classify = [&](std::span<const double> xi) -> std::int8_t {
                            if (exact) return burgers_discontinuity_indicator(cfg.model.burgers, xi) >= 0.0 ? -1 : 1;
                            return interpolate_multilinear(tr.field.grid, tr.field.phi, xi) >= 0.0 ? 1 : -1;
                        };
                        std::vector<std::int8_t> labels(tgrid.size());
                        for (std::size_t i = 0; i < tgrid.size(); ++i) {
                            labels[i] = exact ? classify(tgrid.point(i)) : (tr.field.phi[i] >= 0.0 ? 1 : -1);
                        }
                        for (int order : cfg.sweep.orders) {
                            for (const auto& solver : cfg.sweep.solvers) {
                                const auto sur =
                                    fit_frames(tr.cache, labels, order, parse_solver(solver), cfg.regression);
                                std::vector<double> s;
                                if (mgrid == tgrid) {
                                    s = sur.fitted;
                                } else {
                                    s.resize(mgrid.size());
                                    for (std::size_t i = 0; i < mgrid.size(); ++i) {
                                        const auto xi = mgrid.point(i);
                                        s[i] = sur.evaluate(xi, classify(xi));
                                    }
                                }
                                const auto [mean, var] = sur.statistics();
                                MetricsRow row = base;
                                row.order = order;
                                row.basis_size = count_basis(order, d);
                                row.n_elements = 2;
                                row.solver = solver;
                                row.classifier = classifier;
                                fill_errors(row, s, ref, mgrid, mean, var, reference);
                                push(row);
                                if (sur.repaired) {
                                    events.emit({{"event", "repair"}, {"order", order}, {"flipped", sur.repaired}});
                                }
                            }
                        }
                    }
                }
            }
        }

        auto metrics_out = dir.open("metrics.csv");
        write_metrics_csv(metrics_out, result.rows);
        metrics_out.close();
        for (const auto& [name, content] : emit_plot_data(result.rows)) dir.open(name) << content;
        for (const auto& w : result.warnings) events.emit({{"event", "warning"}, {"message", w}});
    } catch (const Error& e) {
        status = "failed";
        error = std::string(to_string(e.kind())) + ": " + e.what();
        failure = std::current_exception();
    } catch (const std::exception& e) {
        status = "failed";
        error = e.what();
        failure = std::current_exception();
    }

    json manifest;
    manifest["id"] = cfg.id;
    manifest["method"] = cfg.method;
    manifest["seed"] = cfg.seed;
    manifest["workers"] = cfg.workers;
    manifest["status"] = status;
    if (!error.empty()) manifest["error"] = error;
    manifest["warnings"] = result.warnings;
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::system_clock::now() - started).count();
    json files = json::array();
    for (const auto& f : dir.files()) {
        files.push_back({{"name", f}, {"bytes", fs::file_size(dir.path() / f)}});
    }
    manifest["files"] = files;
    std::ofstream(dir.path() / "manifest.json") << manifest.dump(2) << '\n';
    if (failure) std::rethrow_exception(failure);
    return result;
}

}  // namespace lstrack
