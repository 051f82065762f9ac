#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "lstrack/adaptive_tracker.hpp"
#include "lstrack/config.hpp"
#include "lstrack/experiment.hpp"
#include "lstrack/forward_models.hpp"
#include "lstrack/levelset.hpp"
#include "lstrack/regression.hpp"

namespace py = pybind11;
using namespace lstrack;

namespace {

std::vector<double> burgers_point(std::vector<double> xi) {
    require(xi.size() == 2, ErrorKind::InvalidArgument, "the Burgers problem has two random parameters");
    return xi;
}

py::dict row_to_dict(const MetricsRow& r) {
    py::dict d;
    d["experiment_id"] = r.experiment_id;
    d["method"] = r.method;
    d["N"] = r.order;
    d["P"] = r.basis_size;
    d["N_ev"] = r.n_ev;
    d["eps_l1"] = r.eps_l1;
    d["eps_mu"] = r.eps_mu;
    d["eps_sigma"] = r.eps_sigma;
    d["levels"] = r.levels;
    d["n_elements"] = r.n_elements;
    d["p"] = r.p;
    d["solver"] = r.solver;
    d["classifier"] = r.classifier;
    d["theta1"] = r.theta1;
    return d;
}

py::dict report_to_dict(const RegressionReport& rep) {
    py::dict d;
    d["coeffs"] = rep.coeffs;
    d["residual"] = rep.residual;
    d["rank"] = rep.rank;
    d["iterations"] = rep.iterations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_lstrack, m) {
    m.doc() = "Level-set discontinuity tracking and piecewise polynomial surrogates";

    static py::exception<Error> error(m, "LstrackError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error.ptr())(e.what());
            exc.attr("kind") = to_string(e.kind());
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def("burgers_qoi", [](std::vector<double> xi) { return burgers_exact(BurgersRiemannConfig{}, burgers_point(xi)); },
          py::arg("xi"), "Exact Burgers quantity of interest at xi in [-1, 1]^2.");
    m.def("burgers_indicator",
          [](std::vector<double> xi) {
              return burgers_discontinuity_indicator(BurgersRiemannConfig{}, burgers_point(xi));
          },
          py::arg("xi"));

    m.def(
        "track_burgers",
        [](int m0, int levels) {
            TrackerConfig tc;
            tc.m0 = m0;
            tc.levels = levels;
            const auto tr = run_tracker(BurgersExactModel{}, tc);
            py::dict d;
            d["m"] = tr.field.grid.points(0);
            d["phi"] = tr.field.phi;
            d["crossings"] = zero_crossing_points(tr.field);
            std::vector<double> p;
            for (const auto& r : tr.records) p.push_back(r.p);
            d["p"] = p;
            return d;
        },
        py::arg("m0") = 31, py::arg("levels") = 2,
        "Runs the multi-level tracker on the Burgers problem and returns the locked field.");

    m.def(
        "solve_ols", [](const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, double eps_svd) {
            return report_to_dict(solve_ols_tsvd(psi, u, eps_svd));
        },
        py::arg("psi"), py::arg("u"), py::arg("eps_svd") = 1e-8);
    m.def(
        "solve_lad", [](const Eigen::MatrixXd& psi, const Eigen::VectorXd& u) { return report_to_dict(solve_lad(psi, u)); },
        py::arg("psi"), py::arg("u"));

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& out_root) {
            const auto cfg = config_from_json(nlohmann::json::parse(config_json));
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = lstrack::run_experiment(cfg, out_root);
            }
            py::list rows;
            for (const auto& r : res.rows) rows.append(row_to_dict(r));
            py::dict d;
            d["run_dir"] = res.run_dir;
            d["rows"] = rows;
            d["warnings"] = res.warnings;
            return d;
        },
        py::arg("config_json"), py::arg("out_root"), "Runs an experiment given its JSON config text.");
}
