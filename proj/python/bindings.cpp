#include "glnar/batch_mle.hpp"
#include "glnar/cli.hpp"
#include "glnar/cv.hpp"
#include "glnar/error.hpp"
#include "glnar/forecasting.hpp"
#include "glnar/metrics.hpp"
#include "glnar/recursive_mle.hpp"
#include "glnar/simulator.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace glnar;

namespace {

const Resolution kStep{10};
const Timestamp kEpoch = std::chrono::sys_days{std::chrono::year{2013} / 7 / 1};

PowerSeries as_series(const std::vector<double>& values) { return PowerSeries::regular(kEpoch, kStep, values); }

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict theta_dict(const ThetaState& t)
{
    py::dict d;
    d["phi"] = std::vector<double>(t.phi.data(), t.phi.data() + t.phi.size());
    d["sigma2"] = t.sigma2;
    d["nu"] = t.nu;
    return d;
}

ThetaState make_theta(const std::vector<double>& phi, double sigma2, double nu)
{
    ThetaState t(Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size())), sigma2, nu);
    return t;
}

py::dict simulate_py(const std::vector<double>& phi, double sigma2, double nu, std::size_t n, std::uint64_t seed,
                     std::size_t burn_in)
{
    SimSpec spec;
    spec.theta = make_theta(phi, sigma2, nu);
    spec.n = n;
    spec.seed = seed;
    spec.burn_in = burn_in;
    const auto sim = simulate(spec);
    py::dict d;
    d["values"] = as_array(sim.series.values());
    d["transformed"] = as_array(sim.transformed);
    d["generator"] = std::string(kGeneratorName);
    return d;
}

py::dict fit_batch_py(const std::vector<double>& values, std::size_t p, double delta, double epsilon)
{
    BatchOptions opt;
    opt.epsilon = epsilon;
    const PowerSeries s = delta > 0.0 ? coarsen(as_series(values), {delta}) : as_series(values);
    const auto fit = fit_batch(s, p, opt);
    py::dict d = theta_dict(fit.theta);
    d["iterations"] = fit.iterations;
    d["converged"] = fit.converged;
    d["nll_trace"] = fit.nll_trace;
    d["rows"] = fit.rows;
    return d;
}

py::dict run_recursive_py(const std::vector<double>& values, std::size_t p, double alpha, double delta,
                          std::size_t warmup)
{
    RecursiveConfig cfg;
    cfg.p = p;
    cfg.alpha = alpha;
    cfg.delta = delta;
    cfg.warmup = warmup;
    const auto run = run_series(as_series(values), cfg);
    const auto n = static_cast<py::ssize_t>(run.thetas.size());
    py::array_t<double> phi({n, static_cast<py::ssize_t>(p)});
    std::vector<double> sigma2, nu;
    auto w = phi.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& t = run.thetas[static_cast<std::size_t>(i)];
        for (py::ssize_t k = 0; k < static_cast<py::ssize_t>(p); ++k) w(i, k) = t.phi(k);
        sigma2.push_back(t.sigma2);
        nu.push_back(t.nu);
    }
    py::dict d;
    d["phi"] = phi;
    d["sigma2"] = as_array(sigma2);
    d["nu"] = as_array(nu);
    d["final"] = theta_dict(run.final_state.theta);
    return d;
}

py::dict forecast_py(const std::vector<double>& values, const std::string& model, std::size_t first_target,
                     const std::string& mode, py::object p, py::object delta, py::object alpha)
{
    const ModelKind kind = parse_model(model);
    ModelParams prm = default_params(kind, parse_mode(mode));
    if (!p.is_none()) prm.p = p.cast<std::size_t>();
    if (!delta.is_none()) prm.delta = delta.cast<double>();
    if (!alpha.is_none()) prm.alpha = alpha.cast<double>();
    const PowerSeries s = as_series(values);
    const auto roll = roll_forecast(s, kind, prm, first_target, s.size());
    std::vector<double> obs, point, lo, hi;
    for (const auto& r : roll.archive.records) {
        obs.push_back(r.observation);
        point.push_back(r.point);
        lo.push_back(quantile(r.predictive, 0.025));
        hi.push_back(quantile(r.predictive, 0.975));
    }
    py::dict d;
    d["observation"] = as_array(obs);
    d["point"] = as_array(point);
    d["lower_95"] = as_array(lo);
    d["upper_95"] = as_array(hi);
    d["rmse"] = rmse(roll.archive);
    d["crps"] = crps(roll.archive);
    d["skipped"] = roll.skipped;
    return d;
}

int cli_py(std::vector<std::string> args)
{
    args.insert(args.begin(), "glnar");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    py::print(out.str(), py::arg("end") = "");
    if (!err.str().empty()) py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
    return code;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Generalized logit-normal autoregressive models for bounded series";

    const auto base = py::register_exception<Error>(m, "GlnarError");
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<DataError>(m, "DataError", base);
    py::register_exception<EstimationError>(m, "EstimationError", base);
    py::register_exception<EvaluationError>(m, "EvaluationError", base);

    m.def("transform", &transform, py::arg("x"), py::arg("nu"));
    m.def("inverse_transform", &inverse_transform, py::arg("y"), py::arg("nu"));
    m.def("density", &density, py::arg("x"), py::arg("mu"), py::arg("sigma2"), py::arg("nu"));
    m.def(
        "cdf", [](double x, double mu, double sigma2, double nu) { return predictive_cdf({mu, sigma2, nu}, x); },
        py::arg("x"), py::arg("mu"), py::arg("sigma2"), py::arg("nu"));
    m.def(
        "quantile", [](double tau, double mu, double sigma2, double nu) { return predictive_quantile({mu, sigma2, nu}, tau); },
        py::arg("tau"), py::arg("mu"), py::arg("sigma2"), py::arg("nu"));
    m.def(
        "mean", [](double mu, double sigma2, double nu) { return predictive_mean({mu, sigma2, nu}); }, py::arg("mu"),
        py::arg("sigma2"), py::arg("nu"));
    m.def(
        "crps",
        [](double observation, double mu, double sigma2, double nu) {
            return crps_record(GlnPredictive{mu, sigma2, nu}, observation, uniform_grid());
        },
        py::arg("observation"), py::arg("mu"), py::arg("sigma2"), py::arg("nu"));
    m.def(
        "crps_gaussian",
        [](double observation, double mean, double sigma2) {
            return crps_record(GaussianPredictive{mean, sigma2}, observation, uniform_grid());
        },
        py::arg("observation"), py::arg("mean"), py::arg("sigma2"));

    m.def("simulate", &simulate_py, py::arg("phi"), py::arg("sigma2"), py::arg("nu"), py::arg("n"), py::arg("seed") = 1,
          py::arg("burn_in") = 1000);
    m.def("fit_batch", &fit_batch_py, py::arg("values"), py::arg("p") = 2, py::arg("delta") = 0.0,
          py::arg("epsilon") = 1e-3);
    m.def("run_recursive", &run_recursive_py, py::arg("values"), py::arg("p") = 2, py::arg("alpha") = 0.9994,
          py::arg("delta") = 0.005, py::arg("warmup") = 0);
    m.def("forecast", &forecast_py, py::arg("values"), py::arg("model"), py::arg("first_target"),
          py::arg("mode") = "prob", py::arg("p") = py::none(), py::arg("delta") = py::none(),
          py::arg("alpha") = py::none());
    m.def(
        "models", [] {
            std::vector<std::string> names;
            for (auto k : all_models()) names.push_back(to_string(k));
            return names;
        });
    m.def("cli", &cli_py, py::arg("args"), "Runs the command-line tool in-process and returns its exit status");
}
