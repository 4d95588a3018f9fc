#include "hdpower/alternatives.hpp"
#include "hdpower/analytic.hpp"
#include "hdpower/error.hpp"
#include "hdpower/permutation.hpp"
#include "hdpower/powerlab.hpp"
#include "hdpower/statistics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace hdpower;

namespace {

DataMatrix to_data(const RowMatrix& values) { return DataMatrix(values); }

StatisticKind make_kind(const std::string& statistic, const std::string& kernel,
                        const std::string& bandwidth, const std::string& metric) {
  StatisticKind kind;
  kind.statistic = parse_statistic(statistic);
  kind.kernel = parse_kernel_family(kernel);
  kind.bandwidth = parse_bandwidth_rule(bandwidth);
  kind.metric = parse_distance_metric(metric);
  validate(kind.bandwidth);
  return kind;
}

AlternativeSpec make_scenario(const std::string& type, Index d, double sigma, double delta,
                              double tau, Index k, double rho) {
  AlternativeSpec spec;
  if (type == "gaussian-mean") {
    spec = GaussianMeanShift{d, sigma, delta, ShiftMode::FirstCoordinate};
  } else if (type == "gaussian-mean-all") {
    spec = GaussianMeanShift{d, sigma, delta, ShiftMode::AllCoordinates};
  } else if (type == "laplace-mean") {
    spec = LaplaceMeanShift{d, sigma, delta};
  } else if (type == "gaussian-var") {
    spec = GaussianDiffVariance{d, sigma, tau};
  } else if (type == "gaussian-dep") {
    spec = GaussianDependent{d, k, rho};
  } else {
    throw InputError("unknown scenario type '" + type + "'");
  }
  validate(spec);
  return spec;
}

}  // namespace

PYBIND11_MODULE(_hdpower, m) {
  m.doc() = "Kernel and distance two-sample and independence tests";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", error);
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", error);
  py::register_exception<InsufficientSampleError>(m, "InsufficientSampleError", error);
  py::register_exception<PairingError>(m, "PairingError", error);
  py::register_exception<ModeError>(m, "ModeError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<NumericalError>(m, "NumericalError", error);

  m.def(
      "statistic",
      [](const std::string& name, const RowMatrix& x, const RowMatrix& y, const std::string& kernel,
         const std::string& bandwidth, const std::string& metric) {
        const auto v = compute_statistic(make_kind(name, kernel, bandwidth, metric), to_data(x),
                                         to_data(y));
        py::dict out;
        out["value"] = v.value;
        out["gamma_x"] = v.gamma_x;
        out["gamma_y"] = v.gamma_y;
        return out;
      },
      py::arg("name"), py::arg("x"), py::arg("y"), py::arg("kernel") = "gaussian",
      py::arg("bandwidth") = "median", py::arg("metric") = "l2",
      "Statistic value and resolved bandwidths for samples given as (n, d) arrays.");

  m.def(
      "permutation_test",
      [](const RowMatrix& x, const RowMatrix& y, const std::string& statistic,
         const std::string& kernel, const std::string& bandwidth, const std::string& metric,
         Index permutations, double alpha, std::uint64_t seed, unsigned threads) {
        const auto kind = make_kind(statistic, kernel, bandwidth, metric);
        PermutationConfig cfg;
        cfg.permutations = permutations;
        cfg.alpha = alpha;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.mode = is_two_sample(kind.statistic) ? TestMode::TwoSample : TestMode::Independence;
        PermutationResult r;
        {
          py::gil_scoped_release release;
          r = permutation_test(to_data(x), to_data(y), kind, cfg);
        }
        py::dict out;
        out["observed"] = r.observed;
        out["threshold"] = r.threshold;
        out["p_value"] = r.p_value;
        out["reject"] = r.reject;
        out["gamma_x"] = r.gamma_x;
        out["gamma_y"] = r.gamma_y;
        out["null_sample"] = r.null_sample;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("statistic") = "mmd2u", py::arg("kernel") = "gaussian",
      py::arg("bandwidth") = "median", py::arg("metric") = "l2", py::arg("permutations") = 200,
      py::arg("alpha") = 0.05, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "sample",
      [](const std::string& type, Index d, Index n, Index m_size, std::uint64_t seed, double sigma,
         double delta, double tau, Index k, double rho) {
        const auto spec = make_scenario(type, d, sigma, delta, tau, k, rho);
        auto [x, y] = is_two_sample(spec)
                          ? sample_two_sample(spec, n, m_size, seed)
                          : sample_joint(std::get<GaussianDependent>(spec), n, seed);
        return py::make_tuple(RowMatrix(x.values()), RowMatrix(y.values()));
      },
      py::arg("type"), py::arg("d"), py::arg("n"), py::arg("m") = 0, py::arg("seed") = 0,
      py::arg("sigma") = 1.0, py::arg("delta") = 1.0, py::arg("tau") = 2.0, py::arg("k") = 4,
      py::arg("rho") = 0.5,
      "Draws (X, Y); for gaussian-dep the pair is jointly sampled and m is ignored.");

  m.def(
      "divergence",
      [](const std::string& type, Index d, double sigma, double delta, double tau, Index k,
         double rho) {
        return divergence(make_scenario(type, d, sigma, delta, tau, k, rho)).value;
      },
      py::arg("type"), py::arg("d"), py::arg("sigma") = 1.0, py::arg("delta") = 1.0,
      py::arg("tau") = 2.0, py::arg("k") = 4, py::arg("rho") = 0.5,
      "KL divergence of a two-sample scenario, or mutual information of gaussian-dep.");

  m.def("mmd2_gaussian_exact",
        py::overload_cast<double, double, double, Index>(&mmd2_gaussian_exact),
        py::arg("delta_norm"), py::arg("sigma"), py::arg("gamma"), py::arg("d"));
  m.def("mmd2_gaussian_taylor", &mmd2_gaussian_taylor, py::arg("delta_norm"), py::arg("sigma"),
        py::arg("gamma"), py::arg("d"));
  m.def("mmd2_laplace_exact", &laplace_mmd2_exact, py::arg("mu"), py::arg("sigma"),
        py::arg("gamma"), py::arg("d"));
  m.def("mmd2_laplace_taylor", &mmd2_laplace_taylor, py::arg("delta_norm"), py::arg("sigma"),
        py::arg("gamma"), py::arg("d"));
  m.def("mmd2_diffvar_exact", &mmd2_diffvar_exact, py::arg("sigma"), py::arg("tau"),
        py::arg("gamma"), py::arg("d"));
  m.def("mmd2_diffvar_taylor", &mmd2_diffvar_taylor, py::arg("sigma"), py::arg("tau"),
        py::arg("gamma"), py::arg("d"));

  m.def(
      "wilson_interval",
      [](Index successes, Index trials) {
        const auto ci = wilson_interval(successes, trials);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("successes"), py::arg("trials"));
}
