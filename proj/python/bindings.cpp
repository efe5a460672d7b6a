#include "cogom/errors.hpp"
#include "cogom/estimator.hpp"
#include "cogom/heteropca.hpp"
#include "cogom/metrics.hpp"
#include "cogom/selection.hpp"
#include "cogom/simplex.hpp"
#include "cogom/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace cogom;

namespace {

using OptMatrix = std::optional<DenseMatrix>;

DenseMatrix or_empty(const OptMatrix& m) { return m ? *m : DenseMatrix(); }

FitConfig make_fit_config(std::size_t k, double alpha, const std::string& estimator,
                          std::size_t hetero_iters, double hetero_tol, double trunc_eps,
                          bool require_binary) {
  FitConfig f;
  f.k = k;
  f.alpha = alpha;
  f.gram_estimator = gram_estimator_from_string(estimator);
  f.hetero.max_iters = hetero_iters;
  f.hetero.tol = hetero_tol;
  f.trunc_eps = trunc_eps;
  f.require_binary = require_binary;
  return f;
}

#define COGOM_FIT_ARGS                                                                       \
  py::arg("k") = 3, py::arg("alpha") = 0.0, py::arg("estimator") = "heteropca",             \
      py::arg("hetero_iters") = 10, py::arg("hetero_tol") = 1e-6, py::arg("trunc_eps") = 1e-3, \
      py::arg("require_binary") = true

}  // namespace

PYBIND11_MODULE(_cogom, m) {
  m.doc() = "Covariate-assisted spectral grade-of-membership estimation";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", error);
  py::register_exception<ArgumentError>(m, "ArgumentError", error);
  py::register_exception<ValidationError>(m, "ValidationError", error);
  py::register_exception<IoError>(m, "IoError", error);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", numerical);
  py::register_exception<GeometryError>(m, "GeometryError", numerical);
  py::register_exception<RankError>(m, "RankError", numerical);
  py::register_exception<SignalError>(m, "SignalError", numerical);
  py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError", numerical);
  py::register_exception<GenerationError>(m, "GenerationError", numerical);

  py::class_<GomModel>(m, "GomModel")
      .def_readonly("pi", &GomModel::pi)
      .def_readonly("theta", &GomModel::theta)
      .def_readonly("theta_untruncated", &GomModel::theta_untruncated)
      .def_readonly("m", &GomModel::m)
      .def_readonly("alpha", &GomModel::alpha)
      .def_readonly("trunc_eps", &GomModel::trunc_eps)
      .def_property_readonly("pure_subjects", [](const GomModel& g) { return g.pure_subjects.indices; })
      .def_property_readonly("eigenvalues", [](const GomModel& g) { return g.eig.values; })
      .def_property_readonly("eigenvectors", [](const GomModel& g) { return g.eig.vectors; });

  m.def(
      "fit",
      [](const DenseMatrix& r, const OptMatrix& x, std::size_t k, double alpha,
         const std::string& estimator, std::size_t iters, double tol, double eps, bool binary) {
        return fit(r, or_empty(x), make_fit_config(k, alpha, estimator, iters, tol, eps, binary));
      },
      py::arg("r"), py::arg("x") = py::none(), COGOM_FIT_ARGS);

  m.def("predict", &predict, py::arg("model"));

  py::class_<CvReport>(m, "CvReport")
      .def_readonly("alphas", &CvReport::alphas)
      .def_readonly("mae", &CvReport::mae)
      .def_readonly("mean_mae", &CvReport::mean_mae)
      .def_readonly("smoothed", &CvReport::smoothed)
      .def_readonly("selected_alpha", &CvReport::selected_alpha)
      .def_readonly("selected_index", &CvReport::selected_index)
      .def_readonly("folds", &CvReport::folds)
      .def_readonly("seed", &CvReport::seed)
      .def_property_readonly("failures", [](const CvReport& rep) {
        py::list out;
        for (const auto& f : rep.failures) out.append(py::make_tuple(f.alpha_index, f.fold, f.message));
        return out;
      });

  m.def(
      "default_alpha_grid",
      [](const DenseMatrix& r, const DenseMatrix& x, std::size_t k, std::size_t count) {
        FitConfig f;
        f.k = k;
        return default_alpha_grid_for(r, x, f, count);
      },
      py::arg("r"), py::arg("x"), py::arg("k") = 3, py::arg("count") = 20);

  m.def(
      "cross_validate_alpha",
      [](const DenseMatrix& r, const DenseMatrix& x, std::vector<double> alphas, std::size_t folds,
         std::uint64_t seed, bool ipw, std::size_t threads, std::size_t k, double,
         const std::string& estimator, std::size_t iters, double tol, double eps, bool binary) {
        CvConfig cv;
        cv.fit = make_fit_config(k, 0.0, estimator, iters, tol, eps, binary);
        cv.alphas = alphas.empty() ? default_alpha_grid_for(r, x, cv.fit) : std::move(alphas);
        cv.folds = folds;
        cv.seed = seed;
        cv.ipw = ipw;
        cv.threads = threads;
        py::gil_scoped_release release;
        return cross_validate_alpha(r, x, cv);
      },
      py::arg("r"), py::arg("x"), py::arg("alphas") = std::vector<double>{}, py::arg("folds") = 5,
      py::arg("seed") = 0, py::arg("ipw") = false, py::arg("threads") = 1, COGOM_FIT_ARGS);

  m.def(
      "generate",
      [](std::size_t n, std::size_t j, std::size_t w, std::size_t k, double sigma, double beta_het,
         bool pure, bool sample_responses, std::uint64_t seed) {
        SimStudyConfig c;
        c.n = n;
        c.j = j;
        c.w = w;
        c.k = k;
        c.x_noise.sigma = sigma;
        if (beta_het != 0.0) {
          c.x_noise.kind = XNoise::Kind::kPowerLaw;
          c.x_noise.beta_het = beta_het;
        }
        c.inject_pure = pure;
        c.sample_responses = sample_responses;
        c.seed = seed;
        const SimDataset d = generate(c);
        py::dict out;
        out["r"] = d.r;
        out["x"] = d.x;
        out["pi"] = d.pi;
        out["theta"] = d.theta;
        out["m"] = d.m;
        out["clipped_means"] = d.clipped_means;
        return out;
      },
      py::arg("n") = 200, py::arg("j") = 20, py::arg("w") = 10, py::arg("k") = 3,
      py::arg("sigma") = 0.5, py::arg("beta_het") = 0.0, py::arg("pure") = false,
      py::arg("sample_responses") = true, py::arg("seed") = 0,
      "Simulated dataset as a dict of r, x, pi, theta, m. A nonzero beta_het "
      "switches to power-law covariate noise.");

  py::class_<AlignedError>(m, "AlignedError")
      .def_readonly("permutation", &AlignedError::permutation)
      .def_readonly("mae_pi", &AlignedError::mae_pi)
      .def_readonly("mae_theta", &AlignedError::mae_theta)
      .def_readonly("mae_m", &AlignedError::mae_m)
      .def_readonly("two_to_inf_pi", &AlignedError::two_to_inf_pi)
      .def_readonly("max_abs_pi", &AlignedError::max_abs_pi)
      .def_readonly("max_abs_theta", &AlignedError::max_abs_theta);

  m.def(
      "align",
      [](const DenseMatrix& pi, const DenseMatrix& theta, const DenseMatrix& true_pi,
         const DenseMatrix& true_theta, const OptMatrix& m_est, const OptMatrix& m_true) {
        return align({pi, theta, or_empty(m_est)}, {true_pi, true_theta, or_empty(m_true)});
      },
      py::arg("pi"), py::arg("theta"), py::arg("true_pi"), py::arg("true_theta"),
      py::arg("m") = py::none(), py::arg("true_m") = py::none());

  m.def("optimal_assignment", &optimal_assignment, py::arg("cost"));
  m.def(
      "subspace_distance",
      [](const DenseMatrix& u1, const DenseMatrix& u2) {
        const SubspaceDistance d = subspace_distance(u1, u2);
        return py::make_tuple(d.projector, d.two_to_inf);
      },
      py::arg("u1"), py::arg("u2"), "(projector distance, Procrustes 2-to-inf distance)");

  py::class_<HeteroPcaResult>(m, "HeteroPcaResult")
      .def_readonly("debiased_gram", &HeteroPcaResult::debiased_gram)
      .def_readonly("iters_run", &HeteroPcaResult::iters_run)
      .def_readonly("final_change", &HeteroPcaResult::final_change)
      .def_property_readonly("eigenvalues", [](const HeteroPcaResult& h) { return h.decomposition.values; })
      .def_property_readonly("eigenvectors", [](const HeteroPcaResult& h) { return h.decomposition.vectors; });

  m.def(
      "hetero_pca",
      [](const DenseMatrix& g, std::size_t rank, std::size_t max_iters, double tol) {
        HeteroPcaConfig c;
        c.rank = rank;
        c.max_iters = max_iters;
        c.tol = tol;
        return hetero_pca(g, c);
      },
      py::arg("g"), py::arg("rank"), py::arg("max_iters") = 10, py::arg("tol") = 1e-6);

  m.def("project_to_simplex", &project_to_simplex, py::arg("v"));
  m.def(
      "successive_projection",
      [](const DenseMatrix& u, std::size_t k) { return successive_projection(u, k).indices; },
      py::arg("u"), py::arg("k"));

  m.def(
      "check_identifiability",
      [](const DenseMatrix& d, double tol) {
        const IdentifiabilityReport rep = check_identifiability(d, tol);
        py::dict out;
        out["verdict"] = to_string(rep.verdict);
        out["rank"] = rep.rank;
        out["requires_interior_subject"] = rep.requires_interior_subject;
        return out;
      },
      py::arg("d"), py::arg("tol") = 1e-8);

  m.def(
      "parallel_analysis",
      [](const DenseMatrix& r, std::size_t n_perm, double q, std::uint64_t seed) {
        return parallel_analysis(r, n_perm, q, seed).k;
      },
      py::arg("r"), py::arg("n_perm") = 100, py::arg("q") = 0.95, py::arg("seed") = 0);
}
