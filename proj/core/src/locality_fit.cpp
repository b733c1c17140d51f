#include "nlocal/locality_fit.hpp"

#include "nlocal/errors.hpp"
#include "nlocal/parallel.hpp"
#include "nlocal/rng.hpp"
#include "nlocal/units.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace nlocal {

SweepModel::SweepModel(const SpinSystemSpec& base_spec,
                       std::vector<FieldConfiguration> configurations, std::vector<double> grid,
                       std::vector<TermId> free_terms, bool include_m)
    : n_(base_spec.n),
      rows_(static_cast<Eigen::Index>(configurations.size())),
      cols_(static_cast<Eigen::Index>(grid.size())),
      free_terms_(std::move(free_terms)),
      include_m_(include_m) {
  validate(base_spec);
  for (const TermId& id : free_terms_) {
    validate_subset(id.subset, n_);
    if (id.locality() == n_) throw InvalidSubsetError("free term on the full spin set");
    free_ops_.push_back({id.axis, subset_mask(id.subset, n_), 0.0});
  }
  SpinSystemSpec off = base_spec;
  off.coupler_on = false;
  points_.reserve(static_cast<std::size_t>(rows_ * cols_));
  for (const auto& cfg : configurations) {
    for (double eps : grid) {
      Eigen::MatrixXd h = realize_hamiltonian(off, cfg, eps);
      const double e01 = transition_energy(h);
      points_.push_back({std::move(h), e01});
    }
  }
}

Eigen::Index SweepModel::parameter_count() const {
  return static_cast<Eigen::Index>(free_ops_.size()) + (include_m_ ? 1 : 0);
}

void SweepModel::evaluate(const Eigen::VectorXd& params, Eigen::VectorXd& predicted,
                          Eigen::MatrixXd* jacobian) const {
  const Eigen::Index p = parameter_count();
  if (params.size() != p) throw DimensionMismatchError("SweepModel: wrong parameter count");
  const auto n_points = static_cast<Eigen::Index>(points_.size());
  predicted.resize(n_points);
  if (jacobian) jacobian->resize(n_points, p);

  const SpinMask all = (SpinMask{1} << n_) - 1;
  const auto n_free = static_cast<Eigen::Index>(free_ops_.size());
  Eigen::MatrixXd h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dimension(n_));
  for (Eigen::Index k = 0; k < n_points; ++k) {
    const Point& pt = points_[static_cast<std::size_t>(k)];
    h = pt.h_off;
    for (Eigen::Index j = 0; j < n_free; ++j) {
      const PauliTerm& op = free_ops_[static_cast<std::size_t>(j)];
      accumulate(h, op.axis, op.mask, params[j]);
    }
    if (include_m_) accumulate(h, Axis::Z, all, params[n_free]);

    solver.compute(h, jacobian ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw EigensolverError("SweepModel: eigensolver did not converge");
    }
    const double raw_gap = solver.eigenvalues()[1] - solver.eigenvalues()[0];
    const bool degenerate = raw_gap < kDegenerateGap;
    predicted[k] = (degenerate ? 0.0 : raw_gap) - pt.e01_off;

    if (jacobian) {
      if (degenerate) {
        jacobian->row(k).setZero();
        continue;
      }
      const auto psi0 = solver.eigenvectors().col(0);
      const auto psi1 = solver.eigenvectors().col(1);
      for (Eigen::Index j = 0; j < n_free; ++j) {
        const PauliTerm& op = free_ops_[static_cast<std::size_t>(j)];
        (*jacobian)(k, j) = expectation(psi1, op.axis, op.mask) - expectation(psi0, op.axis, op.mask);
      }
      if (include_m_) {
        (*jacobian)(k, n_free) = expectation(psi1, Axis::Z, all) - expectation(psi0, Axis::Z, all);
      }
    }
  }
}

Eigen::MatrixXd SweepModel::reshape(const Eigen::VectorXd& flat) const {
  Eigen::MatrixXd out(rows_, cols_);
  for (Eigen::Index c = 0; c < rows_; ++c) {
    for (Eigen::Index g = 0; g < cols_; ++g) out(c, g) = flat[c * cols_ + g];
  }
  return out;
}

Eigen::MatrixXd predict_sweep(const SpinSystemSpec& base_spec,
                              const std::map<TermId, double>& fitted_spurious,
                              std::optional<double> fitted_M,
                              const std::vector<FieldConfiguration>& configurations,
                              const std::vector<double>& grid) {
  SpinSystemSpec on = base_spec;
  on.coupler_on = true;
  on.spurious = fitted_spurious;
  on.M = fitted_M.value_or(0.0);
  SpinSystemSpec off = base_spec;
  off.coupler_on = false;
  validate(on);

  Eigen::MatrixXd out(static_cast<Eigen::Index>(configurations.size()),
                      static_cast<Eigen::Index>(grid.size()));
  for (std::size_t c = 0; c < configurations.size(); ++c) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g)) =
          transition_energy(realize_hamiltonian(on, configurations[c], grid[g])) -
          transition_energy(realize_hamiltonian(off, configurations[c], grid[g]));
    }
  }
  return out;
}

double mean_abs_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatchError("mean_abs_deviation: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().mean();
}

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd flat(m.size());
  for (Eigen::Index c = 0; c < m.rows(); ++c) {
    for (Eigen::Index g = 0; g < m.cols(); ++g) flat[c * m.cols() + g] = m(c, g);
  }
  return flat;
}

}  // namespace

FitOutcome fit_model(const SpectroscopySweep& sweep, const SpinSystemSpec& base_spec,
                     int model_locality, const FitOptions& options) {
  const int n = base_spec.n;
  if (sweep.n != n) throw DimensionMismatchError("fit_model: sweep and spec spin counts differ");
  if (model_locality < 1 || model_locality > n) {
    throw OutOfRangeError("fit_model: model locality outside [1, n]");
  }
  if (options.starts < 1) throw std::invalid_argument("fit_model: need at least one start");

  std::vector<TermId> free_terms;
  for (TermId& id : targeted_parameters(n, options.targets)) {
    if (id.locality() <= model_locality) free_terms.push_back(std::move(id));
  }
  const bool include_m = model_locality == n;
  const SweepModel model(base_spec, sweep.configurations, sweep.epsilon_grid, free_terms, include_m);

  const Eigen::Index p = model.parameter_count();
  const Eigen::VectorXd target = flatten(sweep.values);
  const double m_nominal = base_spec.M != 0.0 ? std::abs(base_spec.M) : units::mhz(50.0);
  const double eta_scale = std::max(options.eta, 0.5);
  const double shift_bound = options.shift_bound_factor * eta_scale * m_nominal;
  const auto n_free = static_cast<Eigen::Index>(free_terms.size());

  Eigen::VectorXd lower = Eigen::VectorXd::Constant(p, -shift_bound);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(p, shift_bound);
  if (include_m) {
    lower[n_free] = -options.m_bound_factor * m_nominal;
    upper[n_free] = options.m_bound_factor * m_nominal;
  }

  std::vector<Eigen::VectorXd> initial(static_cast<std::size_t>(options.starts),
                                       Eigen::VectorXd::Zero(p));
  for (int s = 1; s < options.starts; ++s) {
    Rng rng = make_rng(options.seed, {0x6669740000ULL, static_cast<std::uint64_t>(s)});
    const double scale = (options.eta > 0.0 ? options.eta : 0.5) * m_nominal;
    std::uniform_real_distribution<double> shift(-scale, scale);
    std::uniform_real_distribution<double> m_draw(-m_nominal, m_nominal);
    auto& x0 = initial[static_cast<std::size_t>(s)];
    for (Eigen::Index j = 0; j < n_free; ++j) x0[j] = shift(rng);
    if (include_m) x0[n_free] = m_draw(rng);
  }

  const ResidualFunction residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                        Eigen::MatrixXd* jac) {
    model.evaluate(x, r, jac);
    r -= target;
  };

  std::vector<LeastSquaresResult> runs(initial.size());
  parallel_for(initial.size(), options.jobs, [&](std::size_t s) {
    runs[s] = minimize_least_squares(residual, initial[s], lower, upper, options.solver);
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s) {
    if (runs[s].cost < runs[best].cost) best = s;
  }
  const LeastSquaresResult& run = runs[best];

  FitOutcome outcome;
  outcome.model_locality = model_locality;
  for (Eigen::Index j = 0; j < n_free; ++j) {
    outcome.fitted_spurious[free_terms[static_cast<std::size_t>(j)]] = run.x[j];
  }
  if (include_m) outcome.fitted_M = run.x[n_free];
  outcome.converged = run.converged;
  outcome.cost = run.cost;
  outcome.best_start = static_cast<int>(best);
  outcome.residual_history = run.cost_history;

  Eigen::VectorXd predicted;
  model.evaluate(run.x, predicted, nullptr);
  outcome.predicted = model.reshape(predicted);
  outcome.deviation_vs_clean = mean_abs_deviation(outcome.predicted, sweep.clean_values);
  outcome.deviation_vs_noisy = mean_abs_deviation(outcome.predicted, sweep.values);
  return outcome;
}

}  // namespace nlocal
