#pragma once

#include "nlocal/hamiltonian.hpp"
#include "nlocal/least_squares.hpp"
#include "nlocal/spectroscopy.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace nlocal {

struct FitOptions {
  // Parameters the fit may shift. Should match how the data's spurious terms
  // were generated.
  SpuriousTargets targets = SpuriousTargets::all_non_nlocal_parameters;
  // Relative spurious amplitude assumed for random starts and bounds.
  double eta = 0.5;
  int starts = 4;
  std::uint64_t seed = 0;
  // Shifts are boxed to +-shift_bound_factor * max(eta, 1/2) * M_nominal and M
  // to +-m_bound_factor * M_nominal.
  double shift_bound_factor = 5.0;
  double m_bound_factor = 10.0;
  LeastSquaresOptions solver;
  int jobs = 1;
};

struct FitOutcome {
  int model_locality = 0;
  std::map<TermId, double> fitted_spurious;  // rad/ns
  std::optional<double> fitted_M;             // rad/ns, only for the n-local model
  double deviation_vs_clean = 0.0;            // mean |fit - noiseless data|, rad/ns
  double deviation_vs_noisy = 0.0;            // mean |fit - noisy data|, rad/ns
  bool converged = false;
  double cost = 0.0;
  int best_start = 0;
  std::vector<double> residual_history;  // cost per accepted iteration, best start
  Eigen::MatrixXd predicted;             // configurations x grid
};

// Forward model Delta E^M(params) for a fixed coupler-off system, with the
// Jacobian taken from first-order eigenvalue derivatives (Hellmann-Feynman):
// d E_k / d p = <psi_k| P |psi_k> for the Pauli string P multiplying p.
class SweepModel {
 public:
  SweepModel(const SpinSystemSpec& base_spec, std::vector<FieldConfiguration> configurations,
             std::vector<double> grid, std::vector<TermId> free_terms, bool include_m);

  Eigen::Index parameter_count() const;
  Eigen::Index point_count() const { return static_cast<Eigen::Index>(points_.size()); }
  const std::vector<TermId>& free_terms() const { return free_terms_; }
  bool includes_m() const { return include_m_; }

  // Predictions in configuration-major order. Parameter layout: free terms in
  // order, then M when included.
  void evaluate(const Eigen::VectorXd& params, Eigen::VectorXd& predicted,
                Eigen::MatrixXd* jacobian) const;

  Eigen::MatrixXd reshape(const Eigen::VectorXd& flat) const;

 private:
  struct Point {
    Eigen::MatrixXd h_off;
    double e01_off;
  };
  int n_;
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<TermId> free_terms_;
  std::vector<PauliTerm> free_ops_;  // coefficient unused
  bool include_m_;
  std::vector<Point> points_;
};

// Noiseless Delta E^M with the given shifts and M installed as the coupler-on
// terms. Realizes each Hamiltonian independently of SweepModel.
Eigen::MatrixXd predict_sweep(const SpinSystemSpec& base_spec,
                              const std::map<TermId, double>& fitted_spurious,
                              std::optional<double> fitted_M,
                              const std::vector<FieldConfiguration>& configurations,
                              const std::vector<double>& grid);

double mean_abs_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Least-squares fit of a k-local model to the sweep; k = n adds M as a free
// parameter. Coupler-off parameters come from base_spec (its M and spurious
// entries are ignored). Runs options.starts multistarts and keeps the lowest
// cost, ties to the lower start index.
FitOutcome fit_model(const SpectroscopySweep& sweep, const SpinSystemSpec& base_spec,
                     int model_locality, const FitOptions& options = {});

}  // namespace nlocal
