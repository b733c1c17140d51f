#pragma once

#include "nlocal/hamiltonian.hpp"
#include "nlocal/locality_fit.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace nlocal {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double at(double x) const { return intercept + slope * x; }
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Abscissa where two lines cross. Throws NoIntersectionError when parallel.
double intersect(const LineFit& a, const LineFit& b);

struct ThresholdOptions {
  int grid_points = kDefaultGridPoints;
  int head_points = 5;  // leading sub-local points used for its line fit
  FitOptions fit;
  int jobs = 1;
};

struct ThresholdCurve {
  std::vector<double> sigma_grid;         // GHz
  std::vector<double> mean_dev_nlocal;    // MHz, realization mean of deviation_vs_clean
  std::vector<double> mean_dev_sublocal;  // MHz
  std::vector<double> stderr_nlocal;      // MHz, standard error over realizations
  std::vector<double> stderr_sublocal;
  int realizations = 0;
  double sigma_c = 0.0;  // GHz
  bool sigma_c_in_range = false;
  LineFit linefit_full;  // n-local deviations vs sigma, both in MHz
  LineFit linefit_head;  // first head_points sub-local deviations, MHz
};

// 12 log-spaced noise amplitudes from 0.5 MHz to 50 MHz, in GHz.
std::vector<double> default_sigma_grid();

// Default coupler-on system for noise studies: default_spec(n) plus spurious
// shifts drawn from the given model.
SpinSystemSpec noisy_study_spec(int n, std::uint64_t seed, const SpuriousModel& spurious,
                                const DefaultSpecOptions& system = {});

// For each sigma and realization: noisy sweep, n-local and (n-1)-local fits,
// deviation against the noiseless data. sigma_c is where the n-local line
// meets the line through the leading sub-local points.
ThresholdCurve threshold_scan(const SpinSystemSpec& base_spec, const std::vector<double>& sigma_grid,
                              int realizations, std::uint64_t seed,
                              const ThresholdOptions& options = {});

struct ScalingOptions {
  std::vector<double> sigma_grid = default_sigma_grid();
  int realizations = 10;
  SpuriousModel spurious{};  // seed is derived per n
  DefaultSpecOptions system;
  ThresholdOptions threshold;
};

struct ScalingResult {
  std::map<int, ThresholdCurve> curves;
  std::map<int, double> sigma_c;  // GHz
};

ScalingResult scaling_study(const std::vector<int>& n_list, const ScalingOptions& options,
                            std::uint64_t seed);

struct SpuriousOptions {
  SpuriousDistribution distribution = SpuriousDistribution::positive_uniform;
  SpuriousTargets targets = SpuriousTargets::couplings_only;
  ThresholdOptions threshold;
};

struct SpuriousPoint {
  double eta = 0.0;
  double dev_nlocal = 0.0;    // MHz
  double dev_sublocal = 0.0;  // MHz
  double gap() const { return dev_sublocal - dev_nlocal; }
};

// Mean fit deviations of both models versus spurious amplitude at fixed noise.
// The spurious pattern and noise realizations are shared across eta, so only
// the amplitude changes between grid points.
std::vector<SpuriousPoint> spurious_sensitivity(const SpinSystemSpec& base_spec,
                                                const std::vector<double>& eta_grid,
                                                double fixed_sigma_ghz, int realizations,
                                                std::uint64_t seed,
                                                const SpuriousOptions& options = {});

// Average of cos(theta) = eps / sqrt(delta^2 + eps^2) over eps in [0, eps_max].
double mean_cos_theta(double delta, double epsilon_max);

// (2M / (2^n - 1)) * <cos theta>^n, rad/ns.
double analytic_bound(int n, double M, double delta, double epsilon_max);

// First-order difference between the (n-1)-local constructed model and the
// n-local data for a coupling-free, equal-delta system:
// 2M (-1)^n prod_i cos(theta_i). Zero unless every spin is in the configuration.
double perturbative_deviation_oracle(const SpinSystemSpec& spec, const FieldConfiguration& config,
                                     double epsilon);

// Exact counterpart by diagonalization: E01(true spurious, M = 0) - E01(spec
// with coupler on).
double exact_curve_difference(const SpinSystemSpec& spec, const FieldConfiguration& config,
                              double epsilon);

// Mean |constructed - data| over all configurations and grid points, rad/ns.
double constructed_model_deviation(const SpinSystemSpec& spec, int grid_points = kDefaultGridPoints);

}  // namespace nlocal
