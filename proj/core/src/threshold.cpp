#include "nlocal/threshold.hpp"

#include "nlocal/errors.hpp"
#include "nlocal/parallel.hpp"
#include "nlocal/rng.hpp"
#include "nlocal/spectroscopy.hpp"
#include "nlocal/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nlocal {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kFitStream = 0x666974ULL;
constexpr std::uint64_t kSpecStream = 0x73706563ULL;

struct CellResult {
  double nlocal = 0.0;
  double sublocal = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr summarize(const std::vector<double>& values) {
  const double count = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

// Deviations (MHz) of both model fits on one noise realization.
CellResult fit_both(const SpectroscopySweep& noisy, const SpinSystemSpec& spec,
                    const FitOptions& fit_options) {
  const FitOutcome full = fit_model(noisy, spec, spec.n, fit_options);
  const FitOutcome sub = fit_model(noisy, spec, spec.n - 1, fit_options);
  return {units::to_mhz(full.deviation_vs_clean), units::to_mhz(sub.deviation_vs_clean)};
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DimensionMismatchError("fit_line: need >= 2 paired points");
  }
  const double count = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / count;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DimensionMismatchError("fit_line: abscissae are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double intersect(const LineFit& a, const LineFit& b) {
  const double dslope = a.slope - b.slope;
  if (std::abs(dslope) < 1e-12) throw NoIntersectionError("lines are parallel; no sigma_c");
  return (b.intercept - a.intercept) / dslope;
}

std::vector<double> default_sigma_grid() {
  constexpr int kPoints = 12;
  constexpr double lo = 0.5e-3;  // GHz
  constexpr double hi = 50e-3;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (kPoints - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

SpinSystemSpec noisy_study_spec(int n, std::uint64_t seed, const SpuriousModel& spurious,
                                const DefaultSpecOptions& system) {
  SpuriousModel model = spurious;
  model.seed = derive_seed(seed, {kSpecStream, 1});
  return sample_spurious(default_spec(n, derive_seed(seed, {kSpecStream, 0}), system), model);
}

ThresholdCurve threshold_scan(const SpinSystemSpec& base_spec, const std::vector<double>& sigma_grid,
                              int realizations, std::uint64_t seed,
                              const ThresholdOptions& options) {
  if (sigma_grid.size() < 6) throw OutOfRangeError("threshold_scan: need >= 6 sigma values");
  if (!std::is_sorted(sigma_grid.begin(), sigma_grid.end())) {
    throw std::invalid_argument("threshold_scan: sigma grid must be ascending");
  }
  if (realizations < 1) throw OutOfRangeError("threshold_scan: realizations must be >= 1");
  if (options.head_points < 2 || options.head_points > static_cast<int>(sigma_grid.size())) {
    throw OutOfRangeError("threshold_scan: head_points outside [2, grid size]");
  }
  if (base_spec.n < 2) throw OutOfRangeError("threshold_scan: need n >= 2");

  const SpectroscopySweep clean = generate_sweep(base_spec, options.grid_points, 0.0, 0);
  const std::size_t n_sigma = sigma_grid.size();
  const auto n_real = static_cast<std::size_t>(realizations);

  std::vector<CellResult> cells(n_sigma * n_real);
  parallel_for(cells.size(), options.jobs, [&](std::size_t k) {
    const std::size_t i = k / n_real;
    const std::size_t r = k % n_real;
    const SpectroscopySweep noisy =
        with_noise(clean, units::ghz(sigma_grid[i]), derive_seed(seed, {kNoiseStream, i, r}));
    FitOptions fit_options = options.fit;
    fit_options.jobs = 1;
    fit_options.seed = derive_seed(seed, {kFitStream, i, r});
    cells[k] = fit_both(noisy, base_spec, fit_options);
  });

  ThresholdCurve curve;
  curve.sigma_grid = sigma_grid;
  curve.realizations = realizations;
  for (std::size_t i = 0; i < n_sigma; ++i) {
    std::vector<double> full;
    std::vector<double> sub;
    for (std::size_t r = 0; r < n_real; ++r) {
      full.push_back(cells[i * n_real + r].nlocal);
      sub.push_back(cells[i * n_real + r].sublocal);
    }
    const MeanStderr f = summarize(full);
    const MeanStderr s = summarize(sub);
    curve.mean_dev_nlocal.push_back(f.mean);
    curve.stderr_nlocal.push_back(f.stderr_);
    curve.mean_dev_sublocal.push_back(s.mean);
    curve.stderr_sublocal.push_back(s.stderr_);
  }

  std::vector<double> sigma_mhz;
  for (double s : sigma_grid) sigma_mhz.push_back(s * 1e3);
  const auto head = static_cast<std::size_t>(options.head_points);
  curve.linefit_full = fit_line(sigma_mhz, curve.mean_dev_nlocal);
  curve.linefit_head = fit_line(std::span(sigma_mhz).first(head),
                                std::span(curve.mean_dev_sublocal).first(head));
  const double crossing_mhz = intersect(curve.linefit_full, curve.linefit_head);
  curve.sigma_c = crossing_mhz * 1e-3;
  curve.sigma_c_in_range = curve.sigma_c >= sigma_grid.front() && curve.sigma_c <= sigma_grid.back();
  return curve;
}

ScalingResult scaling_study(const std::vector<int>& n_list, const ScalingOptions& options,
                            std::uint64_t seed) {
  ScalingResult result;
  for (int n : n_list) {
    if (n < 2 || n > 5) throw OutOfRangeError("scaling_study: n must be in [2, 5]");
    const std::uint64_t n_seed = derive_seed(seed, {static_cast<std::uint64_t>(n)});
    const SpinSystemSpec spec = noisy_study_spec(n, n_seed, options.spurious, options.system);
    ThresholdCurve curve =
        threshold_scan(spec, options.sigma_grid, options.realizations, n_seed, options.threshold);
    result.sigma_c[n] = curve.sigma_c;
    result.curves.emplace(n, std::move(curve));
  }
  return result;
}

std::vector<SpuriousPoint> spurious_sensitivity(const SpinSystemSpec& base_spec,
                                                const std::vector<double>& eta_grid,
                                                double fixed_sigma_ghz, int realizations,
                                                std::uint64_t seed,
                                                const SpuriousOptions& options) {
  if (!std::is_sorted(eta_grid.begin(), eta_grid.end())) {
    throw std::invalid_argument("spurious_sensitivity: eta grid must be ascending");
  }
  if (!(fixed_sigma_ghz > 0.0)) throw OutOfRangeError("spurious_sensitivity: sigma must be > 0");
  if (realizations < 1) throw OutOfRangeError("spurious_sensitivity: realizations must be >= 1");

  const auto n_eta = eta_grid.size();
  const auto n_real = static_cast<std::size_t>(realizations);
  const std::uint64_t spurious_seed = derive_seed(seed, {kSpecStream, 2});

  std::vector<SpectroscopySweep> clean(n_eta);
  std::vector<SpinSystemSpec> specs(n_eta);
  parallel_for(n_eta, options.threshold.jobs, [&](std::size_t e) {
    specs[e] = sample_spurious(base_spec, {eta_grid[e], options.distribution, options.targets,
                                           spurious_seed});
    clean[e] = generate_sweep(specs[e], options.threshold.grid_points, 0.0, 0);
  });

  std::vector<CellResult> cells(n_eta * n_real);
  parallel_for(cells.size(), options.threshold.jobs, [&](std::size_t k) {
    const std::size_t e = k / n_real;
    const std::size_t r = k % n_real;
    const SpectroscopySweep noisy =
        with_noise(clean[e], units::ghz(fixed_sigma_ghz), derive_seed(seed, {kNoiseStream, r}));
    FitOptions fit_options = options.threshold.fit;
    fit_options.jobs = 1;
    fit_options.targets = options.targets;
    fit_options.eta = eta_grid[e];
    fit_options.seed = derive_seed(seed, {kFitStream, r});
    cells[k] = fit_both(noisy, specs[e], fit_options);
  });

  std::vector<SpuriousPoint> points;
  for (std::size_t e = 0; e < n_eta; ++e) {
    std::vector<double> full;
    std::vector<double> sub;
    for (std::size_t r = 0; r < n_real; ++r) {
      full.push_back(cells[e * n_real + r].nlocal);
      sub.push_back(cells[e * n_real + r].sublocal);
    }
    points.push_back({eta_grid[e], summarize(full).mean, summarize(sub).mean});
  }
  return points;
}

double mean_cos_theta(double delta, double epsilon_max) {
  if (!(delta > 0.0) || !(epsilon_max > 0.0)) {
    throw OutOfRangeError("mean_cos_theta: delta and epsilon_max must be positive");
  }
  return (std::hypot(delta, epsilon_max) - delta) / epsilon_max;
}

double analytic_bound(int n, double M, double delta, double epsilon_max) {
  if (n < 1 || !(M > 0.0)) throw OutOfRangeError("analytic_bound: arguments must be positive");
  const double configs = std::ldexp(1.0, n) - 1.0;
  return 2.0 * M / configs * std::pow(mean_cos_theta(delta, epsilon_max), n);
}

double perturbative_deviation_oracle(const SpinSystemSpec& spec, const FieldConfiguration& config,
                                     double epsilon) {
  validate(spec);
  validate_subset(config.active, spec.n);
  const double delta = spec.delta.front();
  for (double d : spec.delta) {
    if (d != delta) throw UnsupportedRegimeError("perturbative oracle needs equal delta on all spins");
  }
  for (const auto& [id, value] : spec.couplings) {
    if (value != 0.0) {
      throw UnsupportedRegimeError("perturbative oracle needs a coupling-free system (" +
                                   id.to_string() + " is set)");
    }
  }
  if (spec.M == 0.0 || static_cast<int>(config.active.size()) < spec.n) return 0.0;
  const double cos_theta = epsilon / std::hypot(delta, epsilon);
  const double sign = (spec.n % 2 == 0) ? 1.0 : -1.0;
  return 2.0 * spec.M * sign * std::pow(cos_theta, spec.n);
}

double exact_curve_difference(const SpinSystemSpec& spec, const FieldConfiguration& config,
                              double epsilon) {
  SpinSystemSpec data = spec;
  data.coupler_on = true;
  SpinSystemSpec constructed = data;
  constructed.M = 0.0;
  return transition_energy(realize_hamiltonian(constructed, config, epsilon)) -
         transition_energy(realize_hamiltonian(data, config, epsilon));
}

double constructed_model_deviation(const SpinSystemSpec& spec, int grid_points) {
  const SpectroscopySweep sweep = generate_sweep(spec, grid_points, 0.0, 0);
  const Eigen::MatrixXd constructed =
      predict_sweep(spec, spec.spurious, std::nullopt, sweep.configurations, sweep.epsilon_grid);
  return mean_abs_deviation(constructed, sweep.clean_values);
}

}  // namespace nlocal
