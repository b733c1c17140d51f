#include "nlocal/spectroscopy.hpp"

#include "nlocal/errors.hpp"
#include "nlocal/parallel.hpp"
#include "nlocal/rng.hpp"
#include "nlocal/units.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace nlocal {

namespace {

double gap(double e0, double e1) {
  const double g = e1 - e0;
  return g < kDegenerateGap ? 0.0 : g;
}

}  // namespace

double transition_energy(const Eigen::MatrixXd& hamiltonian) {
  if (hamiltonian.rows() < 2 || hamiltonian.rows() != hamiltonian.cols()) {
    throw DimensionMismatchError("transition_energy: need a square matrix of size >= 2");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw EigensolverError("transition_energy: eigensolver did not converge");
  }
  return gap(solver.eigenvalues()[0], solver.eigenvalues()[1]);
}

double transition_energy(const Eigen::MatrixXcd& hamiltonian) {
  if (hamiltonian.rows() < 2 || hamiltonian.rows() != hamiltonian.cols()) {
    throw DimensionMismatchError("transition_energy: need a square matrix of size >= 2");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw EigensolverError("transition_energy: eigensolver did not converge");
  }
  return gap(solver.eigenvalues()[0], solver.eigenvalues()[1]);
}

LowSpectrum low_spectrum(const Eigen::MatrixXd& hamiltonian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw EigensolverError("low_spectrum: eigensolver did not converge");
  }
  return {solver.eigenvalues()[0], solver.eigenvalues()[1], solver.eigenvectors().col(0),
          solver.eigenvectors().col(1)};
}

std::vector<double> epsilon_grid(double epsilon_max, int points) {
  if (points < 2) throw OutOfRangeError("epsilon_grid: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = epsilon_max * i / (points - 1);
  }
  grid.back() = epsilon_max;
  return grid;
}

SpectroscopySweep generate_sweep(const SpinSystemSpec& spec, int grid_points, double noise_sigma,
                                 std::uint64_t seed, const SweepOptions& options) {
  validate(spec);
  SpectroscopySweep sweep;
  sweep.n = spec.n;
  sweep.configurations = options.configurations.empty() ? all_field_configurations(spec.n)
                                                        : options.configurations;
  sweep.epsilon_grid = epsilon_grid(spec.epsilon_max, grid_points);

  SpinSystemSpec on = spec;
  on.coupler_on = true;
  SpinSystemSpec off = spec;
  off.coupler_on = false;

  const auto n_cfg = static_cast<Eigen::Index>(sweep.configurations.size());
  const auto n_grid = static_cast<Eigen::Index>(grid_points);
  sweep.clean_values.resize(n_cfg, n_grid);
  parallel_for(static_cast<std::size_t>(n_cfg * n_grid), options.jobs, [&](std::size_t k) {
    const auto c = static_cast<Eigen::Index>(k) / n_grid;
    const auto g = static_cast<Eigen::Index>(k) % n_grid;
    const auto& cfg = sweep.configurations[static_cast<std::size_t>(c)];
    const double eps = sweep.epsilon_grid[static_cast<std::size_t>(g)];
    sweep.clean_values(c, g) = transition_energy(realize_hamiltonian(on, cfg, eps)) -
                               transition_energy(realize_hamiltonian(off, cfg, eps));
  });
  return with_noise(sweep, noise_sigma, seed);
}

SpectroscopySweep with_noise(const SpectroscopySweep& sweep, double noise_sigma,
                             std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  SpectroscopySweep out = sweep;
  out.noise_sigma = noise_sigma;
  out.seed = seed;
  out.values = out.clean_values;
  if (noise_sigma > 0.0) {
    for (Eigen::Index c = 0; c < out.values.rows(); ++c) {
      for (Eigen::Index g = 0; g < out.values.cols(); ++g) {
        SplitMix64 stream(derive_seed(seed, {static_cast<std::uint64_t>(c),
                                             static_cast<std::uint64_t>(g)}));
        std::normal_distribution<double> xi(0.0, noise_sigma);
        out.values(c, g) += xi(stream);
      }
    }
  }
  return out;
}

double sigma_to_t2(double sigma_ghz) {
  if (!(sigma_ghz > 0.0)) throw OutOfRangeError("sigma_to_t2: sigma must be > 0");
  return 1.0 / (units::kTwoPi * sigma_ghz);
}

}  // namespace nlocal
