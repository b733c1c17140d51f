#pragma once

#include "nlocal/hamiltonian.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace nlocal {

// Gaps below this are treated as a degenerate ground state.
inline constexpr double kDegenerateGap = 1e-12;

// E_1 - E_0 of the sorted spectrum (0 for a degenerate ground state).
double transition_energy(const Eigen::MatrixXd& hamiltonian);
double transition_energy(const Eigen::MatrixXcd& hamiltonian);

// Lowest two eigenpairs of a real symmetric matrix.
struct LowSpectrum {
  double e0 = 0.0;
  double e1 = 0.0;
  Eigen::VectorXd ground;
  Eigen::VectorXd excited;
};
LowSpectrum low_spectrum(const Eigen::MatrixXd& hamiltonian);

inline constexpr int kDefaultGridPoints = 21;

std::vector<double> epsilon_grid(double epsilon_max, int points);

struct SpectroscopySweep {
  int n = 0;
  std::vector<FieldConfiguration> configurations;
  std::vector<double> epsilon_grid;
  // rows: configurations, columns: grid points; rad/ns
  Eigen::MatrixXd clean_values;
  Eigen::MatrixXd values;
  double noise_sigma = 0.0;  // rad/ns
  std::uint64_t seed = 0;
};

struct SweepOptions {
  int jobs = 1;
  // Empty selects all 2^n - 1 configurations.
  std::vector<FieldConfiguration> configurations;
};

// Delta E^M(eps) = E01(coupler on) - E01(coupler off) over every configuration
// and grid value, plus N(0, sigma^2) noise per point when sigma > 0.
SpectroscopySweep generate_sweep(const SpinSystemSpec& spec, int grid_points, double noise_sigma,
                                 std::uint64_t seed, const SweepOptions& options = {});

// Same clean data, fresh noise realization. Noise for point (c, g) depends only
// on (seed, c, g).
SpectroscopySweep with_noise(const SpectroscopySweep& sweep, double noise_sigma,
                             std::uint64_t seed);

// Coherence time (ns) matching a Gaussian linewidth sigma given in GHz.
double sigma_to_t2(double sigma_ghz);

}  // namespace nlocal
