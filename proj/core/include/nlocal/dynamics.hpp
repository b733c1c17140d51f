#pragma once

#include "nlocal/hamiltonian.hpp"
#include "nlocal/pauli.hpp"

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <variant>
#include <vector>

namespace nlocal {

struct DrivenTerm {
  PauliString op;
  double amplitude;  // rad/ns
};

// delta H(t) = cos(omega t) * sum_k amplitude_k * op_k
struct DriveSpec {
  double omega = 0.0;  // rad/ns
  std::vector<DrivenTerm> terms;

  // M cos(omega t) Z_1 ... Z_n
  static DriveSpec nlocal(int n, double M, double omega);
  double total_amplitude() const;
};

struct LindbladSpec {
  double t2 = std::numeric_limits<double>::infinity();  // ns; infinity means closed system
  bool include_decay = true;
  bool include_dephasing = true;

  double gamma() const { return 1.0 / t2; }
  static LindbladSpec closed() { return {}; }
};

struct IntegratorConfig {
  double sample_interval = 1.0;  // ns
  // The RK4 step is at most min(2 pi / omega, T2, 1 / M_total) / steps_per_timescale.
  int steps_per_timescale = 50;
  double max_trace_drift = 1e-4;
  double positivity_tolerance = 1e-8;
};

struct ContrastReport {
  std::vector<double> time_grid;  // ns
  Eigen::MatrixXd populations;    // time x eigenstate, eigenstates in ascending energy
  std::vector<double> energies;   // static eigenvalues, rad/ns
  std::vector<std::uint32_t> labels;  // max-overlap product-X state (bit set = minus)
  int target_index = 0;    // eigenstate closest to |+>^n
  int excluded_index = 0;  // eigenstate closest to |->^n
  double contrast = 0.0;
  double step = 0.0;  // ns
  long steps = 0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool positivity_violated = false;
};

// Gap between the ground and most-excited state of the static coupler-off
// Hamiltonian (all epsilon_s taken from the spec, normally zero).
double resonant_frequency(const SpinSystemSpec& spec);

using InitialState = std::variant<ProductXState, Eigen::MatrixXcd>;

// Integrates the Lindblad master equation with per-spin collapse operators
// sqrt(gamma) |-><+| (decay) and sqrt(gamma/2) X (dephasing), and the harmonic
// drive on top of the static coupler-off Hamiltonian. Populations are recorded
// in the static eigenbasis every sample_interval.
ContrastReport evolve_lindblad(const SpinSystemSpec& static_spec, const DriveSpec& drive,
                               const LindbladSpec& lindblad, double t_end,
                               const InitialState& initial, const IntegratorConfig& config = {});

// max_t P_target - max_{t, m not in {target, excluded}} P_m
double state_contrast(const Eigen::MatrixXd& populations, int target, int excluded);

// Walsh-Hadamard transform (normalized, self-inverse) of each column, in place.
void hadamard_rows(Eigen::Ref<Eigen::MatrixXcd> matrix);
void hadamard_rows(Eigen::Ref<Eigen::MatrixXd> matrix);

}  // namespace nlocal
