#pragma once

#include "nlocal/dynamics.hpp"
#include "nlocal/hamiltonian.hpp"

#include <complex>
#include <vector>

namespace nlocal {

// First-order amplitude for a drive M cos(omega t) with unit matrix element
// between two levels split by omega_ab:
//   c(t) = -i M int_0^t cos(omega s) exp(i omega_ab s) ds.
std::complex<double> first_order_amplitude(double M, double omega, double omega_ab, double t);

// Second-order coefficient between |-...-> and |+...+> from the driven terms,
// with all fields delta and resonant drive omega = 2 n delta.
struct SecondOrderEstimate {
  double zz_sum = 0.0;     // sum over intermediate states of dJ_Z^(m) dJ_Z^(m-bar)
  double cross_term = 0.0;  // 2 dJ_Z^(S) * sum of dJ_X^(Q) over proper subsets
  double spurious = 0.0;    // |zz_sum| / (delta * omega)
  double total = 0.0;       // |zz_sum + cross_term| / (delta * omega)
};

SecondOrderEstimate second_order_spurious_estimate(const std::vector<DrivenTerm>& driven_terms,
                                                   double delta, int n);

// Same, reading delta from a spec. Throws UnsupportedRegimeError unless all
// delta_s are equal.
SecondOrderEstimate second_order_spurious_estimate(const std::vector<DrivenTerm>& driven_terms,
                                                   const SpinSystemSpec& spec);

// 2^n dJ^2 / (2 n delta^2): every coupling of size dJ.
double second_order_closed_form(double delta_j, double delta, int n);

struct Detectability {
  bool detectable = false;
  double margin = 0.0;  // M n delta / (2^(n-1) dJ^2)
};

Detectability detectability_criterion(double M, double delta_j, double delta, int n);

// Time for M^2 t^2 to reach the measurement precision xi.
double wait_time_estimate(double M, double xi);

}  // namespace nlocal
