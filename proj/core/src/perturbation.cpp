#include "nlocal/perturbation.hpp"

#include "nlocal/errors.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace nlocal {

namespace {

// int_0^t exp(i x s) ds = t exp(i x t / 2) sinc(x t / 2), stable near x = 0.
std::complex<double> phase_integral(double x, double t) {
  const double half = 0.5 * x * t;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return t * sinc * std::polar(1.0, half);
}

}  // namespace

std::complex<double> first_order_amplitude(double M, double omega, double omega_ab, double t) {
  if (t < 0.0) throw OutOfRangeError("first_order_amplitude: t must be >= 0");
  const std::complex<double> integral =
      0.5 * (phase_integral(omega_ab + omega, t) + phase_integral(omega_ab - omega, t));
  return std::complex<double>(0.0, -M) * integral;
}

SecondOrderEstimate second_order_spurious_estimate(const std::vector<DrivenTerm>& driven_terms,
                                                   double delta, int n) {
  if (n < 1 || n > kMaxSpins) throw OutOfRangeError("second_order_spurious_estimate: bad n");
  if (!(delta > 0.0)) throw OutOfRangeError("second_order_spurious_estimate: delta must be > 0");
  const SpinMask all = (SpinMask{1} << n) - 1;

  std::map<SpinMask, double> z_by_mask;
  double x_sum = 0.0;
  for (const DrivenTerm& t : driven_terms) {
    if (t.op.n() != n) throw DimensionMismatchError("second_order_spurious_estimate: spin count");
    if (t.op.axis() == Axis::Z) {
      z_by_mask[t.op.mask()] += t.amplitude;
    } else if (t.op.mask() != all) {
      x_sum += t.amplitude;
    }
  }
  auto z = [&](SpinMask mask) {
    const auto it = z_by_mask.find(mask);
    return it == z_by_mask.end() ? 0.0 : it->second;
  };

  SecondOrderEstimate out;
  // Intermediate state m is a product X state; its plus-set pairs with the
  // complementary minus-set. Empty and full sets carry no spurious Z term.
  for (SpinMask m = 1; m < all; ++m) out.zz_sum += z(m) * z(all ^ m);
  out.cross_term = 2.0 * z(all) * x_sum;
  const double omega = 2.0 * n * delta;
  out.spurious = std::abs(out.zz_sum) / (delta * omega);
  out.total = std::abs(out.zz_sum + out.cross_term) / (delta * omega);
  return out;
}

SecondOrderEstimate second_order_spurious_estimate(const std::vector<DrivenTerm>& driven_terms,
                                                   const SpinSystemSpec& spec) {
  validate(spec);
  for (double d : spec.delta) {
    if (d != spec.delta.front()) {
      throw UnsupportedRegimeError("second_order_spurious_estimate: delta_s must all be equal");
    }
  }
  return second_order_spurious_estimate(driven_terms, spec.delta.front(), spec.n);
}

double second_order_closed_form(double delta_j, double delta, int n) {
  return std::ldexp(delta_j * delta_j, n) / (2.0 * n * delta * delta);
}

Detectability detectability_criterion(double M, double delta_j, double delta, int n) {
  if (!(M > 0.0) || !(delta > 0.0) || n < 1 || delta_j < 0.0) {
    throw OutOfRangeError("detectability_criterion: inputs must be positive");
  }
  if (delta_j == 0.0) return {true, std::numeric_limits<double>::infinity()};
  const double margin = M * n * delta / (std::ldexp(1.0, n - 1) * delta_j * delta_j);
  return {margin > 1.0, margin};
}

double wait_time_estimate(double M, double xi) {
  if (!(M > 0.0)) throw OutOfRangeError("wait_time_estimate: M must be > 0");
  if (!(xi > 0.0 && xi <= 1.0)) throw OutOfRangeError("wait_time_estimate: xi outside (0, 1]");
  return std::sqrt(xi) / M;
}

}  // namespace nlocal
