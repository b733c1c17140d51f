#include "nlocal/pauli.hpp"

#include "nlocal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlocal {

char axis_char(Axis axis) { return axis == Axis::X ? 'X' : 'Z'; }

void validate_subset(const SpinSubset& subset, int n) {
  if (n < 1 || n > kMaxSpins) {
    throw InvalidSubsetError("spin count " + std::to_string(n) + " outside [1, " +
                             std::to_string(kMaxSpins) + "]");
  }
  if (subset.empty()) throw InvalidSubsetError("empty spin subset");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= n) {
      throw InvalidSubsetError("spin index " + std::to_string(subset[i]) + " out of range for n=" +
                               std::to_string(n));
    }
    if (i > 0 && subset[i] <= subset[i - 1]) {
      throw InvalidSubsetError("spin subset must be sorted and duplicate-free");
    }
  }
}

SpinMask subset_mask(const SpinSubset& subset, int n) {
  SpinMask mask = 0;
  for (int s : subset) mask |= spin_bit(s, n);
  return mask;
}

SpinSubset mask_subset(SpinMask mask, int n) {
  SpinSubset subset;
  for (int s = 0; s < n; ++s) {
    if (mask & spin_bit(s, n)) subset.push_back(s);
  }
  return subset;
}

PauliString::PauliString(Axis axis, SpinSubset subset, int n)
    : axis_(axis), subset_(std::move(subset)), n_(n) {
  validate_subset(subset_, n_);
  mask_ = subset_mask(subset_, n_);
}

Eigen::MatrixXcd PauliString::realize() const {
  Eigen::MatrixXd real = Eigen::MatrixXd::Zero(dimension(n_), dimension(n_));
  accumulate(real, axis_, mask_, 1.0);
  return real.cast<std::complex<double>>();
}

std::string PauliString::to_string() const {
  std::ostringstream out;
  out << axis_char(axis_) << '[';
  for (std::size_t i = 0; i < subset_.size(); ++i) out << (i ? "," : "") << subset_[i];
  out << ']';
  return out.str();
}

void accumulate(Eigen::Ref<Eigen::MatrixXd> matrix, Axis axis, SpinMask mask, double coeff) {
  const auto dim = static_cast<std::uint32_t>(matrix.rows());
  if (axis == Axis::Z) {
    for (std::uint32_t b = 0; b < dim; ++b) matrix(b, b) += coeff * parity_sign(b, mask);
  } else {
    for (std::uint32_t b = 0; b < dim; ++b) matrix(b ^ mask, b) += coeff;
  }
}

double expectation(const Eigen::Ref<const Eigen::VectorXd>& psi, Axis axis, SpinMask mask) {
  const auto dim = static_cast<std::uint32_t>(psi.size());
  double acc = 0.0;
  if (axis == Axis::Z) {
    for (std::uint32_t b = 0; b < dim; ++b) acc += parity_sign(b, mask) * psi[b] * psi[b];
  } else {
    for (std::uint32_t b = 0; b < dim; ++b) acc += psi[b] * psi[b ^ mask];
  }
  return acc;
}

ProductXState::ProductXState(std::vector<XSign> signs) : signs_(std::move(signs)) {
  if (signs_.empty() || static_cast<int>(signs_.size()) > kMaxSpins) {
    throw InvalidSubsetError("product state needs 1.." + std::to_string(kMaxSpins) + " spins");
  }
}

ProductXState ProductXState::uniform(int n, XSign sign) {
  return ProductXState(std::vector<XSign>(static_cast<std::size_t>(n), sign));
}

std::uint32_t ProductXState::x_basis_index() const {
  std::uint32_t index = 0;
  for (int s = 0; s < n(); ++s) {
    if (signs_[static_cast<std::size_t>(s)] == XSign::minus) index |= spin_bit(s, n());
  }
  return index;
}

Eigen::VectorXcd ProductXState::realize() const {
  const int dim = dimension(n());
  const double amp = std::pow(2.0, -0.5 * n());
  // Component b of the product is prod_s (+-1)^{bit_s(b)} / sqrt(2)^n, with
  // the sign flipping only on spins in the minus state.
  const std::uint32_t minus_mask = x_basis_index();
  Eigen::VectorXcd state(dim);
  for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(dim); ++b) {
    state[b] = amp * parity_sign(b, minus_mask);
  }
  return state;
}

double matrix_element(const ProductXState& bra, const PauliString& op, const ProductXState& ket) {
  if (bra.n() != op.n() || ket.n() != op.n()) {
    throw DimensionMismatchError("matrix_element: spin counts differ (" + std::to_string(bra.n()) +
                                 ", " + std::to_string(op.n()) + ", " + std::to_string(ket.n()) +
                                 ")");
  }
  const std::complex<double> value = bra.realize().dot(op.realize() * ket.realize());
  if (std::abs(value.imag()) > 1e-10) {
    throw DimensionMismatchError("matrix_element: unexpected imaginary part");
  }
  return value.real();
}

std::vector<SpinSubset> enumerate_subsets(int n, int min_size) {
  if (n < 1 || n > kMaxSpins || min_size < 1 || min_size > n) {
    throw OutOfRangeError("enumerate_subsets: need 1 <= min_size <= n <= " +
                          std::to_string(kMaxSpins));
  }
  std::vector<SpinSubset> out;
  for (SpinMask m = 1; m < (SpinMask{1} << n); ++m) {
    SpinSubset subset;
    for (int s = 0; s < n; ++s) {
      if (m & (SpinMask{1} << s)) subset.push_back(s);
    }
    if (static_cast<int>(subset.size()) >= min_size) out.push_back(std::move(subset));
  }
  std::sort(out.begin(), out.end(), [](const SpinSubset& a, const SpinSubset& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

}  // namespace nlocal
