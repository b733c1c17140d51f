#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace nlocal {

inline constexpr int kMaxSpins = 6;

enum class Axis { X, Z };

char axis_char(Axis axis);

// Sorted, duplicate-free list of spin indices.
using SpinSubset = std::vector<int>;

// Basis-index bitmask. Spin 0 is the leftmost tensor factor, i.e. the most
// significant bit of a computational-basis index.
using SpinMask = std::uint32_t;

constexpr int dimension(int n) { return 1 << n; }

constexpr SpinMask spin_bit(int spin, int n) { return SpinMask{1} << (n - 1 - spin); }

// Throws InvalidSubsetError if the subset is empty, unsorted, has duplicates
// or indices outside [0, n).
void validate_subset(const SpinSubset& subset, int n);

SpinMask subset_mask(const SpinSubset& subset, int n);
SpinSubset mask_subset(SpinMask mask, int n);

// (-1)^{popcount(a & b)}
inline double parity_sign(std::uint32_t a, std::uint32_t b) {
  return (__builtin_popcount(a & b) & 1) ? -1.0 : 1.0;
}

class PauliString {
 public:
  PauliString(Axis axis, SpinSubset subset, int n);

  Axis axis() const { return axis_; }
  const SpinSubset& subset() const { return subset_; }
  int n() const { return n_; }
  SpinMask mask() const { return mask_; }
  int locality() const { return static_cast<int>(subset_.size()); }

  // Dense 2^n x 2^n matrix: Pauli on spins in subset, identity elsewhere.
  Eigen::MatrixXcd realize() const;

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  Axis axis_;
  SpinSubset subset_;
  int n_;
  SpinMask mask_;
};

// Adds coeff * (Pauli string) to a real matrix. X and Z strings are real
// signed permutations, so Hamiltonians in this family stay real symmetric.
void accumulate(Eigen::Ref<Eigen::MatrixXd> matrix, Axis axis, SpinMask mask, double coeff);

// <psi| P |psi> for a real state vector.
double expectation(const Eigen::Ref<const Eigen::VectorXd>& psi, Axis axis, SpinMask mask);

enum class XSign { plus, minus };

class ProductXState {
 public:
  explicit ProductXState(std::vector<XSign> signs);
  static ProductXState uniform(int n, XSign sign);

  int n() const { return static_cast<int>(signs_.size()); }
  const std::vector<XSign>& signs() const { return signs_; }

  // Index of this state in the Hadamard-rotated (X) basis: bit set <=> minus.
  std::uint32_t x_basis_index() const;

  Eigen::VectorXcd realize() const;

 private:
  std::vector<XSign> signs_;
};

// <bra| op |ket>; real for X/Z strings between product X states.
double matrix_element(const ProductXState& bra, const PauliString& op, const ProductXState& ket);

// All subsets of {0..n-1} with size >= min_size, ordered by size and then
// lexicographically.
std::vector<SpinSubset> enumerate_subsets(int n, int min_size);

}  // namespace nlocal
