#pragma once

#include "nlocal/pauli.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlocal {

// Identifies one coefficient of the Hamiltonian family. Every parameter is the
// coefficient of a single X- or Z-string: a one-spin subset names the field
// delta_s (X) or epsilon_s (Z); larger subsets name couplings J_X^Q / J_Z^Q.
struct TermId {
  Axis axis = Axis::Z;
  SpinSubset subset;

  int locality() const { return static_cast<int>(subset.size()); }
  bool is_field() const { return subset.size() == 1; }

  // "X[0]", "Z[0,2,3]"
  std::string to_string() const;
  static TermId parse(std::string_view text);

  friend auto operator<=>(const TermId&, const TermId&) = default;
  friend bool operator==(const TermId&, const TermId&) = default;
};

struct SpinSystemSpec {
  int n = 0;
  std::vector<double> delta;    // X-field per spin, rad/ns
  std::vector<double> epsilon;  // Z-field per spin, rad/ns, in [0, epsilon_max]
  double epsilon_max = 0.0;
  // Lower-locality couplings, 1 < |Q| < n. J_X^S does not exist in this family.
  std::map<TermId, double> couplings;
  double M = 0.0;  // J_Z^S
  bool coupler_on = false;
  // Shifts applied only while the coupler is on. Never targets the n-local terms.
  std::map<TermId, double> spurious;
};

// Throws std::invalid_argument (or a subclass) describing the first violation.
void validate(const SpinSystemSpec& spec);

struct FieldConfiguration {
  SpinSubset active;

  SpinMask bitmask(int n) const { return subset_mask(active, n); }
  friend bool operator==(const FieldConfiguration&, const FieldConfiguration&) = default;
};

// All 2^n - 1 configurations in canonical subset order.
std::vector<FieldConfiguration> all_field_configurations(int n);

enum class SpuriousDistribution { symmetric_uniform, positive_uniform };
enum class SpuriousTargets { all_non_nlocal_parameters, couplings_only };

struct SpuriousModel {
  double eta = 0.5;
  SpuriousDistribution distribution = SpuriousDistribution::symmetric_uniform;
  SpuriousTargets targets = SpuriousTargets::all_non_nlocal_parameters;
  std::uint64_t seed = 0;
};

// Parameters a spurious shift (and a model fit) may act on, in canonical
// order: single-spin fields first (X then Z per spin), then couplings by subset.
// Terms on the full spin set are never included.
std::vector<TermId> targeted_parameters(int n, SpuriousTargets targets);

inline constexpr int kMinDefaultSpins = 2;

struct DefaultSpecOptions {
  double delta = 0.0;         // 0 selects 2*pi*2 GHz
  double epsilon_max = 0.0;   // 0 selects 2*pi*10 GHz
  double coupling_max = 0.0;  // 0 selects 2*pi*300 MHz
  double M = 0.0;             // 0 selects 2*pi*50 MHz
  bool with_couplings = true;
};

// Flux-qubit parameter regime: delta = 2pi x 2 GHz, epsilon_max = 2pi x 10 GHz,
// couplings ~ U[0, 2pi x 300 MHz), M = 2pi x 50 MHz, coupler off.
SpinSystemSpec default_spec(int n, std::uint64_t seed, const DefaultSpecOptions& options = {});

SpinSystemSpec sample_spurious(const SpinSystemSpec& spec, const SpuriousModel& model);

// Drops every coupling/spurious entry with |Q| > k; forces M = 0 when k < n.
SpinSystemSpec truncate_locality(const SpinSystemSpec& spec, int k);

// One coefficient of a Hamiltonian in Pauli-string form.
struct PauliTerm {
  Axis axis;
  SpinMask mask;
  double coeff;
};

// Flattened term list of the Hamiltonian. `field` overrides epsilon: when set,
// epsilon_s = *field on spins in config.active and 0 elsewhere.
std::vector<PauliTerm> hamiltonian_terms(const SpinSystemSpec& spec,
                                         const std::optional<FieldConfiguration>& config = {},
                                         std::optional<double> field = {});

Eigen::MatrixXd realize_terms(const std::vector<PauliTerm>& terms, int n);

// Realizes the Hamiltonian with epsilon_s = field on config.active, 0 elsewhere.
Eigen::MatrixXd realize_hamiltonian(const SpinSystemSpec& spec, const FieldConfiguration& config,
                                    double field);

// Realizes the Hamiltonian with the spec's own epsilon vector.
Eigen::MatrixXd realize_hamiltonian(const SpinSystemSpec& spec);

}  // namespace nlocal
