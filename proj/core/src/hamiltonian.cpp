#include "nlocal/hamiltonian.hpp"

#include "nlocal/errors.hpp"
#include "nlocal/rng.hpp"
#include "nlocal/units.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace nlocal {

std::string TermId::to_string() const {
  std::ostringstream out;
  out << axis_char(axis) << '[';
  for (std::size_t i = 0; i < subset.size(); ++i) out << (i ? "," : "") << subset[i];
  out << ']';
  return out.str();
}

TermId TermId::parse(std::string_view text) {
  auto fail = [&] { return SerializationError("malformed term id '" + std::string(text) + "'"); };
  if (text.size() < 4 || (text[0] != 'X' && text[0] != 'Z') || text[1] != '[' ||
      text.back() != ']') {
    throw fail();
  }
  TermId id;
  id.axis = text[0] == 'X' ? Axis::X : Axis::Z;
  std::string_view body = text.substr(2, text.size() - 3);
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view token = body.substr(0, comma);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) throw fail();
    id.subset.push_back(value);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
    if (body.empty()) throw fail();
  }
  if (id.subset.empty()) throw fail();
  return id;
}

void validate(const SpinSystemSpec& spec) {
  const int n = spec.n;
  if (n < 1 || n > kMaxSpins) {
    throw OutOfRangeError("spin count " + std::to_string(n) + " unsupported");
  }
  const auto un = static_cast<std::size_t>(n);
  if (spec.delta.size() != un || spec.epsilon.size() != un) {
    throw DimensionMismatchError("delta/epsilon must have one entry per spin");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(spec.delta.begin(), spec.delta.end(), finite) || !finite(spec.M) ||
      !finite(spec.epsilon_max) || spec.epsilon_max < 0.0) {
    throw std::invalid_argument("spec contains a non-finite strength");
  }
  for (double e : spec.epsilon) {
    if (!finite(e) || e < 0.0 || e > spec.epsilon_max) {
      throw OutOfRangeError("epsilon entry outside [0, epsilon_max]");
    }
  }
  for (const auto& [id, value] : spec.couplings) {
    validate_subset(id.subset, n);
    if (id.locality() < 2 || id.locality() >= n) {
      throw InvalidSubsetError("coupling " + id.to_string() + " must satisfy 1 < |Q| < n");
    }
    if (!finite(value)) throw std::invalid_argument("non-finite coupling " + id.to_string());
  }
  for (const auto& [id, value] : spec.spurious) {
    validate_subset(id.subset, n);
    if (id.locality() == n) {
      throw InvalidSubsetError("spurious shift on n-local term " + id.to_string());
    }
    if (!finite(value)) throw std::invalid_argument("non-finite spurious shift " + id.to_string());
  }
}

std::vector<FieldConfiguration> all_field_configurations(int n) {
  std::vector<FieldConfiguration> configs;
  for (auto& subset : enumerate_subsets(n, 1)) configs.push_back({std::move(subset)});
  return configs;
}

std::vector<TermId> targeted_parameters(int n, SpuriousTargets targets) {
  std::vector<TermId> ids;
  if (targets == SpuriousTargets::all_non_nlocal_parameters) {
    for (int s = 0; s < n; ++s) {
      ids.push_back({Axis::X, {s}});
      ids.push_back({Axis::Z, {s}});
    }
  }
  if (n >= 3) {
    for (auto& subset : enumerate_subsets(n, 2)) {
      if (static_cast<int>(subset.size()) == n) continue;
      ids.push_back({Axis::X, subset});
      ids.push_back({Axis::Z, std::move(subset)});
    }
  }
  return ids;
}

SpinSystemSpec default_spec(int n, std::uint64_t seed, const DefaultSpecOptions& options) {
  if (n < kMinDefaultSpins || n > kMaxSpins) {
    throw OutOfRangeError("default_spec: n=" + std::to_string(n) + " outside [2, 6]");
  }
  const double delta = options.delta > 0 ? options.delta : units::ghz(2.0);
  const double eps_max = options.epsilon_max > 0 ? options.epsilon_max : units::ghz(10.0);
  const double j_max = options.coupling_max > 0 ? options.coupling_max : units::mhz(300.0);

  SpinSystemSpec spec;
  spec.n = n;
  spec.delta.assign(static_cast<std::size_t>(n), delta);
  spec.epsilon.assign(static_cast<std::size_t>(n), 0.0);
  spec.epsilon_max = eps_max;
  spec.M = options.M > 0 ? options.M : units::mhz(50.0);
  spec.coupler_on = false;

  if (options.with_couplings) {
    Rng rng = make_rng(seed, {0x636f75706cULL});
    std::uniform_real_distribution<double> draw(0.0, j_max);
    for (const TermId& id : targeted_parameters(n, SpuriousTargets::couplings_only)) {
      spec.couplings[id] = draw(rng);
    }
  }
  return spec;
}

SpinSystemSpec sample_spurious(const SpinSystemSpec& spec, const SpuriousModel& model) {
  if (!(model.eta >= 0.0)) throw std::invalid_argument("sample_spurious: eta must be >= 0");
  SpinSystemSpec out = spec;
  out.spurious.clear();
  const double scale = model.eta * std::abs(spec.M);
  Rng rng = make_rng(model.seed, {0x7370757269ULL});
  const double lo = model.distribution == SpuriousDistribution::symmetric_uniform ? -1.0 : 0.0;
  std::uniform_real_distribution<double> unit(lo, 1.0);
  for (const TermId& id : targeted_parameters(spec.n, model.targets)) {
    // Draw even when scale == 0 so every eta consumes the same stream.
    const double u = unit(rng);
    out.spurious[id] = u * scale;
  }
  return out;
}

SpinSystemSpec truncate_locality(const SpinSystemSpec& spec, int k) {
  if (k < 1 || k > spec.n) throw OutOfRangeError("truncate_locality: k outside [1, n]");
  SpinSystemSpec out = spec;
  std::erase_if(out.couplings, [k](const auto& kv) { return kv.first.locality() > k; });
  std::erase_if(out.spurious, [k](const auto& kv) { return kv.first.locality() > k; });
  if (k < spec.n) out.M = 0.0;
  return out;
}

std::vector<PauliTerm> hamiltonian_terms(const SpinSystemSpec& spec,
                                         const std::optional<FieldConfiguration>& config,
                                         std::optional<double> field) {
  const int n = spec.n;
  std::vector<double> eps = spec.epsilon;
  if (config) {
    validate_subset(config->active, n);
    std::fill(eps.begin(), eps.end(), 0.0);
    for (int s : config->active) eps[static_cast<std::size_t>(s)] = field.value_or(0.0);
  }

  std::vector<PauliTerm> terms;
  terms.reserve(2 * static_cast<std::size_t>(n) + spec.couplings.size() + spec.spurious.size() + 1);
  for (int s = 0; s < n; ++s) {
    const auto us = static_cast<std::size_t>(s);
    terms.push_back({Axis::X, spin_bit(s, n), spec.delta[us]});
    if (eps[us] != 0.0) terms.push_back({Axis::Z, spin_bit(s, n), eps[us]});
  }
  for (const auto& [id, value] : spec.couplings) {
    terms.push_back({id.axis, subset_mask(id.subset, n), value});
  }
  if (spec.coupler_on) {
    const SpinMask all = (SpinMask{1} << n) - 1;
    if (spec.M != 0.0) terms.push_back({Axis::Z, all, spec.M});
    for (const auto& [id, shift] : spec.spurious) {
      if (shift != 0.0) terms.push_back({id.axis, subset_mask(id.subset, n), shift});
    }
  }
  return terms;
}

Eigen::MatrixXd realize_terms(const std::vector<PauliTerm>& terms, int n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension(n), dimension(n));
  for (const PauliTerm& t : terms) accumulate(h, t.axis, t.mask, t.coeff);
  return h;
}

Eigen::MatrixXd realize_hamiltonian(const SpinSystemSpec& spec, const FieldConfiguration& config,
                                    double field) {
  if (field < 0.0 || field > spec.epsilon_max) {
    throw OutOfRangeError("realize_hamiltonian: field outside [0, epsilon_max]");
  }
  if (static_cast<int>(spec.delta.size()) != spec.n) {
    throw DimensionMismatchError("realize_hamiltonian: spec arrays do not match n");
  }
  return realize_terms(hamiltonian_terms(spec, config, field), spec.n);
}

Eigen::MatrixXd realize_hamiltonian(const SpinSystemSpec& spec) {
  validate(spec);
  return realize_terms(hamiltonian_terms(spec), spec.n);
}

}  // namespace nlocal
