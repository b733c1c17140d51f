#pragma once

#include "nlocal/dynamics.hpp"
#include "nlocal/hamiltonian.hpp"
#include "nlocal/locality_fit.hpp"
#include "nlocal/spectroscopy.hpp"
#include "nlocal/threshold.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nlocal {

using Json = nlohmann::ordered_json;

// 17 significant digits: every double survives a text round trip.
std::string format_double(double value);

// Rates stay in rad/ns so a stored spec replays bit-exactly. Subsets are
// sorted index arrays.
Json spec_to_json(const SpinSystemSpec& spec);
SpinSystemSpec spec_from_json(const Json& doc);

Json fit_to_json(const FitOutcome& fit);

// config_bitmask, epsilon_GHz, delta_E_MHz
void write_sweep_csv(std::ostream& out, const SpectroscopySweep& sweep);
Json sweep_sidecar(const SpectroscopySweep& sweep, const SpinSystemSpec& spec);
// Rebuilds a sweep from its sidecar and replaces the noisy values with the CSV
// contents. Throws SerializationError on malformed input.
SpectroscopySweep read_sweep(std::istream& csv, const Json& sidecar);

void write_threshold_csv(std::ostream& out, const ThresholdCurve& curve);
Json threshold_summary(const ThresholdCurve& curve);
void write_scaling_csv(std::ostream& out, const ScalingResult& result);
void write_spurious_csv(std::ostream& out, const std::vector<SpuriousPoint>& points);

struct ContrastCell {
  int n = 0;
  double t2 = 0.0;  // ns
  double contrast = 0.0;
};
void write_contrast_csv(std::ostream& out, const std::vector<ContrastCell>& cells);
void write_time_series_csv(std::ostream& out, const ContrastReport& report);

}  // namespace nlocal
