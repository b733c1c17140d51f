#pragma once

#include <numbers>

// Internal unit system: energies and frequencies are angular frequencies in
// rad/ns, times are in ns. A frequency of f GHz is the number 2*pi*f.
namespace nlocal::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double ghz(double f) { return kTwoPi * f; }
constexpr double mhz(double f) { return kTwoPi * f * 1e-3; }

constexpr double to_ghz(double w) { return w / kTwoPi; }
constexpr double to_mhz(double w) { return w / kTwoPi * 1e3; }

}  // namespace nlocal::units
