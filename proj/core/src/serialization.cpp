#include "nlocal/serialization.hpp"

#include "nlocal/errors.hpp"
#include "nlocal/units.hpp"

#include <cstdio>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace nlocal {

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return {buf, static_cast<std::size_t>(len)};
}

namespace {

Json terms_to_json(const std::map<TermId, double>& terms) {
  Json out = Json::array();
  for (const auto& [id, value] : terms) {
    out.push_back({{"axis", std::string(1, axis_char(id.axis))}, {"subset", id.subset}, {"value", value}});
  }
  return out;
}

std::map<TermId, double> terms_from_json(const Json& doc) {
  std::map<TermId, double> out;
  for (const Json& entry : doc) {
    const auto axis = entry.at("axis").get<std::string>();
    if (axis != "X" && axis != "Z") throw SerializationError("term axis must be X or Z");
    TermId id{axis == "X" ? Axis::X : Axis::Z, entry.at("subset").get<SpinSubset>()};
    out[id] = entry.at("value").get<double>();
  }
  return out;
}

void write_row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format_double(v);
    first = false;
  }
  out << '\n';
}

}  // namespace

Json spec_to_json(const SpinSystemSpec& spec) {
  return {{"n", spec.n},
          {"delta", spec.delta},
          {"epsilon", spec.epsilon},
          {"epsilon_max", spec.epsilon_max},
          {"couplings", terms_to_json(spec.couplings)},
          {"M", spec.M},
          {"coupler_on", spec.coupler_on},
          {"spurious", terms_to_json(spec.spurious)}};
}

SpinSystemSpec spec_from_json(const Json& doc) {
  SpinSystemSpec spec;
  try {
    spec.n = doc.at("n").get<int>();
    spec.delta = doc.at("delta").get<std::vector<double>>();
    spec.epsilon = doc.at("epsilon").get<std::vector<double>>();
    spec.epsilon_max = doc.at("epsilon_max").get<double>();
    spec.couplings = terms_from_json(doc.at("couplings"));
    spec.M = doc.at("M").get<double>();
    spec.coupler_on = doc.at("coupler_on").get<bool>();
    spec.spurious = terms_from_json(doc.at("spurious"));
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(std::string("spec JSON: ") + e.what());
  }
  validate(spec);
  return spec;
}

Json fit_to_json(const FitOutcome& fit) {
  Json params = Json::object();
  for (const auto& [id, value] : fit.fitted_spurious) params[id.to_string()] = units::to_mhz(value);
  Json doc = {{"model_locality", fit.model_locality},
              {"fitted_spurious_MHz", params},
              {"fitted_M_MHz", fit.fitted_M ? Json(units::to_mhz(*fit.fitted_M)) : Json(nullptr)},
              {"deviation_vs_clean_MHz", units::to_mhz(fit.deviation_vs_clean)},
              {"deviation_vs_noisy_MHz", units::to_mhz(fit.deviation_vs_noisy)},
              {"converged", fit.converged},
              {"cost", fit.cost},
              {"best_start", fit.best_start},
              {"iterations", fit.residual_history.empty() ? 0 : fit.residual_history.size() - 1}};
  return doc;
}

void write_sweep_csv(std::ostream& out, const SpectroscopySweep& sweep) {
  out << "config_bitmask,epsilon_GHz,delta_E_MHz\n";
  for (std::size_t c = 0; c < sweep.configurations.size(); ++c) {
    const SpinMask mask = sweep.configurations[c].bitmask(sweep.n);
    for (std::size_t g = 0; g < sweep.epsilon_grid.size(); ++g) {
      out << mask << ',' << format_double(units::to_ghz(sweep.epsilon_grid[g])) << ','
          << format_double(units::to_mhz(
                 sweep.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g))))
          << '\n';
    }
  }
}

Json sweep_sidecar(const SpectroscopySweep& sweep, const SpinSystemSpec& spec) {
  Json configs = Json::array();
  for (const auto& c : sweep.configurations) configs.push_back(c.active);
  return {{"spec", spec_to_json(spec)},
          {"seed", sweep.seed},
          {"noise_sigma_MHz", units::to_mhz(sweep.noise_sigma)},
          {"grid_points", sweep.epsilon_grid.size()},
          {"configurations", configs}};
}

SpectroscopySweep read_sweep(std::istream& csv, const Json& sidecar) {
  SpectroscopySweep sweep;
  SpinSystemSpec spec;
  try {
    spec = spec_from_json(sidecar.at("spec"));
    SweepOptions opts;
    for (const Json& c : sidecar.at("configurations")) opts.configurations.push_back({c.get<SpinSubset>()});
    sweep = generate_sweep(spec, sidecar.at("grid_points").get<int>(),
                           units::mhz(sidecar.at("noise_sigma_MHz").get<double>()),
                           sidecar.at("seed").get<std::uint64_t>(), opts);
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(std::string("sweep sidecar: ") + e.what());
  }

  std::string line;
  if (!std::getline(csv, line) || line != "config_bitmask,epsilon_GHz,delta_E_MHz") {
    throw SerializationError("sweep CSV: unexpected header");
  }
  const auto cols = static_cast<Eigen::Index>(sweep.epsilon_grid.size());
  Eigen::Index row = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (row >= sweep.values.size()) throw SerializationError("sweep CSV: too many rows");
    std::stringstream fields(line);
    std::string mask_text, eps_text, value_text;
    std::getline(fields, mask_text, ',');
    std::getline(fields, eps_text, ',');
    std::getline(fields, value_text, ',');
    const Eigen::Index c = row / cols;
    const Eigen::Index g = row % cols;
    try {
      if (std::stoul(mask_text) != sweep.configurations[static_cast<std::size_t>(c)].bitmask(sweep.n)) {
        throw SerializationError("sweep CSV: row order does not match the sidecar");
      }
      sweep.values(c, g) = units::mhz(std::stod(value_text));
    } catch (const std::logic_error&) {
      throw SerializationError("sweep CSV: malformed row '" + line + "'");
    }
    ++row;
  }
  if (row != sweep.values.size()) throw SerializationError("sweep CSV: too few rows");
  return sweep;
}

void write_threshold_csv(std::ostream& out, const ThresholdCurve& curve) {
  out << "sigma_MHz,dev_nlocal_MHz,dev_sublocal_MHz,stderr_nlocal_MHz,stderr_sublocal_MHz\n";
  for (std::size_t i = 0; i < curve.sigma_grid.size(); ++i) {
    write_row(out, {curve.sigma_grid[i] * 1e3, curve.mean_dev_nlocal[i], curve.mean_dev_sublocal[i],
                    curve.stderr_nlocal[i], curve.stderr_sublocal[i]});
  }
}

Json threshold_summary(const ThresholdCurve& curve) {
  return {{"sigma_c_MHz", curve.sigma_c * 1e3},
          {"sigma_c_in_range", curve.sigma_c_in_range},
          {"realizations", curve.realizations},
          {"linefit_nlocal", {{"slope", curve.linefit_full.slope}, {"intercept_MHz", curve.linefit_full.intercept}}},
          {"linefit_sublocal_head",
           {{"slope", curve.linefit_head.slope}, {"intercept_MHz", curve.linefit_head.intercept}}}};
}

void write_scaling_csv(std::ostream& out, const ScalingResult& result) {
  out << "n,sigma_c_MHz\n";
  for (const auto& [n, sigma_c] : result.sigma_c) out << n << ',' << format_double(sigma_c * 1e3) << '\n';
}

void write_spurious_csv(std::ostream& out, const std::vector<SpuriousPoint>& points) {
  out << "eta,dev_nlocal_MHz,dev_sublocal_MHz\n";
  for (const SpuriousPoint& p : points) write_row(out, {p.eta, p.dev_nlocal, p.dev_sublocal});
}

void write_contrast_csv(std::ostream& out, const std::vector<ContrastCell>& cells) {
  out << "n,T2_ns,contrast\n";
  for (const ContrastCell& c : cells) {
    out << c.n << ',' << format_double(c.t2) << ',' << format_double(c.contrast) << '\n';
  }
}

void write_time_series_csv(std::ostream& out, const ContrastReport& report) {
  out << "t_ns";
  for (Eigen::Index m = 0; m < report.populations.cols(); ++m) out << ",pop_" << m;
  out << '\n';
  for (std::size_t i = 0; i < report.time_grid.size(); ++i) {
    out << format_double(report.time_grid[i]);
    for (Eigen::Index m = 0; m < report.populations.cols(); ++m) {
      out << ',' << format_double(report.populations(static_cast<Eigen::Index>(i), m));
    }
    out << '\n';
  }
}

}  // namespace nlocal
