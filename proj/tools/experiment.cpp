#include "experiment.hpp"

#include <nlocal/dynamics.hpp>
#include <nlocal/errors.hpp>
#include <nlocal/parallel.hpp>
#include <nlocal/perturbation.hpp>
#include <nlocal/rng.hpp>
#include <nlocal/units.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

namespace nlocal::cli {

namespace {

constexpr std::array<std::pair<Command, const char*>, 7> kCommands{{
    {Command::sweep, "sweep"},
    {Command::fit, "fit"},
    {Command::threshold, "threshold"},
    {Command::scaling, "scaling"},
    {Command::spurious, "spurious"},
    {Command::dynamics, "dynamics"},
    {Command::bound, "bound"},
}};

// Stream tags for seeds derived from the run seed.
constexpr std::uint64_t kSweepNoise = 0x73776e;
constexpr std::uint64_t kFitStarts = 0x667374;
constexpr std::uint64_t kDynamicsSpec = 0x64796e;

template <class T>
T get_as(const Json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type: " + value.dump());
  }
}

using Setter = std::function<void(ExperimentConfig&, const Json&, const std::string&)>;

template <class T, class Check>
Setter field(T ExperimentConfig::*member, Check check) {
  return [member, check](ExperimentConfig& cfg, const Json& value, const std::string& key) {
    T parsed = get_as<T>(value, key);
    if (!check(parsed)) throw ConfigError("field '" + key + "' out of range: " + value.dump());
    cfg.*member = std::move(parsed);
  };
}

template <class T>
Setter field(T ExperimentConfig::*member) {
  return field(member, [](const T&) { return true; });
}

auto positive = [](auto v) { return v > 0; };
auto non_negative = [](auto v) { return v >= 0; };

bool valid_spins(const std::vector<int>& list) {
  for (int n : list) {
    if (n < 2 || n > kMaxSpins) return false;
  }
  return !list.empty();
}

bool all_positive(const std::vector<double>& list) {
  for (double v : list) {
    if (!(v > 0.0)) return false;
  }
  return true;
}

bool all_non_negative(const std::vector<double>& list) {
  for (double v : list) {
    if (!(v >= 0.0)) return false;
  }
  return true;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"schema_version",
       [](ExperimentConfig&, const Json& v, const std::string& key) {
         if (get_as<int>(v, key) != kSchemaVersion) {
           throw ConfigError("unsupported schema_version " + v.dump());
         }
       }},
      {"command",
       [](ExperimentConfig& cfg, const Json& v, const std::string& key) {
         const auto parsed = parse_command(get_as<std::string>(v, key));
         if (!parsed) throw ConfigError("unknown command " + v.dump());
         cfg.command = *parsed;
       }},
      {"seed", field(&ExperimentConfig::seed)},
      {"output_dir",
       [](ExperimentConfig& cfg, const Json& v, const std::string& key) {
         cfg.output_dir = get_as<std::string>(v, key);
       }},
      {"jobs", field(&ExperimentConfig::jobs, non_negative)},
      {"n", field(&ExperimentConfig::n, [](int n) { return n >= 2 && n <= kMaxSpins; })},
      {"delta_GHz", field(&ExperimentConfig::delta_ghz, positive)},
      {"epsilon_max_GHz", field(&ExperimentConfig::epsilon_max_ghz, positive)},
      {"coupling_max_MHz", field(&ExperimentConfig::coupling_max_mhz, positive)},
      {"M_MHz", field(&ExperimentConfig::m_mhz, positive)},
      {"couplings", field(&ExperimentConfig::couplings)},
      {"eta", field(&ExperimentConfig::eta, non_negative)},
      {"spurious_distribution",
       field(&ExperimentConfig::spurious_distribution,
             [](const std::string& s) { return s.empty() || s == "symmetric_uniform" || s == "positive_uniform"; })},
      {"spurious_targets",
       field(&ExperimentConfig::spurious_targets,
             [](const std::string& s) {
               return s.empty() || s == "all_non_nlocal_parameters" || s == "couplings_only";
             })},
      {"grid_points", field(&ExperimentConfig::grid_points, [](int g) { return g >= 2; })},
      {"sigma_MHz", field(&ExperimentConfig::sigma_mhz, non_negative)},
      {"locality", field(&ExperimentConfig::locality, non_negative)},
      {"starts", field(&ExperimentConfig::starts, positive)},
      {"sweep_csv", field(&ExperimentConfig::sweep_csv)},
      {"sigma_grid_MHz", field(&ExperimentConfig::sigma_grid_mhz, all_positive)},
      {"realizations", field(&ExperimentConfig::realizations, positive)},
      {"head_points", field(&ExperimentConfig::head_points, [](int h) { return h >= 2; })},
      {"n_list", field(&ExperimentConfig::n_list, valid_spins)},
      {"eta_grid", field(&ExperimentConfig::eta_grid, all_non_negative)},
      {"T2_ns",
       [](ExperimentConfig& cfg, const Json& v, const std::string& key) {
         // JSON has no infinity; null, "inf" and non-positive entries mean a closed system.
         std::vector<double> out;
         const Json list = v.is_array() ? v : Json::array({v});
         for (const Json& item : list) {
           if (item.is_null() || (item.is_string() && item.get<std::string>() == "inf")) {
             out.push_back(std::numeric_limits<double>::infinity());
           } else {
             const double t2 = get_as<double>(item, key);
             out.push_back(t2 > 0.0 ? t2 : std::numeric_limits<double>::infinity());
           }
         }
         if (out.empty()) throw ConfigError("field 'T2_ns' is empty");
         cfg.t2_ns = std::move(out);
       }},
      {"t_end_ns", field(&ExperimentConfig::t_end_ns, positive)},
      {"sample_interval_ns", field(&ExperimentConfig::sample_interval_ns, positive)},
      {"steps_per_timescale", field(&ExperimentConfig::steps_per_timescale, positive)},
      {"time_series", field(&ExperimentConfig::time_series)},
  };
  return table;
}

DefaultSpecOptions system_options(const ExperimentConfig& cfg) {
  DefaultSpecOptions o;
  o.delta = units::ghz(cfg.delta_ghz);
  o.epsilon_max = units::ghz(cfg.epsilon_max_ghz);
  o.coupling_max = units::mhz(cfg.coupling_max_mhz);
  o.M = units::mhz(cfg.m_mhz);
  o.with_couplings = cfg.couplings;
  return o;
}

SpuriousModel spurious_model(const ExperimentConfig& cfg) {
  SpuriousModel m;
  m.eta = cfg.eta;
  m.distribution = cfg.spurious_distribution == "positive_uniform" ? SpuriousDistribution::positive_uniform
                                                                    : SpuriousDistribution::symmetric_uniform;
  m.targets = cfg.spurious_targets == "couplings_only" ? SpuriousTargets::couplings_only
                                                       : SpuriousTargets::all_non_nlocal_parameters;
  return m;
}

FitOptions fit_options(const ExperimentConfig& cfg) {
  FitOptions o;
  o.targets = spurious_model(cfg).targets;
  o.eta = cfg.eta;
  o.starts = cfg.starts;
  o.jobs = cfg.jobs;
  o.seed = derive_seed(cfg.seed, {kFitStarts});
  return o;
}

ThresholdOptions threshold_options(const ExperimentConfig& cfg) {
  ThresholdOptions o;
  o.grid_points = cfg.grid_points;
  o.head_points = cfg.head_points;
  o.fit = fit_options(cfg);
  o.jobs = cfg.jobs;
  return o;
}

std::vector<double> sigma_grid_ghz(const ExperimentConfig& cfg) {
  if (cfg.sigma_grid_mhz.empty()) return default_sigma_grid();
  std::vector<double> out;
  for (double s : cfg.sigma_grid_mhz) out.push_back(s * 1e-3);
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(const std::filesystem::path& root) : root_(root) {
    std::filesystem::create_directories(root_);
  }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    const auto path = root_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    writer(out);
    if (!out) throw std::runtime_error("write failed for " + path.string());
    files_.push_back(path);
  }

  void write_json(const std::string& name, const Json& doc) {
    write(name, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  }

  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::filesystem::path> files_;
};

SpectroscopySweep make_sweep(const ExperimentConfig& cfg, SpinSystemSpec& spec) {
  spec = noisy_study_spec(cfg.n, cfg.seed, spurious_model(cfg), system_options(cfg));
  SweepOptions o;
  o.jobs = cfg.jobs;
  return generate_sweep(spec, cfg.grid_points, units::mhz(cfg.sigma_mhz),
                        derive_seed(cfg.seed, {kSweepNoise}), o);
}

void run_sweep(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  SpinSystemSpec spec;
  const SpectroscopySweep sweep = make_sweep(cfg, spec);
  out.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, sweep); });
  out.write_json("sweep.csv.json", sweep_sidecar(sweep, spec));
  log << "sweep: " << sweep.values.size() << " points\n";
}

void run_fit(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  SpinSystemSpec spec;
  SpectroscopySweep sweep;
  if (!cfg.sweep_csv.empty()) {
    std::ifstream csv(cfg.sweep_csv);
    std::ifstream side(cfg.sweep_csv + ".json");
    if (!csv || !side) throw ConfigError("cannot read sweep " + cfg.sweep_csv + " and its .json sidecar");
    Json sidecar;
    try {
      sidecar = Json::parse(side);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("sweep sidecar: ") + e.what());
    }
    sweep = read_sweep(csv, sidecar);
    spec = spec_from_json(sidecar.at("spec"));
  } else {
    sweep = make_sweep(cfg, spec);
  }
  std::vector<int> models;
  if (cfg.locality == 0) {
    models = {spec.n, spec.n - 1};
  } else if (cfg.locality <= spec.n) {
    models = {cfg.locality};
  } else {
    throw ConfigError("locality exceeds n");
  }
  for (int k : models) {
    const FitOutcome fit = fit_model(sweep, spec, k, fit_options(cfg));
    out.write_json("fit_k" + std::to_string(k) + ".json", fit_to_json(fit));
    log << "fit k=" << k << ": deviation " << units::to_mhz(fit.deviation_vs_clean) << " MHz\n";
  }
}

void run_threshold(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  const SpinSystemSpec spec = noisy_study_spec(cfg.n, cfg.seed, spurious_model(cfg), system_options(cfg));
  const ThresholdCurve curve =
      threshold_scan(spec, sigma_grid_ghz(cfg), cfg.realizations, cfg.seed, threshold_options(cfg));
  out.write("threshold.csv", [&](std::ostream& os) { write_threshold_csv(os, curve); });
  Json summary = threshold_summary(curve);
  summary["n"] = cfg.n;
  out.write_json("threshold_summary.json", summary);
  log << "sigma_c = " << curve.sigma_c * 1e3 << " MHz\n";
}

void run_scaling(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  ScalingOptions o;
  o.sigma_grid = sigma_grid_ghz(cfg);
  o.realizations = cfg.realizations;
  o.spurious = spurious_model(cfg);
  o.system = system_options(cfg);
  o.threshold = threshold_options(cfg);
  const ScalingResult result = scaling_study(cfg.n_list, o, cfg.seed);
  out.write("scaling.csv", [&](std::ostream& os) { write_scaling_csv(os, result); });
  Json summary = Json::object();
  for (const auto& [n, curve] : result.curves) {
    out.write("threshold_n" + std::to_string(n) + ".csv",
              [&](std::ostream& os) { write_threshold_csv(os, curve); });
    summary[std::to_string(n)] = threshold_summary(curve);
    log << "n=" << n << " sigma_c = " << curve.sigma_c * 1e3 << " MHz\n";
  }
  out.write_json("scaling_summary.json", summary);
}

void run_spurious(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  SpuriousOptions o;
  if (cfg.spurious_distribution == "symmetric_uniform") o.distribution = SpuriousDistribution::symmetric_uniform;
  if (cfg.spurious_distribution == "positive_uniform") o.distribution = SpuriousDistribution::positive_uniform;
  if (cfg.spurious_targets == "all_non_nlocal_parameters") o.targets = SpuriousTargets::all_non_nlocal_parameters;
  if (cfg.spurious_targets == "couplings_only") o.targets = SpuriousTargets::couplings_only;
  o.threshold = threshold_options(cfg);
  SpuriousModel none = spurious_model(cfg);
  none.eta = 0.0;
  const SpinSystemSpec base = noisy_study_spec(cfg.n, cfg.seed, none, system_options(cfg));
  const double sigma = cfg.sigma_mhz > 0.0 ? cfg.sigma_mhz : 5.0;
  const auto points = spurious_sensitivity(base, cfg.eta_grid, sigma * 1e-3, cfg.realizations, cfg.seed, o);
  out.write("spurious.csv", [&](std::ostream& os) { write_spurious_csv(os, points); });
  for (const SpuriousPoint& p : points) log << "eta=" << p.eta << " gap " << p.gap() << " MHz\n";
}

std::string t2_tag(double t2) {
  if (!std::isfinite(t2)) return "inf";
  return format_double(t2);
}

void run_dynamics(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  DefaultSpecOptions sys = system_options(cfg);
  const SpinSystemSpec spec = default_spec(cfg.n, derive_seed(cfg.seed, {kDynamicsSpec}), sys);
  const double omega = resonant_frequency(spec);
  const DriveSpec drive = DriveSpec::nlocal(cfg.n, units::mhz(cfg.m_mhz), omega);
  IntegratorConfig integrator;
  integrator.sample_interval = cfg.sample_interval_ns;
  integrator.steps_per_timescale = cfg.steps_per_timescale;

  std::vector<ContrastReport> reports(cfg.t2_ns.size());
  parallel_for(reports.size(), cfg.jobs, [&](std::size_t i) {
    LindbladSpec lindblad;
    lindblad.t2 = cfg.t2_ns[i];
    reports[i] = evolve_lindblad(spec, drive, lindblad, cfg.t_end_ns,
                                 ProductXState::uniform(cfg.n, XSign::minus), integrator);
  });

  std::vector<ContrastCell> cells;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    cells.push_back({cfg.n, cfg.t2_ns[i], reports[i].contrast});
    if (cfg.time_series) {
      out.write("timeseries_n" + std::to_string(cfg.n) + "_T2_" + t2_tag(cfg.t2_ns[i]) + ".csv",
                [&](std::ostream& os) { write_time_series_csv(os, reports[i]); });
    }
    if (reports[i].positivity_violated) {
      log << "warning: T2=" << cfg.t2_ns[i] << " density matrix min eigenvalue "
          << reports[i].min_eigenvalue << '\n';
    }
    log << "T2=" << cfg.t2_ns[i] << " ns contrast " << reports[i].contrast << '\n';
  }
  out.write("dynamics.csv", [&](std::ostream& os) { write_contrast_csv(os, cells); });
}

void run_bound(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
  const double delta = units::ghz(cfg.delta_ghz);
  const double eps_max = units::ghz(cfg.epsilon_max_ghz);
  const double M = units::mhz(cfg.m_mhz);
  const double cos_mean = mean_cos_theta(delta, eps_max);
  out.write("bound.csv", [&](std::ostream& os) {
    os << "n,mean_cos_theta,bound_MHz,detectability_margin,detectable\n";
    for (int n : cfg.n_list) {
      const Detectability d = detectability_criterion(M, cfg.eta * M, delta, n);
      os << n << ',' << format_double(cos_mean) << ','
         << format_double(units::to_mhz(analytic_bound(n, M, delta, eps_max))) << ','
         << format_double(d.margin) << ',' << (d.detectable ? 1 : 0) << '\n';
    }
  });
  log << "<cos theta> = " << cos_mean << '\n';
}

}  // namespace

std::string command_name(Command command) {
  for (const auto& [c, name] : kCommands) {
    if (c == command) return name;
  }
  return "unknown";
}

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [c, text] : kCommands) {
    if (name == text) return c;
  }
  return std::nullopt;
}

ExperimentConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown field '" + key + "'");
    it->second(cfg, value, key);
  }
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json t2 = Json::array();
  for (double v : cfg.t2_ns) t2.push_back(std::isfinite(v) ? Json(v) : Json("inf"));
  return {{"schema_version", kSchemaVersion},
          {"command", command_name(cfg.command)},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir.string()},
          {"jobs", cfg.jobs},
          {"n", cfg.n},
          {"delta_GHz", cfg.delta_ghz},
          {"epsilon_max_GHz", cfg.epsilon_max_ghz},
          {"coupling_max_MHz", cfg.coupling_max_mhz},
          {"M_MHz", cfg.m_mhz},
          {"couplings", cfg.couplings},
          {"eta", cfg.eta},
          {"spurious_distribution", cfg.spurious_distribution},
          {"spurious_targets", cfg.spurious_targets},
          {"grid_points", cfg.grid_points},
          {"sigma_MHz", cfg.sigma_mhz},
          {"locality", cfg.locality},
          {"starts", cfg.starts},
          {"sweep_csv", cfg.sweep_csv},
          {"sigma_grid_MHz", cfg.sigma_grid_mhz},
          {"realizations", cfg.realizations},
          {"head_points", cfg.head_points},
          {"n_list", cfg.n_list},
          {"eta_grid", cfg.eta_grid},
          {"T2_ns", t2},
          {"t_end_ns", cfg.t_end_ns},
          {"sample_interval_ns", cfg.sample_interval_ns},
          {"steps_per_timescale", cfg.steps_per_timescale},
          {"time_series", cfg.time_series}};
}

RunSummary run(const ExperimentConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  OutputDir out(config.output_dir);
  switch (config.command) {
    case Command::sweep: run_sweep(config, out, log); break;
    case Command::fit: run_fit(config, out, log); break;
    case Command::threshold: run_threshold(config, out, log); break;
    case Command::scaling: run_scaling(config, out, log); break;
    case Command::spurious: run_spurious(config, out, log); break;
    case Command::dynamics: run_dynamics(config, out, log); break;
    case Command::bound: run_bound(config, out, log); break;
  }
  RunSummary summary;
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json files = Json::array();
  for (const auto& f : out.files()) files.push_back(f.filename().string());
  out.write_json("manifest.json", {{"config", config_to_json(config)},
                                   {"seed", config.seed},
                                   {"version", NLOCAL_VERSION},
                                   {"wall_time_s", summary.wall_seconds},
                                   {"files", files}});
  summary.files = out.files();
  return summary;
}

}  // namespace nlocal::cli
