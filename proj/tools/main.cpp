#include "experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlocal::Json;
using nlocal::cli::ConfigError;

constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

// Flags are collected as JSON fragments so that they go through the same
// schema check as a config file and override it key by key.
class FlagSet {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    entries_.push_back({opt, key, [value] { return Json(*value); }});
  }

  void add_bool(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(flag, *value, help);
    entries_.push_back({opt, key, [value] { return Json(*value); }});
  }

  void merge_into(Json& doc) const {
    for (const Entry& e : entries_) {
      if (e.option->count() > 0) doc[e.key] = e.value();
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::function<Json()> value;
  };
  std::vector<Entry> entries_;
};

void add_system_flags(FlagSet& f, CLI::App* app) {
  f.add<int>(app, "--n", "n", "number of spins");
  f.add<double>(app, "--delta-ghz", "delta_GHz", "transverse field delta (GHz)");
  f.add<double>(app, "--eps-max-ghz", "epsilon_max_GHz", "maximum longitudinal field (GHz)");
  f.add<double>(app, "--j-max-mhz", "coupling_max_MHz", "coupling draw range (MHz)");
  f.add<double>(app, "--m-mhz", "M_MHz", "n-local coupling M (MHz)");
  f.add<bool>(app, "--couplings", "couplings", "draw lower-order couplings (true/false)");
}

void add_spurious_flags(FlagSet& f, CLI::App* app) {
  f.add<double>(app, "--eta", "eta", "spurious amplitude relative to M");
  f.add<std::string>(app, "--spurious-distribution", "spurious_distribution",
                     "symmetric_uniform | positive_uniform");
  f.add<std::string>(app, "--spurious-targets", "spurious_targets",
                     "all_non_nlocal_parameters | couplings_only");
}

void add_fit_flags(FlagSet& f, CLI::App* app) {
  f.add<int>(app, "--grid-points", "grid_points", "epsilon grid points per configuration");
  f.add<int>(app, "--starts", "starts", "multistart count per fit");
}

void add_study_flags(FlagSet& f, CLI::App* app) {
  f.add<std::vector<double>>(app, "--sigma-grid-mhz", "sigma_grid_MHz", "noise amplitudes (MHz)");
  f.add<int>(app, "--realizations", "realizations", "noise realizations per sigma");
  f.add<int>(app, "--head-points", "head_points", "leading points of the sub-local line");
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n-local coupling detection experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NLOCAL_VERSION);

  std::string config_path;
  FlagSet common;

  std::vector<CLI::App*> subs;
  std::vector<FlagSet> flags;
  auto subcommand = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    common.add<std::uint64_t>(sub, "--seed", "seed", "run seed (fallback: NLOCAL_SEED)");
    common.add<std::string>(sub, "--out", "output_dir", "output directory");
    common.add<int>(sub, "--jobs", "jobs", "worker threads (0 = all cores)");
    subs.push_back(sub);
    flags.emplace_back();
    return std::pair{sub, &flags.back()};
  };
  flags.reserve(7);

  {
    auto [sub, f] = subcommand("sweep", "generate a spectroscopy sweep");
    add_system_flags(*f, sub);
    add_spurious_flags(*f, sub);
    add_fit_flags(*f, sub);
    f->add<double>(sub, "--sigma-mhz", "sigma_MHz", "Gaussian noise per point (MHz)");
  }
  {
    auto [sub, f] = subcommand("fit", "fit k-local models to a sweep");
    add_system_flags(*f, sub);
    add_spurious_flags(*f, sub);
    add_fit_flags(*f, sub);
    f->add<double>(sub, "--sigma-mhz", "sigma_MHz", "Gaussian noise per point (MHz)");
    f->add<int>(sub, "--k", "locality", "model locality (default: both n and n-1)");
    f->add<std::string>(sub, "--sweep", "sweep_csv", "sweep CSV written by `sweep`");
  }
  {
    auto [sub, f] = subcommand("threshold", "noise threshold sigma_c for one n");
    add_system_flags(*f, sub);
    add_spurious_flags(*f, sub);
    add_fit_flags(*f, sub);
    add_study_flags(*f, sub);
  }
  {
    auto [sub, f] = subcommand("scaling", "sigma_c versus n");
    add_system_flags(*f, sub);
    add_spurious_flags(*f, sub);
    add_fit_flags(*f, sub);
    add_study_flags(*f, sub);
    f->add<std::vector<int>>(sub, "--n-list", "n_list", "spin counts");
  }
  {
    auto [sub, f] = subcommand("spurious", "model gap versus spurious amplitude");
    add_system_flags(*f, sub);
    add_spurious_flags(*f, sub);
    add_fit_flags(*f, sub);
    f->add<double>(sub, "--sigma-mhz", "sigma_MHz", "fixed noise amplitude (MHz, default 5)");
    f->add<int>(sub, "--realizations", "realizations", "noise realizations per eta");
    f->add<std::vector<double>>(sub, "--eta-grid", "eta_grid", "spurious amplitudes");
  }
  {
    auto [sub, f] = subcommand("dynamics", "driven Lindblad evolution and state contrast");
    add_system_flags(*f, sub);
    f->add<std::vector<std::string>>(sub, "--t2", "T2_ns", "coherence times in ns (inf = closed)");
    f->add<double>(sub, "--t-end", "t_end_ns", "evolution window (ns)");
    f->add<double>(sub, "--sample-interval", "sample_interval_ns", "output spacing (ns)");
    f->add<int>(sub, "--steps-per-timescale", "steps_per_timescale", "RK4 resolution");
    f->add<bool>(sub, "--time-series", "time_series", "write per-run population CSVs (true/false)");
  }
  {
    auto [sub, f] = subcommand("bound", "analytic threshold scale and detectability");
    add_system_flags(*f, sub);
    f->add<double>(sub, "--eta", "eta", "spurious amplitude relative to M");
    f->add<std::vector<int>>(sub, "--n-list", "n_list", "spin counts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::size_t chosen = 0;
  while (chosen < subs.size() && !subs[chosen]->parsed()) ++chosen;

  try {
    Json doc = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        doc = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
      if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    if (!doc.contains("seed")) {
      const std::string env = env_or_empty("NLOCAL_SEED");
      if (!env.empty()) {
        try {
          doc["seed"] = std::stoull(env);
        } catch (const std::exception&) {
          throw ConfigError("NLOCAL_SEED is not an unsigned integer: " + env);
        }
      }
    }
    common.merge_into(doc);
    flags[chosen].merge_into(doc);
    const std::string name = subs[chosen]->get_name();
    if (doc.contains("command") && doc["command"] != name) {
      throw ConfigError("config command " + doc["command"].dump() + " does not match subcommand " + name);
    }
    doc["command"] = name;
    // A single T2 value given on the command line arrives as strings.
    if (doc.contains("T2_ns") && doc["T2_ns"].is_array()) {
      for (Json& v : doc["T2_ns"]) {
        if (v.is_string() && v.get<std::string>() != "inf") {
          try {
            v = std::stod(v.get<std::string>());
          } catch (const std::exception&) {
            throw ConfigError("T2 value is not a number: " + v.dump());
          }
        }
      }
    }
    const nlocal::cli::ExperimentConfig cfg = nlocal::cli::config_from_json(doc);

    try {
      const auto summary = nlocal::cli::run(cfg, std::cerr);
      for (const auto& f : summary.files) std::cout << f.string() << '\n';
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitNumerical;
    }
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
