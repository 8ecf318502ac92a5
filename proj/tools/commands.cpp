#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mzi/dephasing.hpp"
#include "mzi/errors.hpp"
#include "mzi/io.hpp"
#include "mzi/metrology.hpp"
#include "mzi/noise_mc.hpp"
#include "mzi/nonmarkovianity.hpp"
#include "mzi/parallel.hpp"

namespace mzi::cli {

namespace {

using nlohmann::json;

// Flags bound to JSON keys. Only flags given on the command line are
// collected, so they override config-file and manifest values.
class FlagSet {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto slot = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *slot, help);
    emitters_.push_back([slot, key, opt](json& j) {
      if (opt->count() > 0) j[key] = *slot;
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto slot = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(flag, *slot, help);
    emitters_.push_back([slot, key, opt](json& j) {
      if (opt->count() > 0) j[key] = *slot;
    });
    return opt;
  }

  json collect() const {
    json j = json::object();
    for (const auto& emit : emitters_) emit(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> emitters_;
};

// Merged parameters plus the record of every value actually used.
class Params {
 public:
  explicit Params(json merged) : merged_(std::move(merged)) {}

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    T value = fallback;
    if (merged_.contains(key)) value = convert<T>(key, merged_.at(key));
    resolved_[key] = value;
    return value;
  }

  template <typename T>
  T require(const std::string& key) {
    if (!merged_.contains(key)) throw ConfigError(key + " is required");
    T value = convert<T>(key, merged_.at(key));
    resolved_[key] = value;
    return value;
  }

  std::vector<double> number_list(const std::string& key, std::optional<std::vector<double>> fallback) {
    std::vector<double> values;
    if (merged_.contains(key)) {
      const json& v = merged_.at(key);
      values = v.is_array() ? convert<std::vector<double>>(key, v) : std::vector<double>{convert<double>(key, v)};
    } else if (fallback) {
      values = *fallback;
    } else {
      throw ConfigError(key + " is required");
    }
    resolved_[key] = values;
    return values;
  }

  bool has(const std::string& key) const { return merged_.contains(key); }
  const json& resolved() const { return resolved_; }

 private:
  template <typename T>
  static T convert(const std::string& key, const json& v) {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key + " has the wrong type");
    }
  }

  json merged_;
  json resolved_ = json::object();
};

struct CommonOptions {
  std::string config_file;
  std::string manifest_file;
  std::string output;
};

void add_common(CLI::App* app, CommonOptions& common, FlagSet& flags, bool with_output = true) {
  app->add_option("--config", common.config_file, "flat JSON file with snake_case parameter keys");
  app->add_option("--manifest", common.manifest_file, "re-run the parameters recorded in a manifest");
  if (with_output) app->add_option("-o,--output", common.output, "output file (default: stdout)");
  flags.add<double>(app, "--mu-hz", "mu_hz", "center frequency [Hz]");
  flags.add<double>(app, "--sigma-hz", "sigma_hz", "spectral standard deviation [Hz]");
  flags.add<double>(app, "--delta-n", "delta_n", "birefringence n_H - n_V");
}

void add_grid(CLI::App* app, FlagSet& flags) {
  flags.add<double>(app, "--tau-min", "tau_min", "first dimensionless time");
  flags.add<double>(app, "--tau-max", "tau_max", "last dimensionless time");
  flags.add<double>(app, "--tau-step", "tau_step", "dimensionless time step");
}

void add_sweep_range(CLI::App* app, FlagSet& flags) {
  flags.add<double>(app, "--delta-x-min-nm", "delta_x_min_nm", "first path difference [nm]");
  flags.add<double>(app, "--delta-x-max-nm", "delta_x_max_nm", "last path difference [nm]");
  flags.add<std::size_t>(app, "--steps", "steps", "number of sweep points");
  flags.add<double>(app, "--fd-step-nm", "fd_step_nm", "finite-difference step for dN/d(dx) [nm]");
}

void add_noise(CLI::App* app, FlagSet& flags, bool repeatable_fw) {
  if (repeatable_fw)
    flags.add<std::vector<double>>(app, "--noise-fw", "noise_fw", "noise full width (repeatable)");
  else
    flags.add<double>(app, "--noise-fw", "noise_fw", "noise full width");
  flags.add<std::size_t>(app, "--reps", "reps", "Monte-Carlo repetitions per point");
  flags.add<std::uint64_t>(app, "--seed", "seed", "random seed");
  flags.add<std::size_t>(app, "--max-redraws", "max_redraws", "cap on noise redraws per state");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// manifest < config file < flags
Params merge_sources(const std::string& command, const CommonOptions& common, const FlagSet& flags) {
  json merged = json::object();
  if (!common.manifest_file.empty()) {
    const io::RunManifest manifest = io::read_manifest(common.manifest_file);
    if (manifest.command != command)
      throw ConfigError("manifest was written by '" + manifest.command + "', not '" + command + "'");
    merged.update(manifest.params);
  }
  if (!common.config_file.empty()) merged.update(load_json_file(common.config_file));
  merged.update(flags.collect());
  return Params(std::move(merged));
}

PhysicalConfig physical_config(Params& p, double delta_x_nm) {
  PhysicalConfig config;
  config.mu = p.get("mu_hz", config.mu);
  config.sigma = p.get("sigma_hz", config.sigma);
  config.delta_n = p.get("delta_n", config.delta_n);
  config.delta_x = io::nm_to_m(delta_x_nm);
  config.validate();
  return config;
}

TimeGrid time_grid(Params& p) {
  TimeGrid grid;
  grid.tau_min = p.get("tau_min", grid.tau_min);
  grid.tau_max = p.get("tau_max", grid.tau_max);
  grid.tau_step = p.get("tau_step", grid.tau_step);
  grid.validate();
  return grid;
}

QfiMode qfi_mode(Params& p) {
  const std::string mode = p.get<std::string>("mode", "single-arm");
  if (mode == "single-arm") return QfiMode::SingleArm;
  if (mode == "symmetric") return QfiMode::Symmetric;
  throw ConfigError("mode must be 'single-arm' or 'symmetric'");
}

std::string_view mode_name(QfiMode mode) { return mode == QfiMode::SingleArm ? "single-arm" : "symmetric"; }

NoiseConfig noise_config(Params& p, double full_width, const TimeGrid& grid) {
  NoiseConfig noise;
  noise.full_width = full_width;
  noise.repetitions = p.get<std::size_t>("reps", noise.repetitions);
  noise.seed = p.get<std::uint64_t>("seed", noise.seed);
  noise.max_redraws = p.get<std::size_t>("max_redraws", noise.max_redraws);
  noise.grid = grid;
  noise.validate();
  return noise;
}

SweepSpec sweep_spec(Params& p, double min_nm, double max_nm, std::size_t steps, const TimeGrid& grid) {
  SweepSpec spec;
  spec.delta_x_min = min_nm;
  spec.delta_x_max = max_nm;
  spec.unit = io::kMetersPerNanometer;
  spec.steps = steps;
  spec.j = path_from_int(p.get("path", 0));
  spec.grid = grid;
  spec.fd_step = io::nm_to_m(p.get("fd_step_nm", 0.1));
  spec.qfi_mode = qfi_mode(p);
  return spec;
}

// Writes `body` to the output file (plus its manifest) or to `out`.
void emit(const CommonOptions& common, const std::string& command, const Params& p, std::uint64_t seed,
          std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (common.output.empty()) {
    body(out);
    return;
  }
  std::ostringstream buffer;
  body(buffer);
  std::ofstream file(common.output, std::ios::binary);
  if (!file) throw Error("cannot write " + common.output);
  file << buffer.str();
  io::RunManifest manifest{command, p.resolved(), seed, MZI_VERSION, io::utc_timestamp()};
  io::write_manifest(io::manifest_path_for(common.output), manifest);
}

// --- commands -----------------------------------------------------------------

void write_trajectory(std::ostream& out, const PhysicalConfig& config, Path j, const TimeGrid& grid) {
  const DecoherenceTrajectory kappa_j = kappa_path_trajectory(config, j, grid);
  std::vector<double> distances(kappa_j.values.size());
  for (std::size_t k = 0; k < distances.size(); ++k) {
    distances[k] = trace_distance(apply_dephasing(QubitState::plus(), kappa_j.values[k]),
                                  apply_dephasing(QubitState::minus(), kappa_j.values[k]));
  }
  io::write_trajectory_csv(out, kappa_j, distances);
}

void run_trajectory(const CommonOptions& common, const FlagSet& flags, std::ostream& out) {
  Params p = merge_sources("trajectory", common, flags);
  const PhysicalConfig config = physical_config(p, p.get("delta_x_nm", 0.0));
  const Path j = path_from_int(p.get("path", 0));
  const TimeGrid grid = time_grid(p);
  emit(common, "trajectory", p, 0, out, [&](std::ostream& o) { write_trajectory(o, config, j, grid); });
}

void check_ensembles(std::span<const SweepRecord> records) {
  for (const SweepRecord& r : records) {
    if (r.ensemble_failed) {
      throw EnsembleFailure("more than half of the Monte-Carlo repetitions failed at delta_x_nm = " +
                            io::format_number(r.coordinate));
    }
  }
}

void run_sweep(const CommonOptions& common, const FlagSet& flags, std::ostream& out) {
  Params p = merge_sources("sweep", common, flags);
  const PhysicalConfig config = physical_config(p, 0.0);
  const TimeGrid grid = time_grid(p);
  const double min_nm = p.require<double>("delta_x_min_nm");
  const double max_nm = p.require<double>("delta_x_max_nm");
  SweepSpec spec = sweep_spec(p, min_nm, max_nm, p.get<std::size_t>("steps", 101), grid);
  std::uint64_t seed = 0;
  if (p.has("noise_fw")) {
    spec.noise = noise_config(p, p.require<double>("noise_fw"), grid);
    seed = spec.noise->seed;
  }
  const std::vector<SweepRecord> records = sweep(spec, config, default_thread_count());
  check_ensembles(records);
  emit(common, "sweep", p, seed, out, [&](std::ostream& o) { io::write_sweep_csv(o, records); });
}

std::vector<io::SensitivityBlock> sensitivity_blocks(Params& p, const PhysicalConfig& config, const SweepSpec& base,
                                                     std::span<const double> widths, const TimeGrid& grid) {
  std::vector<io::SensitivityBlock> blocks;
  for (double fw : widths) {
    SweepSpec spec = base;
    spec.noise = noise_config(p, fw, grid);
    blocks.push_back({fw, sweep(spec, config, default_thread_count())});
    check_ensembles(blocks.back().records);
  }
  return blocks;
}

void run_sensitivity(const CommonOptions& common, const FlagSet& flags, std::ostream& out) {
  Params p = merge_sources("sensitivity", common, flags);
  const PhysicalConfig config = physical_config(p, 0.0);
  const TimeGrid grid = time_grid(p);
  const std::vector<double> widths = p.number_list("noise_fw", std::nullopt);
  const double min_nm = p.require<double>("delta_x_min_nm");
  const double max_nm = p.require<double>("delta_x_max_nm");
  const SweepSpec spec = sweep_spec(p, min_nm, max_nm, p.get<std::size_t>("steps", 61), grid);
  const std::vector<io::SensitivityBlock> blocks = sensitivity_blocks(p, config, spec, widths, grid);
  const std::uint64_t seed = p.get<std::uint64_t>("seed", 0);
  emit(common, "sensitivity", p, seed, out, [&](std::ostream& o) { io::write_sensitivity_csv(o, blocks); });
}

void run_qcrb(const CommonOptions& common, const FlagSet& flags, std::ostream& out) {
  Params p = merge_sources("qcrb", common, flags);
  const PhysicalConfig config = physical_config(p, p.get("delta_x_nm", 0.0));
  const double m = p.get("m", 1.0);
  const bool oracle = p.get("oracle", false);
  const QfiMode mode = qfi_mode(p);

  const double h_closed = qfi_closed_form(config, mode);
  json result{{"h_closed", h_closed}, {"qcrb_m", qcrb(h_closed, m)}, {"m", m}, {"mode", mode_name(mode)}};
  if (oracle) {
    QfiOracleOptions options;
    options.mode = mode;
    const double h_numeric = qfi_numeric_oracle(config, options);
    result["h_numeric"] = h_numeric;
    result["qcrb_numeric_m"] = qcrb(h_numeric, m);
  }
  emit(common, "qcrb", p, 0, out, [&](std::ostream& o) { o << result.dump(2) << '\n'; });
}

void run_figures_data(const CommonOptions& common, const std::string& out_dir_flag, const FlagSet& flags,
                      std::ostream& out) {
  Params p = merge_sources("figures-data", common, flags);
  const std::filesystem::path dir = p.get<std::string>("out_dir", out_dir_flag);
  if (dir.empty()) throw ConfigError("out_dir is required");
  std::filesystem::create_directories(dir);

  const PhysicalConfig config = physical_config(p, 0.0);
  const TimeGrid grid = time_grid(p);
  const Path j = path_from_int(p.get("path", 0));
  const std::vector<double> widths = p.number_list("noise_fw", std::nullopt);
  const std::vector<double> fig3_dx = p.number_list("fig3_delta_x_nm", std::vector<double>{5060.0, 5070.0, 5080.0});
  const double fig4_min = p.get("fig4_delta_x_min_nm", 4900.0);
  const double fig4_max = p.get("fig4_delta_x_max_nm", 5250.0);
  const std::size_t fig4_steps = p.get<std::size_t>("fig4_steps", 701);
  const double fig5_min = p.get("fig5_delta_x_min_nm", 104760.0);
  const double fig5_max = p.get("fig5_delta_x_max_nm", 105060.0);
  const std::size_t fig5_steps = p.get<std::size_t>("fig5_steps", 61);

  const std::vector<SweepRecord> fig4 =
      sweep(sweep_spec(p, fig4_min, fig4_max, fig4_steps, grid), config, default_thread_count());
  const std::vector<io::SensitivityBlock> fig5 =
      sensitivity_blocks(p, config, sweep_spec(p, fig5_min, fig5_max, fig5_steps, grid), widths, grid);
  const std::uint64_t seed = p.get<std::uint64_t>("seed", 0);
  const io::RunManifest manifest{"figures-data", p.resolved(), seed, MZI_VERSION, io::utc_timestamp()};

  auto write_file = [&](const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot write " + path.string());
    body(file);
    io::write_manifest(io::manifest_path_for(path), manifest);
    out << path.string() << '\n';
  };
  for (double dx_nm : fig3_dx) {
    const PhysicalConfig at = config.with_delta_x(io::nm_to_m(dx_nm));
    write_file(dir / ("fig3_trajectory_" + io::format_number(dx_nm) + "nm.csv"),
               [&](std::ostream& o) { write_trajectory(o, at, j, grid); });
  }
  write_file(dir / "fig4_sweep.csv", [&](std::ostream& o) { io::write_sweep_csv(o, fig4); });
  write_file(dir / "fig5_sensitivity.csv", [&](std::ostream& o) { io::write_sensitivity_csv(o, fig5); });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-system Mach-Zehnder interferometer: dephasing, memory effects and sensitivity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MZI_VERSION);

  CommonOptions common;
  FlagSet traj_flags, sweep_flags, sens_flags, qcrb_flags, fig_flags;

  CLI::App* traj = app.add_subcommand("trajectory", "decoherence and trace distance of one exit path");
  add_common(traj, common, traj_flags);
  traj_flags.add<double>(traj, "--delta-x-nm", "delta_x_nm", "path difference [nm]");
  traj_flags.add<int>(traj, "--path", "path", "exit path 0 or 1");
  add_grid(traj, traj_flags);

  CLI::App* sw = app.add_subcommand("sweep", "P_0, BLP measures and sensitivities over a path-difference range");
  add_common(sw, common, sweep_flags);
  add_sweep_range(sw, sweep_flags);
  sweep_flags.add<int>(sw, "--path", "path", "exit path used for the sensitivities");
  add_grid(sw, sweep_flags);
  add_noise(sw, sweep_flags, false);
  sweep_flags.add<std::string>(sw, "--mode", "mode", "QFI convention: single-arm | symmetric");

  CLI::App* sens = app.add_subcommand("sensitivity", "Monte-Carlo sensitivity of the BLP measure vs the QCRB");
  add_common(sens, common, sens_flags);
  add_sweep_range(sens, sens_flags);
  sens_flags.add<int>(sens, "--path", "path", "exit path 0 or 1");
  add_grid(sens, sens_flags);
  add_noise(sens, sens_flags, true);
  sens_flags.add<std::string>(sens, "--mode", "mode", "QFI convention: single-arm | symmetric");

  CLI::App* qc = app.add_subcommand("qcrb", "quantum Fisher information and Cramer-Rao bound (JSON)");
  add_common(qc, common, qcrb_flags);
  qcrb_flags.add<double>(qc, "--delta-x-nm", "delta_x_nm", "path difference [nm]");
  qcrb_flags.add<double>(qc, "--m", "m", "number of measurements");
  qcrb_flags.add_flag(qc, "--oracle", "oracle", "also evaluate the QFI numerically");
  qcrb_flags.add<std::string>(qc, "--mode", "mode", "single-arm | symmetric");

  std::string out_dir;
  CLI::App* fig = app.add_subcommand("figures-data", "all CSV datasets behind the trajectory, sweep and sensitivity figures");
  add_common(fig, common, fig_flags, false);
  fig->add_option("--out-dir", out_dir, "output directory");
  fig_flags.add<int>(fig, "--path", "path", "exit path 0 or 1");
  add_grid(fig, fig_flags);
  add_noise(fig, fig_flags, true);
  fig_flags.add<std::vector<double>>(fig, "--fig3-delta-x-nm", "fig3_delta_x_nm", "trajectory path differences");
  fig_flags.add<double>(fig, "--fig4-delta-x-min-nm", "fig4_delta_x_min_nm", "sweep start [nm]");
  fig_flags.add<double>(fig, "--fig4-delta-x-max-nm", "fig4_delta_x_max_nm", "sweep end [nm]");
  fig_flags.add<std::size_t>(fig, "--fig4-steps", "fig4_steps", "sweep points");
  fig_flags.add<double>(fig, "--fig5-delta-x-min-nm", "fig5_delta_x_min_nm", "sensitivity window start [nm]");
  fig_flags.add<double>(fig, "--fig5-delta-x-max-nm", "fig5_delta_x_max_nm", "sensitivity window end [nm]");
  fig_flags.add<std::size_t>(fig, "--fig5-steps", "fig5_steps", "sensitivity window points");
  fig_flags.add<std::string>(fig, "--mode", "mode", "single-arm | symmetric");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
      if (!dynamic_cast<const CLI::CallForVersion*>(&e)) {
        for (CLI::App* sub : app.get_subcommands())
          if (sub->parsed()) out << sub->help() << '\n';
      }
      return kSuccess;
    }
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (traj->parsed()) run_trajectory(common, traj_flags, out);
    else if (sw->parsed()) run_sweep(common, sweep_flags, out);
    else if (sens->parsed()) run_sensitivity(common, sens_flags, out);
    else if (qc->parsed()) run_qcrb(common, qcrb_flags, out);
    else if (fig->parsed()) run_figures_data(common, out_dir, fig_flags, out);
    return kSuccess;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DegeneratePath& e) {
    err << "degenerate physics: " << e.what() << '\n';
    return kDegeneratePhysics;
  } catch (const EnsembleFailure& e) {
    err << "ensemble failure: " << e.what() << '\n';
    return kEnsembleFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace mzi::cli
