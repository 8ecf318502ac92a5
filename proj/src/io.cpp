#include "mzi/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "mzi/errors.hpp"

namespace mzi::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buffer, end);
}

std::string format_number(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string("na");
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  write(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error("CSV row has the wrong number of cells");
  write(cells);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\"\r\n") != std::string::npos) throw Error("CSV cell needs quoting: " + cells[i]);
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void write_trajectory_csv(std::ostream& out, const DecoherenceTrajectory& kappa_j,
                          std::span<const double> trace_distances) {
  if (trace_distances.size() != kappa_j.values.size()) throw Error("trajectory columns differ in length");
  CsvWriter csv(out, {"tau", "re_kappa", "im_kappa", "abs_kappa", "trace_distance"});
  for (std::size_t k = 0; k < kappa_j.values.size(); ++k) {
    const Complex z = kappa_j.values[k];
    csv.row({format_number(kappa_j.grid.at(k)), format_number(z.real()), format_number(z.imag()),
             format_number(std::abs(z)), format_number(trace_distances[k])});
  }
}

namespace {

std::optional<double> per_nm(const std::optional<double>& per_m) {
  if (!per_m) return std::nullopt;
  return *per_m * kMetersPerNanometer;
}

std::optional<double> in_nm(const std::optional<double>& m) {
  if (!m) return std::nullopt;
  return m_to_nm(*m);
}

}  // namespace

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
  CsvWriter csv(out, {"delta_x_nm", "p0", "n0", "n1", "concurrence", "sens_p_nm", "sens_n_nm", "qcrb_m1_nm",
                      "class0", "class1"});
  for (const SweepRecord& r : records) {
    csv.row({format_number(r.coordinate), format_number(r.p0), format_number(r.n0), format_number(r.n1),
             format_number(r.concurrence), format_number(m_to_nm(r.sens_p)), format_number(in_nm(r.sens_n)),
             format_number(m_to_nm(r.qcrb_m1)), std::string(to_string(r.classes.first)),
             std::string(to_string(r.classes.second))});
  }
}

void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityBlock> blocks) {
  CsvWriter csv(out, {"delta_x_nm", "noise_fw", "sens_n_nm", "sens_p_nm", "qcrb_m1_nm", "delta_n_std", "dn_ddx"});
  for (const SensitivityBlock& block : blocks) {
    for (const SweepRecord& r : block.records) {
      csv.row({format_number(r.coordinate), format_number(block.noise_fw), format_number(in_nm(r.sens_n)),
               format_number(m_to_nm(r.sens_p)), format_number(m_to_nm(r.qcrb_m1)), format_number(r.delta_n_std),
               format_number(per_nm(r.dn_ddx))});
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

nlohmann::json to_json(const RunManifest& manifest) {
  return nlohmann::json{{"command", manifest.command},
                        {"params", manifest.params},
                        {"seed", manifest.seed},
                        {"tool_version", manifest.tool_version},
                        {"timestamp", manifest.timestamp}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.params = j.at("params");
    if (!m.params.is_object()) throw ConfigError("manifest params must be an object");
    m.seed = j.value("seed", std::uint64_t{0});
    m.tool_version = j.value("tool_version", std::string{});
    m.timestamp = j.value("timestamp", std::string{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << to_json(manifest).dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace mzi::io
