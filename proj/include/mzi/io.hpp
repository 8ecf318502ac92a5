#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mzi/dephasing.hpp"
#include "mzi/metrology.hpp"

namespace mzi::io {

inline constexpr double kMetersPerNanometer = 1e-9;

inline double nm_to_m(double nm) { return nm * kMetersPerNanometer; }
inline double m_to_nm(double m) { return m / kMetersPerNanometer; }

/// Shortest decimal form that parses back to the same double; "inf" for
/// +infinity, "nan" for NaN.
std::string format_number(double value);
/// "na" for an absent value.
std::string format_number(const std::optional<double>& value);

/// Comma-separated rows terminated by LF. Cells are never quoted, so they must
/// not contain commas, quotes or line breaks.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  std::size_t columns() const { return columns_; }

 private:
  void write(const std::vector<std::string>& cells);

  std::ostream& out_;
  std::size_t columns_;
};

/// tau, re_kappa, im_kappa, abs_kappa, trace_distance
void write_trajectory_csv(std::ostream& out, const DecoherenceTrajectory& kappa_j,
                          std::span<const double> trace_distances);

/// delta_x_nm, p0, n0, n1, concurrence, sens_p_nm, sens_n_nm, qcrb_m1_nm,
/// class0, class1. Record coordinates are written as delta_x_nm verbatim, so
/// sweeps must be specified in nanometers.
void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);

struct SensitivityBlock {
  double noise_fw = 0.0;
  std::vector<SweepRecord> records;
};

/// Long format, one row group per noise width: delta_x_nm, noise_fw,
/// sens_n_nm, sens_p_nm, qcrb_m1_nm, delta_n_std, dn_ddx (per nm).
void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityBlock> blocks);

/// Parameters and provenance stored next to every output file.
struct RunManifest {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string tool_version = MZI_VERSION;
  std::string timestamp;  ///< ISO 8601, UTC
};

std::string utc_timestamp();

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// Path of the manifest that accompanies `output`.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace mzi::io
