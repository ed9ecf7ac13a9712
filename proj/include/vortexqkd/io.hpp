#pragma once

// Run configuration file and machine-readable outputs (JSON reports, CSV
// tables). Numbers are written in shortest round-trip form unless noted.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortexqkd/channel.hpp"
#include "vortexqkd/protocol.hpp"
#include "vortexqkd/security.hpp"

namespace vortexqkd {

inline constexpr int kSchemaVersion = 1;

/// Parsed configuration document. Fields left unset are resolved at run time:
/// eta from `target_gain_mu`, misalignment from `target_qber`.
struct RunConfig {
  double mu = 0.053;
  double nu = 0.017;
  IntensityProbs intensity_probs;
  std::optional<double> eta;
  double dark_rate_hz = 67.0;
  double window_ns = 1.15;
  double jitter_fwhm_ps = 350.0;
  double path_delay_ns = 3.05;
  std::optional<double> misalignment_rad;
  std::uint64_t pulses = 1'000'000;
  std::uint64_t seed = 1;

  double qplate_charge = 0.5;
  std::optional<int> l_max;

  double target_gain_mu = 4.03e-3;
  double target_qber = 0.006;

  TallySettings analysis;

  OpticsConfig optics() const;
  /// Session parameters with eta and misalignment calibrated when unset.
  SessionConfig resolve() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ValidationError on unknown keys, wrong types, or a schema version
/// other than kSchemaVersion.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& config);

/// Observables document: the fields of Observables by name, with an optional
/// "std_errors" object.
Observables parse_observables(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const Observables& obs);

nlohmann::ordered_json to_json(const TallyTable& tally);
nlohmann::ordered_json to_json(const KeyRateReport& report);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

std::string crosstalk_csv(const CrosstalkTable& table);
std::string records_csv(const std::vector<PulseRecord>& records);
std::string timing_csv(const TimingProfile& profile);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace vortexqkd
