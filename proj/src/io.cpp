#include "vortexqkd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace vortexqkd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ValidationError(fmt::format("{} must be a JSON object", where));
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw ValidationError(fmt::format("unknown key '{}' in {}", item.key(), where));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("key '{}': {}", key, e.what()));
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value);
  out = value;
}

ordered_json bound_json(const Bound& b) {
  return {{"value", b.value}, {"clamped", b.clamped}};
}

std::string click_names(std::uint8_t clicks) {
  std::string out;
  for (int d = 0; d < 4; ++d) {
    if ((clicks >> d) & 1u) {
      if (!out.empty()) out += '|';
      out += to_string(kDetectors[static_cast<std::size_t>(d)]);
    }
  }
  return out;
}

}  // namespace

OpticsConfig RunConfig::optics() const {
  const QPlateCharge charge(qplate_charge);
  OpticsConfig o = OpticsConfig::with_charge(charge);
  if (l_max) o.truncation = OamTruncation(*l_max);
  return o;
}

SessionConfig RunConfig::resolve() const {
  SessionConfig s;
  s.mu = mu;
  s.nu = nu;
  s.intensity_probs = intensity_probs;
  s.dark_rate_hz = dark_rate_hz;
  s.window_ns = window_ns;
  s.jitter_fwhm_ps = jitter_fwhm_ps;
  s.path_delay_ns = path_delay_ns;
  s.pulses = pulses;
  s.seed = seed;
  s.eta = eta ? *eta : calibrate_eta(target_gain_mu, mu, dark_rate_hz, window_ns, jitter_fwhm_ps);
  s.misalignment_rad =
      misalignment_rad ? *misalignment_rad : calibrate_misalignment(target_qber, optics());
  s.validate();
  return s;
}

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc, {"schema_version", "session", "optics", "calibration", "analysis"},
                 "config");
  if (!doc.contains("schema_version")) throw ValidationError("config needs schema_version");
  int version = 0;
  read(doc, "schema_version", version);
  if (version != kSchemaVersion) {
    throw ValidationError(fmt::format("unsupported schema_version {}", version));
  }

  RunConfig c;
  if (doc.contains("session")) {
    const json& s = doc.at("session");
    reject_unknown(s,
                   {"mu", "nu", "intensity_probs", "eta", "dark_rate_hz", "window_ns",
                    "jitter_fwhm_ps", "path_delay_ns", "misalignment_rad",
                    "misalignment_hwp_deg", "pulses", "seed"},
                   "session");
    read(s, "mu", c.mu);
    read(s, "nu", c.nu);
    if (s.contains("intensity_probs")) {
      const json& p = s.at("intensity_probs");
      reject_unknown(p, {"signal", "decoy", "vacuum"}, "intensity_probs");
      read(p, "signal", c.intensity_probs.signal);
      read(p, "decoy", c.intensity_probs.decoy);
      read(p, "vacuum", c.intensity_probs.vacuum);
    }
    read(s, "eta", c.eta);
    read(s, "dark_rate_hz", c.dark_rate_hz);
    read(s, "window_ns", c.window_ns);
    read(s, "jitter_fwhm_ps", c.jitter_fwhm_ps);
    read(s, "path_delay_ns", c.path_delay_ns);
    read(s, "misalignment_rad", c.misalignment_rad);
    if (s.contains("misalignment_hwp_deg")) {
      if (c.misalignment_rad) {
        throw ValidationError("give misalignment_rad or misalignment_hwp_deg, not both");
      }
      double deg = 0.0;
      read(s, "misalignment_hwp_deg", deg);
      // A half-wave plate at theta rotates linear polarization by 2 theta.
      c.misalignment_rad = 2.0 * deg * std::numbers::pi / 180.0;
    }
    read(s, "pulses", c.pulses);
    read(s, "seed", c.seed);
  }
  if (doc.contains("optics")) {
    const json& o = doc.at("optics");
    reject_unknown(o, {"qplate_charge", "l_max"}, "optics");
    read(o, "qplate_charge", c.qplate_charge);
    read(o, "l_max", c.l_max);
  }
  if (doc.contains("calibration")) {
    const json& k = doc.at("calibration");
    reject_unknown(k, {"target_gain_mu", "target_qber"}, "calibration");
    read(k, "target_gain_mu", c.target_gain_mu);
    read(k, "target_qber", c.target_qber);
  }
  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    reject_unknown(a, {"e0", "d", "q_m", "f_ec"}, "analysis");
    read(a, "e0", c.analysis.e0);
    read(a, "d", c.analysis.d);
    read(a, "q_m", c.analysis.q_m);
    read(a, "f_ec", c.analysis.f_ec);
  }
  // Validate eagerly so bad files fail at load time.
  (void)c.optics();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_run_config(doc);
}

ordered_json to_json(const RunConfig& c) {
  ordered_json session = {
      {"mu", c.mu},
      {"nu", c.nu},
      {"intensity_probs",
       {{"signal", c.intensity_probs.signal},
        {"decoy", c.intensity_probs.decoy},
        {"vacuum", c.intensity_probs.vacuum}}},
  };
  if (c.eta) session["eta"] = *c.eta;
  session["dark_rate_hz"] = c.dark_rate_hz;
  session["window_ns"] = c.window_ns;
  session["jitter_fwhm_ps"] = c.jitter_fwhm_ps;
  session["path_delay_ns"] = c.path_delay_ns;
  if (c.misalignment_rad) session["misalignment_rad"] = *c.misalignment_rad;
  session["pulses"] = c.pulses;
  session["seed"] = c.seed;

  ordered_json optics = {{"qplate_charge", c.qplate_charge}};
  if (c.l_max) optics["l_max"] = *c.l_max;

  return {{"schema_version", kSchemaVersion},
          {"session", session},
          {"optics", optics},
          {"calibration",
           {{"target_gain_mu", c.target_gain_mu}, {"target_qber", c.target_qber}}},
          {"analysis",
           {{"e0", c.analysis.e0},
            {"d", c.analysis.d},
            {"q_m", c.analysis.q_m},
            {"f_ec", c.analysis.f_ec}}}};
}

Observables parse_observables(const json& doc) {
  reject_unknown(doc,
                 {"mu", "nu", "q_mu", "q_nu", "e_mu", "e_nu", "y0", "e0", "d", "q_m", "f_ec",
                  "std_errors"},
                 "observables");
  Observables o;
  for (const char* key : {"mu", "nu", "q_mu", "q_nu", "e_mu", "e_nu", "y0"}) {
    if (!doc.contains(key)) throw ValidationError(fmt::format("observables need '{}'", key));
  }
  read(doc, "mu", o.mu);
  read(doc, "nu", o.nu);
  read(doc, "q_mu", o.q_mu);
  read(doc, "q_nu", o.q_nu);
  read(doc, "e_mu", o.e_mu);
  read(doc, "e_nu", o.e_nu);
  read(doc, "y0", o.y0);
  read(doc, "e0", o.e0);
  read(doc, "d", o.d);
  read(doc, "q_m", o.q_m);
  read(doc, "f_ec", o.f_ec);
  if (doc.contains("std_errors")) {
    const json& se = doc.at("std_errors");
    reject_unknown(se, {"q_mu", "q_nu", "e_mu", "e_nu", "y0"}, "std_errors");
    for (const auto& item : se.items()) {
      double value = 0.0;
      read(se, item.key().c_str(), value);
      o.std_errors[item.key()] = value;
    }
  }
  o.validate();
  return o;
}

ordered_json to_json(const Observables& o) {
  ordered_json out = {{"mu", o.mu},     {"nu", o.nu},   {"q_mu", o.q_mu}, {"q_nu", o.q_nu},
                      {"e_mu", o.e_mu}, {"e_nu", o.e_nu}, {"y0", o.y0},   {"e0", o.e0},
                      {"d", o.d},       {"q_m", o.q_m}, {"f_ec", o.f_ec}};
  ordered_json se = ordered_json::object();
  for (const auto& [k, v] : o.std_errors) se[k] = v;
  out["std_errors"] = se;
  return out;
}

ordered_json to_json(const TallyTable& tally) {
  ordered_json out = ordered_json::object();
  for (IntensityClass c : kIntensityClasses) {
    const ClassTally& t = tally[c];
    out[std::string(to_string(c))] = {
        {"sent", t.sent},
        {"detected", t.detected},
        {"sifted", t.sifted},
        {"errors", t.errors},
        {"Q", t.gain()},
        {"e", t.qber()},
        {"se_Q", t.se_gain()},
        {"se_e", t.se_qber()},
        {"double_clicks", t.double_clicks},
        {"single_photon",
         {{"sent", t.sent_single},
          {"detected", t.detected_single},
          {"sifted", t.sifted_single},
          {"errors", t.errors_single}}},
        {"Q_convention", "detected/sent before basis sifting; se are binomial"},
    };
  }
  return out;
}

ordered_json to_json(const KeyRateReport& r) {
  ordered_json bounds = {
      {"delta1_lower", bound_json(r.bounds.delta1)},
      {"y1_lower", bound_json(r.bounds.y1)},
      {"e1_upper",
       {{"value", r.bounds.e1.value},
        {"clamped", r.bounds.e1.clamped},
        {"unbounded", r.bounds.e1.unbounded}}},
  };
  ordered_json contributions = ordered_json::object();
  for (const auto& [k, v] : r.se_contributions) contributions[k] = v;
  return {
      {"inputs", to_json(r.inputs)},
      {"bounds", bounds},
      {"entropy",
       {{"H_d_e_mu", r.h_e_mu}, {"H_d_e1", r.h_e1}, {"log2_d", std::log2(r.inputs.d)}}},
      {"components",
       {{"error_correction_cost", r.error_correction_cost},
        {"privacy_term", r.privacy_term},
        {"raw_skrpss", r.raw_skrpss}}},
      {"skrpss", r.skrpss},
      {"rate_per_pulse", r.rate},
      {"flags", {{"rate_clamped", r.rate_clamped}}},
      {"uncertainty",
       {{"se_skrpss", r.se_skrpss},
        {"contributions", contributions},
        {"method", "first-order central finite differences of input std_errors"}}},
  };
}

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string crosstalk_csv(const CrosstalkTable& table) {
  std::string out = "state,DH1,DV1,DH2,DV2,loss\n";
  for (const MubLabel& label : all_labels()) {
    out += label.name();
    for (double p : table.raw[static_cast<std::size_t>(label.ordinal())]) {
      out += ',';
      out += format_number(p);
    }
    out += '\n';
  }
  return out;
}

std::string records_csv(const std::vector<PulseRecord>& records) {
  std::string out = "pulse,intensity,alice_label,bob_basis,photons,clicks,outcome,double_click,error\n";
  for (const PulseRecord& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.pulse, to_string(r.intensity),
                       r.alice_label.name(), to_string(r.bob_basis), r.photons,
                       click_names(r.clicks), r.outcome ? to_string(*r.outcome) : "",
                       r.double_click ? 1 : 0, r.error ? 1 : 0);
  }
  return out;
}

std::string timing_csv(const TimingProfile& profile) {
  std::string out = "time_ns,relative_rate\n";
  for (std::size_t i = 0; i < profile.time_ns.size(); ++i) {
    out += format_number(profile.time_ns[i]);
    out += ',';
    out += format_number(profile.rate[i]);
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError(fmt::format("cannot create {}: {}", path.parent_path().string(),
                                ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vortexqkd
