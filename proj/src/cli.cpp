#include "vortexqkd/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vortexqkd/io.hpp"

namespace vortexqkd {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kCheckTolerance = 1e-12;

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pulses;
  std::optional<double> misalignment;
  bool hwp_deg = false;
  bool paper = false;
  std::optional<double> fec;
  bool records = false;
  bool keyrate = false;
  int batches = 0;
  std::string observables_path;
  std::optional<double> e_mu, e_nu, q_mu, q_nu, y0, e0;
  bool perturb_convention = false;
};

RunConfig load_config(const Options& opt) {
  RunConfig c = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  if (opt.seed) c.seed = *opt.seed;
  if (opt.pulses) c.pulses = *opt.pulses;
  if (opt.misalignment) {
    c.misalignment_rad =
        opt.hwp_deg ? 2.0 * *opt.misalignment * std::numbers::pi / 180.0 : *opt.misalignment;
  }
  if (opt.fec) c.analysis.f_ec = *opt.fec;
  return c;
}

int env_threads() {
  const char* value = std::getenv("VORTEXQKD_THREADS");
  if (value == nullptr || *value == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 1) {
    throw ValidationError(fmt::format("VORTEXQKD_THREADS must be a positive integer, got '{}'",
                                      value));
  }
  return static_cast<int>(n);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

int cmd_mubs(const Options& opt, std::ostream& out) {
  const RunConfig config = load_config(opt);
  const OpticsConfig optics = config.optics();
  const Handedness handedness =
      opt.perturb_convention ? Handedness::kSwapped : Handedness::kStandard;
  const auto labels = all_labels();

  std::vector<HybridState> states;
  for (const MubLabel& label : labels) states.push_back(mub_state(label, optics));

  ordered_json amplitudes = ordered_json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ordered_json entries = ordered_json::array();
    for (Pol pol : {Pol::H, Pol::V}) {
      for (int l = -optics.truncation.l_max(); l <= optics.truncation.l_max(); ++l) {
        const Complex a = states[i].amplitude(pol, l);
        if (std::abs(a) < kCheckTolerance) continue;
        entries.push_back({{"pol", pol == Pol::H ? "H" : "V"},
                           {"l", l},
                           {"re", a.real()},
                           {"im", a.imag()}});
      }
    }
    amplitudes[labels[i].name()] = entries;
  }

  bool orthonormal = true;
  bool unbiased = true;
  ordered_json gram = ordered_json::array();
  out << "squared overlaps |<i|j>|^2\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ordered_json row = ordered_json::array();
    std::string line = fmt::format("{:>5}", labels[i].name());
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double overlap = std::norm(inner(states[i], states[j]));
      row.push_back(overlap);
      line += fmt::format(" {:6.4f}", overlap);
      if (labels[i].basis() == labels[j].basis()) {
        orthonormal &= std::abs(overlap - (i == j ? 1.0 : 0.0)) <= kCheckTolerance;
      } else {
        unbiased &= std::abs(overlap - 0.25) <= kCheckTolerance;
      }
    }
    gram.push_back(row);
    out << line << '\n';
  }

  bool pipeline = true;
  ordered_json fidelities = ordered_json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const PrepAngles angles = prep_angles(labels[i]);
    const double f = fidelity(prepare_pipeline(angles, optics, handedness).state, states[i]);
    fidelities[labels[i].name()] = {
        {"alpha1_rad", angles.alpha1}, {"alpha2_rad", angles.alpha2()}, {"fidelity", f}};
    pipeline &= std::abs(f - 1.0) <= kCheckTolerance;
  }

  const bool pass = orthonormal && unbiased && pipeline;
  out << fmt::format("orthonormal: {}\nunbiased (1/4): {}\npipeline matches table: {}\n",
                     orthonormal ? "pass" : "FAIL", unbiased ? "pass" : "FAIL",
                     pipeline ? "pass" : "FAIL");

  const ordered_json report = {
      {"qplate_charge", optics.charge.q()},
      {"l_max", optics.truncation.l_max()},
      {"amplitudes", amplitudes},
      {"gram_squared", gram},
      {"pipeline", fidelities},
      {"checks",
       {{"orthonormal", orthonormal}, {"unbiased", unbiased}, {"pipeline", pipeline}}},
      {"pass", pass},
  };
  write_text(fs::path(opt.out_dir) / "mubs.json", dump(report));
  return pass ? 0 : 3;
}

int cmd_crosstalk(const Options& opt, std::ostream& out) {
  const RunConfig config = load_config(opt);
  const OpticsConfig optics = config.optics();
  const double delta = config.misalignment_rad
                           ? *config.misalignment_rad
                           : calibrate_misalignment(config.target_qber, optics);
  const CrosstalkTable table = crosstalk_matrix(delta, optics);

  ordered_json efficiency = ordered_json::object();
  double min_diag = 1.0;
  for (const MubLabel& label : all_labels()) {
    const double e = table.efficiency[static_cast<std::size_t>(label.ordinal())];
    efficiency[label.name()] = e;
    min_diag = std::min(min_diag, e);
    out << fmt::format("{}: E = {:.4f}%\n", label.name(), 100.0 * e);
  }
  out << fmt::format("misalignment = {:.6g} rad, mean E = {:.4f}%, e_mu equivalent = {:.4f}%\n",
                     delta, 100.0 * table.mean_efficiency(), 100.0 * table.mean_qber());

  ordered_json blocks = ordered_json::array();
  for (const Eigen::Matrix4d& block : table.blocks) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < 4; ++r) {
      rows.push_back({block(r, 0), block(r, 1), block(r, 2), block(r, 3)});
    }
    blocks.push_back(rows);
  }
  const ordered_json summary = {
      {"misalignment_rad", delta},
      {"efficiency", efficiency},
      {"mean_efficiency", table.mean_efficiency()},
      {"e_mu_equivalent", table.mean_qber()},
      {"min_diagonal", min_diag},
      {"matched_blocks", blocks},
      {"normalization", "matched-basis blocks renormalized over detector clicks"},
  };
  write_text(fs::path(opt.out_dir) / "crosstalk.csv", crosstalk_csv(table));
  write_text(fs::path(opt.out_dir) / "crosstalk_summary.json", dump(summary));
  return 0;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const RunConfig config = load_config(opt);
  const SessionConfig session = config.resolve();
  SessionOptions so;
  so.batches = opt.batches;
  so.max_threads = env_threads();
  so.keep_records = opt.records;
  const SessionResult result = run_session(session, config.optics(), so);

  const ordered_json tally = to_json(result.tally);
  write_text(fs::path(opt.out_dir) / "tally.json", dump(tally));
  out << dump(tally);
  if (opt.records) {
    write_text(fs::path(opt.out_dir) / "records.csv", records_csv(result.records));
  }
  if (opt.keyrate) {
    const KeyRateReport report =
        key_rate(observables_from_tally(result.tally, session, config.analysis));
    write_text(fs::path(opt.out_dir) / "keyrate.json", dump(to_json(report)));
    out << fmt::format("skrpss = {:.6f} bits per sifted signal\n", report.skrpss);
  }
  return 0;
}

int cmd_keyrate(const Options& opt, std::ostream& out) {
  Observables obs;
  if (opt.paper) {
    obs = reference_observables();
  } else if (!opt.observables_path.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(opt.observables_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(e.what());
    }
    obs = parse_observables(doc);
  } else {
    throw ValidationError("keyrate needs --paper or --observables <path>");
  }
  if (opt.fec) obs.f_ec = *opt.fec;
  if (opt.e_mu) obs.e_mu = *opt.e_mu;
  if (opt.e_nu) obs.e_nu = *opt.e_nu;
  if (opt.q_mu) obs.q_mu = *opt.q_mu;
  if (opt.q_nu) obs.q_nu = *opt.q_nu;
  if (opt.y0) obs.y0 = *opt.y0;
  if (opt.e0) obs.e0 = *opt.e0;
  obs.validate();

  const std::string text = dump(to_json(key_rate(obs)));
  write_text(fs::path(opt.out_dir) / "keyrate.json", text);
  out << text;
  return 0;
}

int cmd_timing(const Options& opt, std::ostream& out) {
  const RunConfig config = load_config(opt);
  SessionConfig session;
  session.window_ns = config.window_ns;
  session.jitter_fwhm_ps = config.jitter_fwhm_ps;
  session.path_delay_ns = config.path_delay_ns;
  session.dark_rate_hz = config.dark_rate_hz;
  const TimingProfile profile = timing_profile(session);

  const ordered_json summary = {
      {"peaks_ns", profile.peaks_ns},
      {"peak_separation_ns", profile.peaks_ns[1] - profile.peaks_ns[0]},
      {"fwhm_ns", config.jitter_fwhm_ps * 1e-3},
      {"windows_ns", profile.windows_ns},
      {"window_fraction", profile.window_fraction},
      {"effective_dark_rate", effective_dark_rate(config.dark_rate_hz, config.window_ns)},
  };
  write_text(fs::path(opt.out_dir) / "timing.csv", timing_csv(profile));
  write_text(fs::path(opt.out_dir) / "timing.json", dump(summary));
  out << dump(summary);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Polarization-OAM hybrid four-dimensional QKD simulator", "vortexqkd"};
  app.require_subcommand(1);

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "random seed override");
  };

  CLI::App* mubs = app.add_subcommand("mubs", "verify the two mutually unbiased bases");
  common(mubs);
  mubs->add_flag("--perturb-convention", opt.perturb_convention,
                 "swap the circular basis (check must then fail)")
      ->group("");

  CLI::App* crosstalk = app.add_subcommand("crosstalk", "crosstalk matrices and efficiencies");
  common(crosstalk);
  crosstalk->add_option("--misalignment", opt.misalignment, "misalignment angle (rad)");
  crosstalk->add_flag("--hwp-deg", opt.hwp_deg, "read angles as HWP fast-axis degrees");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo decoy-state session");
  common(simulate);
  simulate->add_option("--pulses", opt.pulses, "number of pulses");
  simulate->add_option("--misalignment", opt.misalignment, "misalignment angle (rad)");
  simulate->add_flag("--hwp-deg", opt.hwp_deg, "read angles as HWP fast-axis degrees");
  simulate->add_option("--batches", opt.batches, "parallel batch count (0 = per thread)");
  simulate->add_flag("--records", opt.records, "write sifted records CSV");
  simulate->add_flag("--keyrate", opt.keyrate, "also evaluate the key rate");
  simulate->add_option("--fec", opt.fec, "error-correction efficiency");

  CLI::App* keyrate = app.add_subcommand("keyrate", "decoy bounds and secret-key rate");
  common(keyrate);
  keyrate->add_flag("--paper", opt.paper, "use the reference experimental observables");
  keyrate->add_option("--observables", opt.observables_path, "observables JSON")
      ->check(CLI::ExistingFile);
  keyrate->add_option("--fec", opt.fec, "error-correction efficiency");
  keyrate->add_option("--e-mu", opt.e_mu);
  keyrate->add_option("--e-nu", opt.e_nu);
  keyrate->add_option("--q-mu", opt.q_mu);
  keyrate->add_option("--q-nu", opt.q_nu);
  keyrate->add_option("--y0", opt.y0);
  keyrate->add_option("--e0", opt.e0);

  CLI::App* timing = app.add_subcommand("timing", "arrival-time profile of the two paths");
  common(timing);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }

  try {
    if (mubs->parsed()) return cmd_mubs(opt, out);
    if (crosstalk->parsed()) return cmd_crosstalk(opt, out);
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (keyrate->parsed()) return cmd_keyrate(opt, out);
    if (timing->parsed()) return cmd_timing(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace vortexqkd
