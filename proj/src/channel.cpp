#include "vortexqkd/channel.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace vortexqkd {

namespace {

// FWHM = 2 sqrt(2 ln 2) sigma
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_below(std::mt19937_64& rng, int n) {
  return static_cast<int>(((rng() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
}

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

std::string_view to_string(IntensityClass c) {
  switch (c) {
    case IntensityClass::kSignal: return "signal";
    case IntensityClass::kDecoy: return "decoy";
    case IntensityClass::kVacuum: return "vacuum";
  }
  return "?";
}

void SessionConfig::validate() const {
  require(std::isfinite(mu) && std::isfinite(nu) && mu > nu && nu >= 0.0,
          "need mu > nu >= 0");
  const IntensityProbs& p = intensity_probs;
  require(p.signal >= 0.0 && p.decoy >= 0.0 && p.vacuum >= 0.0,
          "intensity probabilities must be non-negative");
  require(std::abs(p.signal + p.decoy + p.vacuum - 1.0) < 1e-9,
          "intensity probabilities must sum to 1");
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  require(dark_rate_hz >= 0.0, "dark rate must be non-negative");
  require(window_ns > 0.0 && jitter_fwhm_ps > 0.0 && path_delay_ns > 0.0,
          "window, jitter and path delay must be positive");
  require(std::isfinite(misalignment_rad), "misalignment must be finite");
  require(pulses >= 1, "pulses must be at least 1");
}

double effective_dark_rate(double rate_hz, double window_ns) {
  if (!(rate_hz >= 0.0) || !(window_ns > 0.0)) {
    throw ValidationError("dark rate must be >= 0 and window > 0");
  }
  const double p = rate_hz * window_ns * 1e-9;
  if (p > 0.01) {
    throw ModelValidityError(
        fmt::format("dark probability {} per window is outside the linear regime", p));
  }
  return p;
}

double window_acceptance(double jitter_fwhm_ps, double window_ns) {
  if (jitter_fwhm_ps < 0.0 || window_ns < 0.0) {
    throw ValidationError("jitter and window must be non-negative");
  }
  if (window_ns == 0.0) return 0.0;
  if (jitter_fwhm_ps == 0.0) return 1.0;
  const double sigma_ns = jitter_fwhm_ps * 1e-3 / kFwhmPerSigma;
  return std::erf(0.5 * window_ns / (sigma_ns * std::numbers::sqrt2));
}

double calibrate_eta(double target_gain, double mu, double dark_rate_hz,
                     double window_ns, double jitter_fwhm_ps) {
  const double dark = effective_dark_rate(dark_rate_hz, window_ns);
  const double no_dark = std::pow(1.0 - dark, 4);
  if (!(target_gain > 1.0 - no_dark) || !(target_gain < 1.0) || !(mu > 0.0)) {
    throw ValidationError(fmt::format("cannot calibrate eta to gain {}", target_gain));
  }
  const double eta_eff = -std::log((1.0 - target_gain) / no_dark) / mu;
  const double eta = eta_eff / (0.5 * window_acceptance(jitter_fwhm_ps, window_ns));
  if (eta > 1.0) {
    throw ValidationError(fmt::format("gain {} needs eta = {} > 1", target_gain, eta));
  }
  return eta;
}

SessionConfig reference_session_config(const OpticsConfig& optics) {
  SessionConfig c;
  c.eta = calibrate_eta(4.03e-3, c.mu, c.dark_rate_hz, c.window_ns, c.jitter_fwhm_ps);
  c.misalignment_rad = calibrate_misalignment(0.006, optics);
  return c;
}

double ClassTally::gain() const {
  return sent == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(sent);
}

double ClassTally::qber() const {
  return sifted == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(sifted);
}

double ClassTally::se_gain() const {
  if (sent == 0) return 0.0;
  const double q = gain();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(sent));
}

double ClassTally::se_qber() const {
  if (sifted == 0) return 0.0;
  const double e = qber();
  return std::sqrt(e * (1.0 - e) / static_cast<double>(sifted));
}

ClassTally& ClassTally::operator+=(const ClassTally& o) {
  sent += o.sent;
  detected += o.detected;
  sifted += o.sifted;
  errors += o.errors;
  double_clicks += o.double_clicks;
  sent_single += o.sent_single;
  detected_single += o.detected_single;
  sifted_single += o.sifted_single;
  errors_single += o.errors_single;
  return *this;
}

void TallyTable::add(const PulseRecord& r) {
  ClassTally& t = (*this)[r.intensity];
  const bool single = r.photons == 1;
  ++t.sent;
  t.sent_single += single;
  if (!r.detected()) return;
  ++t.detected;
  t.detected_single += single;
  t.double_clicks += r.double_click;
  if (!r.sifted) return;
  ++t.sifted;
  t.sifted_single += single;
  t.errors += r.error;
  t.errors_single += single && r.error;
}

TallyTable& TallyTable::operator+=(const TallyTable& other) {
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] += other.classes[i];
  return *this;
}

GroundTruth ground_truth(const TallyTable& tally) {
  ClassTally pooled;
  for (const ClassTally& c : tally.classes) pooled += c;
  const ClassTally& s = tally[IntensityClass::kSignal];
  GroundTruth g;
  if (s.detected > 0) {
    g.delta1 = static_cast<double>(s.detected_single) / static_cast<double>(s.detected);
  }
  if (pooled.sent_single > 0) {
    g.y1 = static_cast<double>(pooled.detected_single) /
           static_cast<double>(pooled.sent_single);
  }
  if (pooled.sifted_single > 0) {
    g.e1 = static_cast<double>(pooled.errors_single) /
           static_cast<double>(pooled.sifted_single);
  }
  return g;
}

SessionModel::SessionModel(const SessionConfig& config, const OpticsConfig& optics)
    : config_(config) {
  config_.validate();
  dark_ = effective_dark_rate(config_.dark_rate_hz, config_.window_ns);
  acceptance_ = vortexqkd::window_acceptance(config_.jitter_fwhm_ps, config_.window_ns);

  class_mean_ = {config_.mu, config_.nu, 0.0};
  for (std::size_t c = 0; c < 3; ++c) class_vacuum_[c] = std::exp(-class_mean_[c]);
  class_cdf_ = {config_.intensity_probs.signal,
                config_.intensity_probs.signal + config_.intensity_probs.decoy};

  const std::array<MeasurementModel, 2> models = {
      measurement_effects(Basis::kM1, optics), measurement_effects(Basis::kM2, optics)};
  const double transmit = config_.eta * acceptance_;
  for (const MubLabel& label : all_labels()) {
    const HybridState s = misaligned_state(label, config_.misalignment_rad, optics);
    const auto o = static_cast<std::size_t>(label.ordinal());
    for (std::size_t b = 0; b < 2; ++b) {
      const ClickDistribution p = click_distribution(s, models[b]);
      double cdf = 0.0;
      for (std::size_t d = 0; d < 4; ++d) {
        photon_click_[o][b][d] = transmit * p.detector[d];
        cdf += photon_click_[o][b][d];
        photon_cdf_[o][b][d] = cdf;
      }
    }
  }

  any_dark_ = 1.0 - std::pow(1.0 - dark_, 4);
  double cdf = 0.0;
  for (int k = 0; k < 4; ++k) {
    // first clicking detector is k
    cdf += std::pow(1.0 - dark_, k) * dark_;
    first_dark_cdf_[static_cast<std::size_t>(k)] = any_dark_ > 0.0 ? cdf / any_dark_ : 1.0;
  }
  first_dark_cdf_[3] = 1.0;
}

const std::array<double, 4>& SessionModel::photon_clicks(const MubLabel& label,
                                                         Basis bob) const {
  return photon_click_[static_cast<std::size_t>(label.ordinal())]
                      [static_cast<std::size_t>(bob)];
}

PulseRecord sample_pulse(const SessionModel& m, std::mt19937_64& rng,
                         std::uint64_t pulse_index) {
  PulseRecord r;
  r.pulse = pulse_index;

  // One draw picks the class (top 53 bits) plus label and basis (low 4 bits).
  const std::uint64_t head = rng();
  const double u = static_cast<double>(head >> 11) * 0x1.0p-53;
  const std::size_t cls = u < m.class_cdf_[0] ? 0 : (u < m.class_cdf_[1] ? 1 : 2);
  r.intensity = static_cast<IntensityClass>(cls);
  const int ordinal = static_cast<int>(head & 7u);
  r.alice_label = MubLabel::from_ordinal(ordinal);
  r.bob_basis = static_cast<Basis>((head >> 3) & 1u);

  // Poisson photon number by inversion. On the vacuum branch v / exp(-mean)
  // is again uniform and independent of n, so it is reused for the dark test.
  const double v = uniform01(rng);
  double x = 0.0;
  if (v < m.class_vacuum_[cls]) {
    x = v / m.class_vacuum_[cls];
  } else {
    const double mean = m.class_mean_[cls];
    double p = m.class_vacuum_[cls];
    double cdf = p;
    int n = 0;
    while (v >= cdf && n < 1000) {
      ++n;
      p *= mean / n;
      cdf += p;
    }
    r.photons = n;

    const auto& route = m.photon_cdf_[static_cast<std::size_t>(ordinal)]
                                     [static_cast<std::size_t>(r.bob_basis)];
    for (int k = 0; k < r.photons; ++k) {
      const double w = uniform01(rng);
      for (int d = 0; d < 4; ++d) {
        if (w < route[static_cast<std::size_t>(d)]) {
          r.clicks |= static_cast<std::uint8_t>(1u << d);
          break;
        }
      }
    }
    x = uniform01(rng);
  }

  if (x < m.any_dark_) {
    const double y = x / m.any_dark_;
    int first = 0;
    while (first < 3 && y >= m.first_dark_cdf_[static_cast<std::size_t>(first)]) ++first;
    r.clicks |= static_cast<std::uint8_t>(1u << first);
    for (int d = first + 1; d < 4; ++d) {
      if (uniform01(rng) < m.dark_) r.clicks |= static_cast<std::uint8_t>(1u << d);
    }
  }

  if (r.clicks == 0) return r;

  const int count = std::popcount(r.clicks);
  int pick = count == 1 ? 0 : uniform_below(rng, count);
  r.double_click = count > 1;
  for (int d = 0; d < 4; ++d) {
    if ((r.clicks >> d) & 1u) {
      if (pick == 0) {
        r.outcome = kDetectors[static_cast<std::size_t>(d)];
        break;
      }
      --pick;
    }
  }
  r.sifted = r.alice_label.basis() == r.bob_basis;
  r.error = r.sifted && *r.outcome != expected_detector(r.alice_label);
  return r;
}

std::mt19937_64 chunk_stream(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32),
                    0x51ed270bu};
  return std::mt19937_64(seq);
}

std::vector<PulseRecord> sift(const std::vector<PulseRecord>& records) {
  std::vector<PulseRecord> kept;
  for (const PulseRecord& r : records) {
    if (r.detected() && r.outcome && r.alice_label.basis() == r.bob_basis) kept.push_back(r);
  }
  return kept;
}

TimingProfile timing_profile(const SessionConfig& config, double step_ns) {
  config.validate();
  if (!(step_ns > 0.0)) throw ValidationError("timing step must be positive");
  TimingProfile out;
  const double sigma = config.jitter_fwhm_ps * 1e-3 / kFwhmPerSigma;
  out.peaks_ns = {0.0, config.path_delay_ns};
  for (std::size_t p = 0; p < 2; ++p) {
    out.windows_ns[p] = {out.peaks_ns[p] - 0.5 * config.window_ns,
                         out.peaks_ns[p] + 0.5 * config.window_ns};
  }
  out.window_fraction = window_acceptance(config.jitter_fwhm_ps, config.window_ns);

  const double margin = std::max(5.0 * sigma, config.window_ns);
  const double start = -margin;
  const double stop = config.path_delay_ns + margin;
  const auto steps = static_cast<std::size_t>(std::llround((stop - start) / step_ns));
  out.time_ns.reserve(steps + 1);
  out.rate.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = start + static_cast<double>(i) * step_ns;
    double rate = 0.0;
    for (double peak : out.peaks_ns) {
      const double z = (t - peak) / sigma;
      rate += std::exp(-0.5 * z * z);
    }
    out.time_ns.push_back(t);
    out.rate.push_back(rate);
  }
  return out;
}

}  // namespace vortexqkd
