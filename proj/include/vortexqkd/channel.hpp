#pragma once

// Weak-coherent-pulse source with vacuum + weak decoy intensities, a lossy
// channel, four threshold detectors with dark counts and a timing window, and
// the per-pulse Monte Carlo session that produces sifted tallies.
//
// Random streams are keyed by (seed, chunk index) with a fixed chunk size, so
// tallies do not depend on how chunks are grouped into parallel batches.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vortexqkd/protocol.hpp"

namespace vortexqkd {

enum class IntensityClass { kSignal = 0, kDecoy = 1, kVacuum = 2 };

inline constexpr std::array<IntensityClass, 3> kIntensityClasses = {
    IntensityClass::kSignal, IntensityClass::kDecoy, IntensityClass::kVacuum};

std::string_view to_string(IntensityClass c);

struct IntensityProbs {
  double signal = 0.5;
  double decoy = 0.3;
  double vacuum = 0.2;

  friend bool operator==(const IntensityProbs&, const IntensityProbs&) = default;
};

struct SessionConfig {
  double mu = 0.053;
  double nu = 0.017;
  IntensityProbs intensity_probs;
  /// End-to-end transmittance (channel and detector efficiency), excluding
  /// the SMF zero-OAM filtering loss.
  double eta = 0.15;
  double dark_rate_hz = 67.0;
  double window_ns = 1.15;
  double jitter_fwhm_ps = 350.0;
  double path_delay_ns = 3.05;
  double misalignment_rad = 0.0;
  std::uint64_t pulses = 1'000'000;
  std::uint64_t seed = 1;

  /// Throws ValidationError on out-of-range fields.
  void validate() const;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

/// Dark-click probability per detector per pulse: rate x window.
/// Throws ModelValidityError when the product exceeds 0.01.
double effective_dark_rate(double rate_hz, double window_ns);

/// Probability that a Gaussian arrival time with the given FWHM falls inside a
/// centered window of width window_ns.
double window_acceptance(double jitter_fwhm_ps, double window_ns);

/// Transmittance for which the signal gain 1 - exp(-eta' mu)(1 - p_dark)^4
/// equals `target_gain`, with eta' = eta * 0.5 * window_acceptance.
double calibrate_eta(double target_gain, double mu, double dark_rate_hz,
                     double window_ns, double jitter_fwhm_ps);

/// Reference operating point: mu = 0.053, nu = 0.017, eta calibrated to a
/// signal gain of 4.03e-3 and misalignment calibrated to a 0.60% crosstalk QBER.
SessionConfig reference_session_config(const OpticsConfig& optics = {});

struct PulseRecord {
  std::uint64_t pulse = 0;
  IntensityClass intensity = IntensityClass::kSignal;
  MubLabel alice_label{Basis::kM1, 1};
  Basis bob_basis = Basis::kM1;
  int photons = 0;
  /// Bit d set when detector d clicked (signal or dark).
  std::uint8_t clicks = 0;
  std::optional<DetectorId> outcome;
  bool double_click = false;
  bool sifted = false;
  bool error = false;

  bool detected() const noexcept { return clicks != 0; }
};

struct ClassTally {
  std::uint64_t sent = 0;
  std::uint64_t detected = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t double_clicks = 0;
  // Ground truth for single-photon pulses, known only to the simulator.
  std::uint64_t sent_single = 0;
  std::uint64_t detected_single = 0;
  std::uint64_t sifted_single = 0;
  std::uint64_t errors_single = 0;

  /// Q = detected / sent, before basis sifting.
  double gain() const;
  /// e = errors / sifted.
  double qber() const;
  double se_gain() const;
  double se_qber() const;

  ClassTally& operator+=(const ClassTally& other);
  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

struct TallyTable {
  std::array<ClassTally, 3> classes{};

  ClassTally& operator[](IntensityClass c) { return classes[static_cast<std::size_t>(c)]; }
  const ClassTally& operator[](IntensityClass c) const {
    return classes[static_cast<std::size_t>(c)];
  }

  void add(const PulseRecord& record);
  TallyTable& operator+=(const TallyTable& other);
  friend bool operator==(const TallyTable&, const TallyTable&) = default;
};

/// Simulator ground truth derived from a tally.
struct GroundTruth {
  /// Fraction of signal detections caused by single-photon pulses.
  double delta1 = 0.0;
  /// Detection probability of a single-photon pulse, all classes pooled.
  double y1 = 0.0;
  /// Error rate of sifted single-photon pulses, all classes pooled.
  double e1 = 0.0;
};

GroundTruth ground_truth(const TallyTable& tally);

/// Everything the per-pulse kernel needs, precomputed from a config.
class SessionModel {
 public:
  SessionModel(const SessionConfig& config, const OpticsConfig& optics);

  const SessionConfig& config() const noexcept { return config_; }
  double dark_probability() const noexcept { return dark_; }
  double window_acceptance() const noexcept { return acceptance_; }
  /// Per-photon click probability at each detector (transmittance included).
  const std::array<double, 4>& photon_clicks(const MubLabel& label, Basis bob) const;

 private:
  friend PulseRecord sample_pulse(const SessionModel&, std::mt19937_64&, std::uint64_t);

  SessionConfig config_;
  double dark_ = 0.0;
  double acceptance_ = 0.0;
  std::array<double, 3> class_mean_{};
  std::array<double, 3> class_vacuum_{};   // exp(-mean)
  std::array<double, 2> class_cdf_{};      // signal, signal+decoy
  // [label ordinal][bob basis][detector]
  std::array<std::array<std::array<double, 4>, 2>, 8> photon_click_{};
  std::array<std::array<std::array<double, 4>, 2>, 8> photon_cdf_{};
  double any_dark_ = 0.0;
  std::array<double, 4> first_dark_cdf_{};
};

/// Draws one pulse: intensity class, Alice's label, Bob's basis, Poisson
/// photon number, per-photon routing to detectors, dark clicks, and outcome
/// resolution (double clicks go to a uniformly random clicked detector).
PulseRecord sample_pulse(const SessionModel& model, std::mt19937_64& rng,
                         std::uint64_t pulse_index = 0);

/// Pulses per independent random stream.
inline constexpr std::uint64_t kChunkPulses = 1u << 16;

/// Stream for chunk `chunk` of a session seeded with `seed`.
std::mt19937_64 chunk_stream(std::uint64_t seed, std::uint64_t chunk);

struct SessionOptions {
  /// Number of contiguous chunk groups; 0 picks one per thread.
  int batches = 0;
  /// Upper bound on OpenMP threads; 0 leaves the runtime default.
  int max_threads = 0;
  bool keep_records = false;
};

struct SessionResult {
  TallyTable tally;
  /// Sifted records in pulse order, when requested.
  std::vector<PulseRecord> records;
};

/// OpenMP-parallel session over chunk batches.
SessionResult run_session(const SessionConfig& config, const OpticsConfig& optics = {},
                          const SessionOptions& options = {});

/// Single-threaded reference: one loop over every pulse in order.
SessionResult run_session_serial(const SessionConfig& config,
                                 const OpticsConfig& optics = {},
                                 bool keep_records = false);

/// Matched-basis records with a resolved outcome.
std::vector<PulseRecord> sift(const std::vector<PulseRecord>& records);

/// Analytic arrival-time histogram: two Gaussians (short and long path)
/// separated by path_delay_ns, each with the detector jitter FWHM, scaled to
/// unit peak height.
struct TimingProfile {
  std::vector<double> time_ns;
  std::vector<double> rate;
  std::array<double, 2> peaks_ns{};
  /// [peak][lower, upper] post-selection window edges.
  std::array<std::array<double, 2>, 2> windows_ns{};
  double window_fraction = 0.0;
};

TimingProfile timing_profile(const SessionConfig& config, double step_ns = 0.005);

}  // namespace vortexqkd
