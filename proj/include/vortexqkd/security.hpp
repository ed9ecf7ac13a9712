#pragma once

// Vacuum + weak decoy single-photon bounds and the d-dimensional GLLP
// secret-key rate, from measured or simulated observables.

#include <map>
#include <string>

#include "vortexqkd/channel.hpp"

namespace vortexqkd {

struct Observables {
  double mu = 0.0;
  double nu = 0.0;
  double q_mu = 0.0;
  double q_nu = 0.0;
  double e_mu = 0.0;
  double e_nu = 0.0;
  double y0 = 0.0;
  double e0 = 0.5;
  int d = 4;
  double q_m = 0.5;
  double f_ec = 1.0;
  /// Standard errors of measured inputs, keyed by field name ("q_mu",
  /// "q_nu", "e_mu", "e_nu", "y0"). Used only for uncertainty propagation.
  std::map<std::string, double> std_errors;

  /// Throws ValidationError unless 0 < nu < mu, gains in (0,1), QBERs in
  /// [0, (d-1)/d], y0 >= 0, d >= 2, f_ec >= 1, q_m in (0,1].
  void validate() const;
  double max_qber() const { return (d - 1.0) / d; }

  friend bool operator==(const Observables&, const Observables&) = default;
};

/// The operating point quoted for the experiment, with the stated +- on the
/// QBERs as standard errors.
Observables reference_observables(double f_ec = 1.0);

/// -(1-e) log2(1-e) - e log2(e/(d-1)). Throws ValidationError outside
/// [0, (d-1)/d] or for d < 2.
double entropy_d(double e, int d);

struct Bound {
  double value = 0.0;
  /// The raw expression fell outside the physical range and was clamped.
  bool clamped = false;
};

Bound delta1_lower(const Observables& obs);
Bound y1_lower(const Observables& obs);

struct ErrorBound : Bound {
  /// y1 was zero: the single-photon error rate is unconstrained.
  bool unbounded = false;
};

ErrorBound e1_upper(const Observables& obs, double y1);

struct DecoyBounds {
  Bound delta1;
  Bound y1;
  ErrorBound e1;
};

DecoyBounds decoy_bounds(const Observables& obs);

struct KeyRateReport {
  Observables inputs;
  DecoyBounds bounds;
  double h_e_mu = 0.0;
  double h_e1 = 0.0;
  /// f_EC H_d(e_mu), bits per sifted signal.
  double error_correction_cost = 0.0;
  /// Delta_1 (log2 d - H_d(e_1)), bits per sifted signal.
  double privacy_term = 0.0;
  /// Unclamped bracket of the rate formula.
  double raw_skrpss = 0.0;
  /// Secret bits per sifted signal, R / (q_m Q_mu), floored at 0.
  double skrpss = 0.0;
  /// Secret bits per pulse.
  double rate = 0.0;
  bool rate_clamped = false;
  /// First-order propagated standard error of skrpss from inputs.std_errors.
  double se_skrpss = 0.0;
  std::map<std::string, double> se_contributions;
};

KeyRateReport key_rate(const Observables& obs);

struct TallySettings {
  double e0 = 0.5;
  int d = 4;
  double q_m = 0.5;
  double f_ec = 1.0;
  friend bool operator==(const TallySettings&, const TallySettings&) = default;
};

/// Gains, QBERs and vacuum yield from a simulated tally, with binomial
/// standard errors. Throws ValidationError when the signal or decoy class has
/// no sifted events or no vacuum pulses were sent.
Observables observables_from_tally(const TallyTable& tally, const SessionConfig& config,
                                   const TallySettings& settings = {});

}  // namespace vortexqkd
