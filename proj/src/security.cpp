#include "vortexqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

namespace vortexqkd {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kRelativeStep = 1e-6;

double clamp_to(double value, double hi, bool& clamped) {
  if (value < 0.0) {
    clamped = true;
    return 0.0;
  }
  if (value > hi) {
    clamped = true;
    return hi;
  }
  return value;
}

void check_intensities(const Observables& obs) {
  if (obs.mu * obs.nu - obs.nu * obs.nu == 0.0) {
    throw ValidationError("degenerate intensities: mu nu = nu^2");
  }
}

double* field(Observables& obs, const std::string& name) {
  if (name == "q_mu") return &obs.q_mu;
  if (name == "q_nu") return &obs.q_nu;
  if (name == "e_mu") return &obs.e_mu;
  if (name == "e_nu") return &obs.e_nu;
  if (name == "y0") return &obs.y0;
  if (name == "mu") return &obs.mu;
  if (name == "nu") return &obs.nu;
  throw ValidationError(fmt::format("no standard error slot for '{}'", name));
}

bool is_valid(const Observables& obs) {
  try {
    obs.validate();
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

struct RateParts {
  DecoyBounds bounds;
  double h_e_mu;
  double h_e1;
  double ec;
  double privacy;
};

RateParts evaluate(const Observables& obs) {
  RateParts p;
  p.bounds = decoy_bounds(obs);
  p.h_e_mu = entropy_d(obs.e_mu, obs.d);
  p.h_e1 = entropy_d(p.bounds.e1.value, obs.d);
  p.ec = obs.f_ec * p.h_e_mu;
  p.privacy = p.bounds.e1.unbounded
                  ? 0.0
                  : p.bounds.delta1.value * (std::log2(static_cast<double>(obs.d)) - p.h_e1);
  return p;
}

}  // namespace

void Observables::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (d < 2) fail(fmt::format("dimension d must be >= 2, got {}", d));
  if (!(nu > 0.0 && nu < mu)) fail(fmt::format("need 0 < nu < mu, got mu={} nu={}", mu, nu));
  if (!(q_mu > 0.0 && q_mu < 1.0) || !(q_nu > 0.0 && q_nu < 1.0)) {
    fail("gains must lie in (0, 1)");
  }
  for (double e : {e_mu, e_nu, e0}) {
    if (!(e >= 0.0 && e <= max_qber() + kDomainSlack)) {
      fail(fmt::format("QBER {} outside [0, {}]", e, max_qber()));
    }
  }
  if (!(y0 >= 0.0 && y0 < 1.0)) fail("y0 must lie in [0, 1)");
  if (!(f_ec >= 1.0)) fail("f_EC must be >= 1");
  if (!(q_m > 0.0 && q_m <= 1.0)) fail("q_m must lie in (0, 1]");
  for (const auto& [name, se] : std_errors) {
    if (!(se >= 0.0)) fail(fmt::format("standard error of {} must be >= 0", name));
  }
}

Observables reference_observables(double f_ec) {
  Observables o;
  o.mu = 0.053;
  o.nu = 0.017;
  o.q_mu = 4.03e-3;
  o.q_nu = 1.33e-3;
  o.e_mu = 0.006;
  o.e_nu = 0.0065;
  o.y0 = 8e-8;
  o.e0 = 0.5;
  o.d = 4;
  o.q_m = 0.5;
  o.f_ec = f_ec;
  o.std_errors = {{"e_mu", 0.0006}, {"e_nu", 0.0010}};
  return o;
}

double entropy_d(double e, int d) {
  if (d < 2) throw ValidationError(fmt::format("dimension d must be >= 2, got {}", d));
  const double top = (d - 1.0) / d;
  if (!(e >= 0.0 && e <= top + kDomainSlack)) {
    throw ValidationError(fmt::format("entropy_d: e = {} outside [0, {}]", e, top));
  }
  e = std::min(e, top);
  if (e == 0.0) return 0.0;
  return -(1.0 - e) * std::log2(1.0 - e) - e * std::log2(e / (d - 1.0));
}

Bound delta1_lower(const Observables& obs) {
  check_intensities(obs);
  const double mu = obs.mu;
  const double nu = obs.nu;
  const double raw = mu * mu * std::exp(-mu) / (mu * nu - nu * nu) *
                     (obs.q_nu / obs.q_mu * std::exp(nu) - nu * nu / (mu * mu) * std::exp(mu) -
                      (mu * mu - nu * nu) / (mu * mu) * obs.y0 / obs.q_mu);
  Bound b;
  b.value = clamp_to(raw, 1.0, b.clamped);
  return b;
}

Bound y1_lower(const Observables& obs) {
  check_intensities(obs);
  const double mu = obs.mu;
  const double nu = obs.nu;
  const double raw = mu / (mu * nu - nu * nu) *
                     (obs.q_nu * std::exp(nu) - nu * nu / (mu * mu) * obs.q_mu * std::exp(mu) -
                      (mu * mu - nu * nu) / (mu * mu) * obs.y0);
  Bound b;
  b.value = clamp_to(raw, 1.0, b.clamped);
  return b;
}

ErrorBound e1_upper(const Observables& obs, double y1) {
  ErrorBound b;
  if (!(y1 > 0.0)) {
    b.value = obs.max_qber();
    b.clamped = true;
    b.unbounded = true;
    return b;
  }
  const double raw =
      (obs.e_nu * obs.q_nu * std::exp(obs.nu) - obs.e0 * obs.y0) / (y1 * obs.nu);
  b.value = clamp_to(raw, obs.max_qber(), b.clamped);
  return b;
}

DecoyBounds decoy_bounds(const Observables& obs) {
  obs.validate();
  DecoyBounds b;
  b.delta1 = delta1_lower(obs);
  b.y1 = y1_lower(obs);
  b.e1 = e1_upper(obs, b.y1.value);
  return b;
}

KeyRateReport key_rate(const Observables& obs) {
  const RateParts parts = evaluate(obs);
  KeyRateReport r;
  r.inputs = obs;
  r.bounds = parts.bounds;
  r.h_e_mu = parts.h_e_mu;
  r.h_e1 = parts.h_e1;
  r.error_correction_cost = parts.ec;
  r.privacy_term = parts.privacy;
  r.raw_skrpss = parts.privacy - parts.ec;
  r.rate_clamped = !(r.raw_skrpss > 0.0) || parts.bounds.e1.unbounded;
  r.skrpss = r.rate_clamped ? 0.0 : r.raw_skrpss;
  r.rate = obs.q_m * obs.q_mu * r.skrpss;

  // Central finite differences of the unclamped bracket.
  double variance = 0.0;
  for (const auto& [name, se] : obs.std_errors) {
    if (se == 0.0) continue;
    Observables lo = obs;
    Observables hi = obs;
    lo.std_errors.clear();
    hi.std_errors.clear();
    double* x_lo = field(lo, name);
    double* x_hi = field(hi, name);
    const double x = *x_lo;
    const double h = kRelativeStep * std::max(std::abs(x), 1e-12);
    // Fall back to a one-sided difference at the edge of the valid domain.
    *x_lo = x - h;
    if (!is_valid(lo)) *x_lo = x;
    *x_hi = x + h;
    if (!is_valid(hi)) *x_hi = x;
    if (*x_hi == *x_lo) continue;
    const RateParts p_lo = evaluate(lo);
    const RateParts p_hi = evaluate(hi);
    const double slope =
        ((p_hi.privacy - p_hi.ec) - (p_lo.privacy - p_lo.ec)) / (*x_hi - *x_lo);
    const double contribution = slope * se;
    r.se_contributions[name] = contribution;
    variance += contribution * contribution;
  }
  r.se_skrpss = std::sqrt(variance);
  return r;
}

Observables observables_from_tally(const TallyTable& tally, const SessionConfig& config,
                                   const TallySettings& settings) {
  const ClassTally& s = tally[IntensityClass::kSignal];
  const ClassTally& w = tally[IntensityClass::kDecoy];
  const ClassTally& v = tally[IntensityClass::kVacuum];
  if (s.sifted == 0 || w.sifted == 0) {
    throw ValidationError("signal and decoy classes need sifted events");
  }
  if (v.sent == 0) throw ValidationError("no vacuum pulses were sent");
  Observables o;
  o.mu = config.mu;
  o.nu = config.nu;
  o.q_mu = s.gain();
  o.q_nu = w.gain();
  o.e_mu = s.qber();
  o.e_nu = w.qber();
  o.y0 = v.gain();
  o.e0 = settings.e0;
  o.d = settings.d;
  o.q_m = settings.q_m;
  o.f_ec = settings.f_ec;
  o.std_errors = {{"q_mu", s.se_gain()}, {"q_nu", w.se_gain()}, {"e_mu", s.se_qber()},
                  {"e_nu", w.se_qber()}, {"y0", v.se_gain()}};
  o.validate();
  return o;
}

}  // namespace vortexqkd
