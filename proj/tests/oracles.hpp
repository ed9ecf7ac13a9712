#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the Monte Carlo kernel or the decoy/key-rate code it is used to check.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include "vortexqkd/channel.hpp"
#include "vortexqkd/state.hpp"

namespace oracle {

using vortexqkd::Complex;

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Gaussian probability mass inside a centered window, by quadrature.
inline double window_mass(double fwhm_ps, double window_ns) {
  const double sigma = fwhm_ps * 1e-3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  auto pdf = [sigma](double t) {
    return std::exp(-0.5 * t * t / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  return simpson(pdf, -0.5 * window_ns, 0.5 * window_ns, 20000);
}

/// d-dimensional Shannon entropy written out from the definition.
inline double entropy(double e, int d) {
  if (e == 0.0) return 0.0;
  return -(1.0 - e) * std::log2(1.0 - e) - e * std::log2(e / (d - 1));
}

/// Expected per-class statistics of a session, from Poisson thinning: given
/// per-photon click probabilities t_d, detector d fires independently with
/// probability 1 - exp(-m t_d)(1 - p_dark). Outcomes of multi-click events are
/// uniform over the clicked set, so errors are enumerated over all 15 subsets.
struct ClassExpectation {
  double gain = 0.0;
  double qber = 0.0;
  double double_click = 0.0;
};

inline ClassExpectation expect_class(const vortexqkd::SessionModel& model, double mean) {
  using namespace vortexqkd;
  const double dark = model.dark_probability();
  ClassExpectation out;
  double matched_detect = 0.0;
  double matched_error = 0.0;
  for (const MubLabel& label : all_labels()) {
    for (Basis bob : {Basis::kM1, Basis::kM2}) {
      const auto& t = model.photon_clicks(label, bob);
      std::array<double, 4> fire{};
      for (int d = 0; d < 4; ++d) fire[d] = 1.0 - std::exp(-mean * t[d]) * (1.0 - dark);
      double none = 1.0;
      for (double f : fire) none *= 1.0 - f;
      double multi = 0.0;
      double err = 0.0;
      const int correct = static_cast<int>(expected_detector(label));
      for (int mask = 1; mask < 16; ++mask) {
        double p = 1.0;
        int count = 0;
        for (int d = 0; d < 4; ++d) {
          const bool on = (mask >> d) & 1;
          p *= on ? fire[d] : 1.0 - fire[d];
          count += on;
        }
        if (count > 1) multi += p;
        const int wrong = count - ((mask >> correct) & 1);
        err += p * wrong / count;
      }
      out.gain += (1.0 - none) / 16.0;
      out.double_click += multi / 16.0;
      if (label.basis() == bob) {
        matched_detect += 1.0 - none;
        matched_error += err;
      }
    }
  }
  out.qber = matched_error / matched_detect;
  return out;
}

/// Random normalized state with optional support restriction |l| <= l_cap.
inline vortexqkd::HybridState random_state(std::mt19937_64& rng,
                                           const vortexqkd::OamTruncation& t,
                                           int l_cap = -1) {
  std::normal_distribution<double> g;
  vortexqkd::Vector v = vortexqkd::Vector::Zero(t.dim());
  for (int pol = 0; pol < 2; ++pol) {
    for (int l = -t.l_max(); l <= t.l_max(); ++l) {
      if (l_cap >= 0 && std::abs(l) > l_cap) continue;
      v(pol * t.oam_dim() + l + t.l_max()) = Complex(g(rng), g(rng));
    }
  }
  v.normalize();
  return vortexqkd::HybridState(v, t);
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
inline vortexqkd::Matrix random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  vortexqkd::Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<vortexqkd::Matrix> qr(m);
  return qr.householderQ();
}

}  // namespace oracle
