#pragma once

// Dense linear algebra on the polarization (x) truncated-OAM Hilbert space.
//
// Storage order is H/V major: index = pol * (2 l_max + 1) + (l + l_max).
// Circular and diagonal polarization kets are built from H/V on demand.

#include <complex>
#include <initializer_list>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "vortexqkd/errors.hpp"

namespace vortexqkd {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

enum class Pol { H = 0, V = 1 };

/// OAM band l in [-l_max, l_max].
class OamTruncation {
 public:
  explicit OamTruncation(int l_max);

  int l_max() const noexcept { return l_max_; }
  int oam_dim() const noexcept { return 2 * l_max_ + 1; }
  int dim() const noexcept { return 2 * oam_dim(); }
  bool contains(int l) const noexcept { return l >= -l_max_ && l <= l_max_; }
  /// Throws BandViolation when l is outside the band.
  int index(Pol pol, int l) const;

  friend bool operator==(const OamTruncation&, const OamTruncation&) = default;

 private:
  int l_max_;
};

/// Two-component polarization Jones vector in the H/V basis.
using JonesVector = Eigen::Vector2cd;

namespace jones {
JonesVector h();
JonesVector v();
/// (|H> + i|V>)/sqrt(2)
JonesVector l();
/// (|H> - i|V>)/sqrt(2)
JonesVector r();
JonesVector d();
JonesVector a();
/// cos(a)|H> + sin(a)|V>
JonesVector linear(double angle);
}  // namespace jones

/// Pure (possibly subnormalized) state over polarization x OAM.
class HybridState {
 public:
  HybridState(Vector amplitudes, OamTruncation truncation);

  static HybridState zero(OamTruncation truncation);

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const OamTruncation& truncation() const noexcept { return truncation_; }
  Complex amplitude(Pol pol, int l) const;
  double squared_norm() const { return amplitudes_.squaredNorm(); }
  double norm() const { return amplitudes_.norm(); }

  HybridState operator+(const HybridState& other) const;
  HybridState operator-(const HybridState& other) const;
  HybridState operator*(Complex c) const;
  friend HybridState operator*(Complex c, const HybridState& s) { return s * c; }

 private:
  Vector amplitudes_;
  OamTruncation truncation_;
};

/// Linear operator on HybridState, with a label for diagnostics.
class OpticalElement {
 public:
  OpticalElement(Matrix matrix, OamTruncation truncation, std::string label);

  static OpticalElement identity(OamTruncation truncation);

  const Matrix& matrix() const noexcept { return matrix_; }
  const OamTruncation& truncation() const noexcept { return truncation_; }
  const std::string& label() const noexcept { return label_; }

  /// Operator product: (*this) after `first`.
  OpticalElement after(const OpticalElement& first) const;
  OpticalElement adjoint() const;
  OpticalElement operator+(const OpticalElement& other) const;

 private:
  Matrix matrix_;
  OamTruncation truncation_;
  std::string label_;
};

/// Unit ket |pol>|l>.
HybridState basis_ket(Pol pol, int l, const OamTruncation& truncation);

/// Product state |polarization> (x) sum_l c_l |l>.
HybridState product_state(const JonesVector& polarization,
                          std::initializer_list<std::pair<int, Complex>> oam,
                          const OamTruncation& truncation);

HybridState apply(const OpticalElement& element, const HybridState& s);

/// <a|b>, conjugate-linear in a.
Complex inner(const HybridState& a, const HybridState& b);

/// Unit-norm copy of s and its original norm. Throws DegenerateState below 1e-15.
std::pair<HybridState, double> normalize(const HybridState& s);

/// |<a|b>|^2 / (|a|^2 |b|^2): equality up to global phase.
double fidelity(const HybridState& a, const HybridState& b);

/// Largest absolute entry of the difference of two operators.
double max_abs_diff(const OpticalElement& a, const OpticalElement& b);

}  // namespace vortexqkd
