#include "vortexqkd/state.hpp"

#include <cmath>
#include <fmt/format.h>

namespace vortexqkd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kDegenerateNorm = 1e-15;

void require_same(const OamTruncation& a, const OamTruncation& b,
                  const char* what) {
  if (!(a == b)) {
    throw DimensionMismatch(fmt::format("{}: truncation l_max {} vs {}", what,
                                        a.l_max(), b.l_max()));
  }
}

}  // namespace

OamTruncation::OamTruncation(int l_max) : l_max_(l_max) {
  if (l_max < 0) {
    throw ValidationError(fmt::format("l_max must be non-negative, got {}", l_max));
  }
}

int OamTruncation::index(Pol pol, int l) const {
  if (!contains(l)) {
    throw BandViolation(
        fmt::format("OAM index {} outside band [-{}, {}]", l, l_max_, l_max_));
  }
  return static_cast<int>(pol) * oam_dim() + (l + l_max_);
}

namespace jones {
JonesVector h() { return {1.0, 0.0}; }
JonesVector v() { return {0.0, 1.0}; }
JonesVector l() { return {kInvSqrt2, Complex(0.0, kInvSqrt2)}; }
JonesVector r() { return {kInvSqrt2, Complex(0.0, -kInvSqrt2)}; }
JonesVector d() { return {kInvSqrt2, kInvSqrt2}; }
JonesVector a() { return {kInvSqrt2, -kInvSqrt2}; }
JonesVector linear(double angle) { return {std::cos(angle), std::sin(angle)}; }
}  // namespace jones

HybridState::HybridState(Vector amplitudes, OamTruncation truncation)
    : amplitudes_(std::move(amplitudes)), truncation_(truncation) {
  if (amplitudes_.size() != truncation_.dim()) {
    throw DimensionMismatch(fmt::format("state has {} amplitudes, truncation needs {}",
                                        amplitudes_.size(), truncation_.dim()));
  }
}

HybridState HybridState::zero(OamTruncation truncation) {
  return HybridState(Vector::Zero(truncation.dim()), truncation);
}

Complex HybridState::amplitude(Pol pol, int l) const {
  return amplitudes_(truncation_.index(pol, l));
}

HybridState HybridState::operator+(const HybridState& other) const {
  require_same(truncation_, other.truncation_, "state sum");
  return HybridState(amplitudes_ + other.amplitudes_, truncation_);
}

HybridState HybridState::operator-(const HybridState& other) const {
  require_same(truncation_, other.truncation_, "state difference");
  return HybridState(amplitudes_ - other.amplitudes_, truncation_);
}

HybridState HybridState::operator*(Complex c) const {
  return HybridState(amplitudes_ * c, truncation_);
}

OpticalElement::OpticalElement(Matrix matrix, OamTruncation truncation,
                               std::string label)
    : matrix_(std::move(matrix)), truncation_(truncation), label_(std::move(label)) {
  if (matrix_.rows() != truncation_.dim() || matrix_.cols() != truncation_.dim()) {
    throw DimensionMismatch(fmt::format("element '{}' is {}x{}, truncation needs {}",
                                        label_, matrix_.rows(), matrix_.cols(),
                                        truncation_.dim()));
  }
}

OpticalElement OpticalElement::identity(OamTruncation truncation) {
  return OpticalElement(Matrix::Identity(truncation.dim(), truncation.dim()),
                        truncation, "I");
}

OpticalElement OpticalElement::after(const OpticalElement& first) const {
  require_same(truncation_, first.truncation_, "element product");
  return OpticalElement(matrix_ * first.matrix_, truncation_,
                        label_ + "*" + first.label_);
}

OpticalElement OpticalElement::adjoint() const {
  return OpticalElement(matrix_.adjoint(), truncation_, label_ + "^H");
}

OpticalElement OpticalElement::operator+(const OpticalElement& other) const {
  require_same(truncation_, other.truncation_, "element sum");
  return OpticalElement(matrix_ + other.matrix_, truncation_,
                        label_ + "+" + other.label_);
}

HybridState basis_ket(Pol pol, int l, const OamTruncation& truncation) {
  Vector amps = Vector::Zero(truncation.dim());
  amps(truncation.index(pol, l)) = 1.0;
  return HybridState(std::move(amps), truncation);
}

HybridState product_state(const JonesVector& polarization,
                          std::initializer_list<std::pair<int, Complex>> oam,
                          const OamTruncation& truncation) {
  Vector amps = Vector::Zero(truncation.dim());
  for (const auto& [l, c] : oam) {
    amps(truncation.index(Pol::H, l)) += polarization(0) * c;
    amps(truncation.index(Pol::V, l)) += polarization(1) * c;
  }
  return HybridState(std::move(amps), truncation);
}

HybridState apply(const OpticalElement& element, const HybridState& s) {
  require_same(element.truncation(), s.truncation(), "apply");
  return HybridState(element.matrix() * s.amplitudes(), s.truncation());
}

Complex inner(const HybridState& a, const HybridState& b) {
  require_same(a.truncation(), b.truncation(), "inner");
  return a.amplitudes().dot(b.amplitudes());
}

std::pair<HybridState, double> normalize(const HybridState& s) {
  const double n = s.norm();
  if (!(n > kDegenerateNorm)) {
    throw DegenerateState(fmt::format("cannot normalize state of norm {:g}", n));
  }
  return {s * Complex(1.0 / n), n};
}

double fidelity(const HybridState& a, const HybridState& b) {
  const double denom = a.squared_norm() * b.squared_norm();
  if (!(denom > kDegenerateNorm * kDegenerateNorm)) {
    throw DegenerateState("fidelity of a zero state");
  }
  return std::norm(inner(a, b)) / denom;
}

double max_abs_diff(const OpticalElement& a, const OpticalElement& b) {
  require_same(a.truncation(), b.truncation(), "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace vortexqkd
