#include "vortexqkd/elements.hpp"

#include <cmath>

#include <fmt/format.h>

namespace vortexqkd {

QPlateCharge::QPlateCharge(double q) {
  const double twice = 2.0 * q;
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-12 || rounded == 0.0) {
    throw ValidationError(
        fmt::format("q-plate charge must be a nonzero half-integer, got {}", q));
  }
  shift_ = static_cast<int>(rounded);
}

QPlateCharge QPlateCharge::from_shift(int shift) {
  if (shift == 0) throw ValidationError("q-plate OAM shift must be nonzero");
  QPlateCharge c;
  c.shift_ = shift;
  return c;
}

OpticalElement polarization_element(const Eigen::Matrix2cd& jones,
                                    const OamTruncation& truncation,
                                    std::string label) {
  const int n = truncation.oam_dim();
  Matrix m = Matrix::Zero(truncation.dim(), truncation.dim());
  for (int out = 0; out < 2; ++out) {
    for (int in = 0; in < 2; ++in) {
      m.block(out * n, in * n, n, n) =
          jones(out, in) * Matrix::Identity(n, n);
    }
  }
  return OpticalElement(std::move(m), truncation, std::move(label));
}

OpticalElement qplate(QPlateCharge q, const OamTruncation& truncation,
                      Handedness handedness) {
  JonesVector left = jones::l();
  JonesVector right = jones::r();
  if (handedness == Handedness::kSwapped) std::swap(left, right);

  const Eigen::Matrix2cd l_from_r = left * right.adjoint();
  const Eigen::Matrix2cd r_from_l = right * left.adjoint();
  const int n = truncation.oam_dim();
  const int lmax = truncation.l_max();
  const int shift = q.shift();

  Matrix m = Matrix::Zero(truncation.dim(), truncation.dim());
  for (int l = -lmax; l <= lmax; ++l) {
    const int down = l - shift;
    const int up = l + shift;
    for (int out = 0; out < 2; ++out) {
      for (int in = 0; in < 2; ++in) {
        if (truncation.contains(down)) {
          m(out * n + down + lmax, in * n + l + lmax) += l_from_r(out, in);
        }
        if (truncation.contains(up)) {
          m(out * n + up + lmax, in * n + l + lmax) += r_from_l(out, in);
        }
      }
    }
  }
  return OpticalElement(std::move(m), truncation,
                        fmt::format("Q({})", q.q()));
}

OpticalElement us_element(double alpha, const OamTruncation& truncation) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  Eigen::Matrix2cd j;
  j << c, s, s, -c;
  return polarization_element(j, truncation, fmt::format("U({})", alpha));
}

OpticalElement hwp(double theta, const OamTruncation& truncation) {
  return us_element(2.0 * theta, truncation);
}

OpticalElement ps_projector(double alpha, const OamTruncation& truncation) {
  const JonesVector p = jones::linear(alpha);
  return polarization_element(p * p.adjoint(), truncation,
                              fmt::format("P({})", alpha));
}

OpticalElement polarization_rotation(double delta, const OamTruncation& truncation) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  Eigen::Matrix2cd j;
  j << c, -s, s, c;
  return polarization_element(j, truncation, fmt::format("R({})", delta));
}

std::pair<OpticalElement, OpticalElement> pbs(const OamTruncation& truncation) {
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd v = Eigen::Matrix2cd::Zero();
  h(0, 0) = 1.0;
  v(1, 1) = 1.0;
  return {polarization_element(h, truncation, "PBS_H"),
          polarization_element(v, truncation, "PBS_V")};
}

OpticalElement smf_filter(const OamTruncation& truncation) {
  Matrix m = Matrix::Zero(truncation.dim(), truncation.dim());
  m(truncation.index(Pol::H, 0), truncation.index(Pol::H, 0)) = 1.0;
  m(truncation.index(Pol::V, 0), truncation.index(Pol::V, 0)) = 1.0;
  return OpticalElement(std::move(m), truncation, "SMF");
}

}  // namespace vortexqkd
