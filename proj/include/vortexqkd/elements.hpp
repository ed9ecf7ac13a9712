#pragma once

// Constructors for the optical operators acting on HybridState: q-plate,
// half-wave-plate-type polarization unitary, linear polarization projector,
// polarizing beam splitter, and single-mode-fiber zero-OAM filter.

#include <utility>

#include "vortexqkd/state.hpp"

namespace vortexqkd {

/// Topological charge q of a q-plate. Stored as the integer OAM shift 2q.
class QPlateCharge {
 public:
  /// Throws ValidationError unless 2q is a nonzero integer.
  explicit QPlateCharge(double q);
  static QPlateCharge from_shift(int shift);

  int shift() const noexcept { return shift_; }
  double q() const noexcept { return 0.5 * shift_; }

 private:
  QPlateCharge() = default;
  int shift_ = 1;
};

/// Circular-basis sign convention. `kSwapped` exchanges |L> and |R> and exists
/// so that convention-sensitive checks can be shown to fail.
enum class Handedness { kStandard, kSwapped };

/// Polarization-only operator (2x2) lifted to the full space as J (x) I_oam.
OpticalElement polarization_element(const Eigen::Matrix2cd& jones,
                                    const OamTruncation& truncation,
                                    std::string label);

/// |L><R| (x) sum_l |l-2q><l| + |R><L| (x) sum_l |l+2q><l|.
/// Amplitudes shifted past the band edge are dropped (norm loss).
OpticalElement qplate(QPlateCharge q, const OamTruncation& truncation,
                      Handedness handedness = Handedness::kStandard);

/// [[cos a, sin a], [sin a, -cos a]] on polarization. Unitary, Hermitian and
/// involutory.
OpticalElement us_element(double alpha, const OamTruncation& truncation);

/// Half-wave plate with fast axis at `theta`; equal to us_element(2 theta).
OpticalElement hwp(double theta, const OamTruncation& truncation);

/// Projector onto cos a |H> + sin a |V> on polarization.
OpticalElement ps_projector(double alpha, const OamTruncation& truncation);

/// Polarization rotation by `delta`: [[cos, -sin], [sin, cos]] = U(delta) U(0).
OpticalElement polarization_rotation(double delta, const OamTruncation& truncation);

/// (Pi_H, Pi_V) output ports of a lossless polarizing beam splitter.
std::pair<OpticalElement, OpticalElement> pbs(const OamTruncation& truncation);

/// Projector onto the l = 0 subspace, both polarizations.
OpticalElement smf_filter(const OamTruncation& truncation);

}  // namespace vortexqkd
