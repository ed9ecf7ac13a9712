#pragma once

// Alice's MUB preparation by polarization-only control of a vector vortex, and
// Bob's q-plate state-mapping projective measurement.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "vortexqkd/elements.hpp"
#include "vortexqkd/state.hpp"

namespace vortexqkd {

enum class Basis { kM1 = 0, kM2 = 1 };

std::string_view to_string(Basis basis);

/// One of the eight prepared states: psi_1..psi_4 (M1) or phi_1..phi_4 (M2).
class MubLabel {
 public:
  /// Throws ValidationError unless index is in 1..4.
  MubLabel(Basis basis, int index);

  Basis basis() const noexcept { return basis_; }
  int index() const noexcept { return index_; }
  /// 0..7, M1 first.
  int ordinal() const noexcept { return 4 * static_cast<int>(basis_) + index_ - 1; }
  static MubLabel from_ordinal(int ordinal);
  /// "psi1".."psi4", "phi1".."phi4".
  std::string name() const;

  friend bool operator==(const MubLabel&, const MubLabel&) = default;

 private:
  Basis basis_;
  int index_;
};

std::array<MubLabel, 8> all_labels();

/// Preparation angles of U(alpha2) P(alpha1); delta_alpha = alpha2 - alpha1.
struct PrepAngles {
  double alpha1 = 0.0;
  double delta_alpha = 0.0;

  double alpha2() const noexcept { return alpha1 + delta_alpha; }
};

enum class DetectorId { kDH1 = 0, kDV1 = 1, kDH2 = 2, kDV2 = 3 };

inline constexpr std::array<DetectorId, 4> kDetectors = {
    DetectorId::kDH1, DetectorId::kDV1, DetectorId::kDH2, DetectorId::kDV2};

std::string_view to_string(DetectorId id);

/// Detector on which a label lands when measured in its own basis.
DetectorId expected_detector(const MubLabel& label);

/// q-plate charge and OAM truncation shared by a preparation/measurement pair.
struct OpticsConfig {
  QPlateCharge charge{0.5};
  OamTruncation truncation{4};

  /// Default band: l_max = 4 |2q|, twice the largest shift any pipeline needs.
  static OpticsConfig with_charge(QPlateCharge charge);
};

/// Normalized ket of the MUB table, e.g. |H>(|2q> + |-2q>)/sqrt(2).
HybridState mub_state(const MubLabel& label, const OpticsConfig& optics);

/// Angles that make the preparation pipeline produce `label`, found by
/// enumerating the four (alpha1, delta_alpha) pairs of its basis.
PrepAngles prep_angles(const MubLabel& label);

struct PreparedState {
  HybridState state;
  /// Squared norm before normalization (the projector's transmission).
  double transmission;
};

/// U(alpha2) P(alpha1) Q(q) |H>|0>, with the projector realized as
/// U(alpha1) P(0) U(alpha1). Throws DegenerateState if nothing is transmitted.
PreparedState prepare_pipeline(const PrepAngles& angles, const OpticsConfig& optics,
                               Handedness handedness = Handedness::kStandard);

/// Second basis rotation acting on the zero-OAM polarization after the
/// measurement q-plates.
enum class Alpha4Policy { kEqualToAlpha3, kNone };

struct MeasurementEffect {
  DetectorId detector;
  OpticalElement effect;
};

struct MeasurementModel {
  Basis basis;
  std::vector<MeasurementEffect> effects;  // one per detector, kDetectors order
  OpticalElement loss;                     // identity minus the four effects
};

/// Per PBSa arm: U(a3) -> Pi_{H/V} -> Q_B -> SMF -> U(a4) -> Pi_{H/V}, with
/// a3 = 0 for M1 and pi/4 for M2.
MeasurementModel measurement_effects(Basis basis, const OpticsConfig& optics,
                                     Alpha4Policy policy = Alpha4Policy::kEqualToAlpha3);

struct ClickDistribution {
  std::array<double, 4> detector{};
  double loss = 0.0;

  double detected() const { return detector[0] + detector[1] + detector[2] + detector[3]; }
  double operator[](DetectorId id) const { return detector[static_cast<int>(id)]; }
};

/// Born rule over the effects. Throws ValidationError for unnormalized input.
ClickDistribution click_distribution(const HybridState& s, const MeasurementModel& model);

/// Prepared state after a polarization rotation error of `misalignment` rad.
HybridState misaligned_state(const MubLabel& label, double misalignment,
                             const OpticsConfig& optics);

struct CrosstalkTable {
  double misalignment = 0.0;
  /// Rows psi1..psi4, phi1..phi4 measured in their own basis; columns
  /// DH1, DV1, DH2, DV2, loss. Unconditional probabilities.
  std::array<std::array<double, 5>, 8> raw{};
  /// Matched-basis blocks renormalized over clicks: [0] = M1, [1] = M2.
  std::array<Eigen::Matrix4d, 2> blocks{};
  /// Projective efficiency 1 - e_b per row.
  std::array<double, 8> efficiency{};

  double mean_efficiency() const;
  double mean_qber() const { return 1.0 - mean_efficiency(); }
};

CrosstalkTable crosstalk_matrix(double misalignment, const OpticsConfig& optics);

/// Misalignment angle in [0, pi/4] whose mean matched-basis QBER equals
/// `target_qber`, by bisection. Throws ValidationError for targets outside
/// the reachable range.
double calibrate_misalignment(double target_qber, const OpticsConfig& optics);

}  // namespace vortexqkd
