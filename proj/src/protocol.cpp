#include "vortexqkd/protocol.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace vortexqkd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kNormTolerance = 1e-9;

double basis_angle(Basis basis) { return basis == Basis::kM1 ? 0.0 : kPi / 4.0; }

std::array<double, 2> candidate_angles(Basis basis) {
  if (basis == Basis::kM1) return {0.0, kPi / 2.0};
  return {kPi / 4.0, -kPi / 4.0};
}

}  // namespace

std::string_view to_string(Basis basis) { return basis == Basis::kM1 ? "M1" : "M2"; }

MubLabel::MubLabel(Basis basis, int index) : basis_(basis), index_(index) {
  if (index < 1 || index > 4) {
    throw ValidationError(fmt::format("MUB index must be in 1..4, got {}", index));
  }
}

MubLabel MubLabel::from_ordinal(int ordinal) {
  if (ordinal < 0 || ordinal > 7) {
    throw ValidationError(fmt::format("MUB ordinal must be in 0..7, got {}", ordinal));
  }
  return MubLabel(ordinal < 4 ? Basis::kM1 : Basis::kM2, ordinal % 4 + 1);
}

std::string MubLabel::name() const {
  return fmt::format("{}{}", basis_ == Basis::kM1 ? "psi" : "phi", index_);
}

std::array<MubLabel, 8> all_labels() {
  return {MubLabel(Basis::kM1, 1), MubLabel(Basis::kM1, 2), MubLabel(Basis::kM1, 3),
          MubLabel(Basis::kM1, 4), MubLabel(Basis::kM2, 1), MubLabel(Basis::kM2, 2),
          MubLabel(Basis::kM2, 3), MubLabel(Basis::kM2, 4)};
}

std::string_view to_string(DetectorId id) {
  switch (id) {
    case DetectorId::kDH1: return "DH1";
    case DetectorId::kDV1: return "DV1";
    case DetectorId::kDH2: return "DH2";
    case DetectorId::kDV2: return "DV2";
  }
  return "?";
}

DetectorId expected_detector(const MubLabel& label) {
  return kDetectors[static_cast<std::size_t>(label.index() - 1)];
}

OpticsConfig OpticsConfig::with_charge(QPlateCharge charge) {
  return OpticsConfig{charge, OamTruncation(4 * std::abs(charge.shift()))};
}

HybridState mub_state(const MubLabel& label, const OpticsConfig& optics) {
  const int s = optics.charge.shift();
  const Complex one(kInvSqrt2, 0.0);
  const bool m1 = label.basis() == Basis::kM1;
  // Polarization and relative OAM phase per index, in table order.
  JonesVector pol;
  Complex phase;
  switch (label.index()) {
    case 1: pol = m1 ? jones::h() : jones::d(); phase = m1 ? 1.0 : Complex(0, 1); break;
    case 2: pol = m1 ? jones::h() : jones::d(); phase = m1 ? -1.0 : Complex(0, -1); break;
    case 3: pol = m1 ? jones::v() : jones::a(); phase = m1 ? -1.0 : Complex(0, -1); break;
    default: pol = m1 ? jones::v() : jones::a(); phase = m1 ? 1.0 : Complex(0, 1); break;
  }
  return product_state(pol, {{s, one}, {-s, one * phase}}, optics.truncation);
}

PrepAngles prep_angles(const MubLabel& label) {
  static const std::array<PrepAngles, 8> table = [] {
    const OpticsConfig optics;
    std::array<PrepAngles, 8> out{};
    for (const MubLabel& target : all_labels()) {
      const HybridState want = mub_state(target, optics);
      int matches = 0;
      for (double a1 : candidate_angles(target.basis())) {
        for (double da : candidate_angles(target.basis())) {
          const PrepAngles angles{a1, da};
          if (fidelity(prepare_pipeline(angles, optics).state, want) > 1.0 - 1e-9) {
            out[static_cast<std::size_t>(target.ordinal())] = angles;
            ++matches;
          }
        }
      }
      if (matches != 1) {
        throw Error(fmt::format("{} matched {} preparation settings", target.name(), matches));
      }
    }
    return out;
  }();
  return table[static_cast<std::size_t>(label.ordinal())];
}

PreparedState prepare_pipeline(const PrepAngles& angles, const OpticsConfig& optics,
                               Handedness handedness) {
  const OamTruncation& t = optics.truncation;
  if (!t.contains(optics.charge.shift())) {
    throw BandViolation(fmt::format("truncation l_max {} cannot hold OAM shift {}",
                                    t.l_max(), optics.charge.shift()));
  }
  const OpticalElement u1 = us_element(angles.alpha1, t);
  const OpticalElement projector = u1.after(ps_projector(0.0, t)).after(u1);
  const OpticalElement chain = us_element(angles.alpha2(), t)
                                   .after(projector)
                                   .after(qplate(optics.charge, t, handedness));
  const HybridState out = apply(chain, basis_ket(Pol::H, 0, t));
  auto [state, norm] = normalize(out);
  return {std::move(state), norm * norm};
}

MeasurementModel measurement_effects(Basis basis, const OpticsConfig& optics,
                                     Alpha4Policy policy) {
  const OamTruncation& t = optics.truncation;
  if (!t.contains(2 * optics.charge.shift())) {
    throw BandViolation(fmt::format("truncation l_max {} cannot hold OAM shift {}",
                                    t.l_max(), 2 * optics.charge.shift()));
  }
  const double a3 = basis_angle(basis);
  const OpticalElement u3 = us_element(a3, t);
  const OpticalElement u4 = policy == Alpha4Policy::kEqualToAlpha3
                                ? us_element(a3, t)
                                : OpticalElement::identity(t);
  const auto [pi_h, pi_v] = pbs(t);
  const OpticalElement q = qplate(optics.charge, t);
  const OpticalElement smf = smf_filter(t);

  MeasurementModel model{basis, {}, OpticalElement::identity(t)};
  Matrix total = Matrix::Zero(t.dim(), t.dim());
  // PBSa arm H feeds D_H1/D_V1, arm V feeds D_H2/D_V2.
  const std::array<const OpticalElement*, 2> arms = {&pi_h, &pi_v};
  const std::array<const OpticalElement*, 2> outputs = {&pi_h, &pi_v};
  for (int arm = 0; arm < 2; ++arm) {
    const OpticalElement mapped = u4.after(smf).after(q).after(*arms[arm]).after(u3);
    for (int port = 0; port < 2; ++port) {
      const OpticalElement kraus = outputs[port]->after(mapped);
      Matrix effect = kraus.matrix().adjoint() * kraus.matrix();
      total += effect;
      const DetectorId id = kDetectors[static_cast<std::size_t>(2 * arm + port)];
      model.effects.push_back(
          {id, OpticalElement(std::move(effect), t, std::string(to_string(id)))});
    }
  }
  model.loss = OpticalElement(Matrix::Identity(t.dim(), t.dim()) - total, t, "loss");
  return model;
}

ClickDistribution click_distribution(const HybridState& s, const MeasurementModel& model) {
  if (std::abs(s.squared_norm() - 1.0) > kNormTolerance) {
    throw ValidationError(
        fmt::format("click_distribution needs a normalized state, |s|^2 = {}", s.squared_norm()));
  }
  ClickDistribution out;
  for (std::size_t i = 0; i < model.effects.size(); ++i) {
    out.detector[i] = std::max(0.0, inner(s, apply(model.effects[i].effect, s)).real());
  }
  out.loss = std::max(0.0, inner(s, apply(model.loss, s)).real());
  return out;
}

HybridState misaligned_state(const MubLabel& label, double misalignment,
                             const OpticsConfig& optics) {
  const HybridState prepared = prepare_pipeline(prep_angles(label), optics).state;
  if (misalignment == 0.0) return prepared;
  return apply(polarization_rotation(misalignment, optics.truncation), prepared);
}

double CrosstalkTable::mean_efficiency() const {
  double sum = 0.0;
  for (double e : efficiency) sum += e;
  return sum / static_cast<double>(efficiency.size());
}

CrosstalkTable crosstalk_matrix(double misalignment, const OpticsConfig& optics) {
  const std::array<MeasurementModel, 2> models = {
      measurement_effects(Basis::kM1, optics), measurement_effects(Basis::kM2, optics)};
  CrosstalkTable table;
  table.misalignment = misalignment;
  for (const MubLabel& label : all_labels()) {
    const auto row = static_cast<std::size_t>(label.ordinal());
    const auto b = static_cast<std::size_t>(label.basis());
    const ClickDistribution p =
        click_distribution(misaligned_state(label, misalignment, optics), models[b]);
    for (std::size_t d = 0; d < 4; ++d) table.raw[row][d] = p.detector[d];
    table.raw[row][4] = p.loss;

    const double clicks = p.detected();
    const int r = label.index() - 1;
    for (int d = 0; d < 4; ++d) {
      table.blocks[b](r, d) = p.detector[static_cast<std::size_t>(d)] / clicks;
    }
    table.efficiency[row] = table.blocks[b](r, r);
  }
  return table;
}

double calibrate_misalignment(double target_qber, const OpticsConfig& optics) {
  double lo = 0.0;
  double hi = kPi / 4.0;
  const double max_qber = crosstalk_matrix(hi, optics).mean_qber();
  if (!(target_qber >= 0.0) || target_qber > max_qber) {
    throw ValidationError(fmt::format(
        "target QBER {} outside reachable range [0, {}]", target_qber, max_qber));
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (crosstalk_matrix(mid, optics).mean_qber() < target_qber) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace vortexqkd
