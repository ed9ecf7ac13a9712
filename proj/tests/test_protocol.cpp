#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vortexqkd/protocol.hpp"

using namespace vortexqkd;

namespace {
constexpr double kTol = 1e-12;
constexpr double kPi = std::numbers::pi;
const OpticsConfig kOptics;

std::vector<HybridState> basis_states(Basis b) {
  std::vector<HybridState> out;
  for (int i = 1; i <= 4; ++i) out.push_back(mub_state(MubLabel(b, i), kOptics));
  return out;
}
}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("labels") {
  CHECK(MubLabel(Basis::kM1, 1).name() == "psi1");
  CHECK(MubLabel(Basis::kM2, 4).name() == "phi4");
  CHECK_THROWS_AS(MubLabel(Basis::kM1, 0), ValidationError);
  CHECK_THROWS_AS(MubLabel(Basis::kM2, 5), ValidationError);
  for (int k = 0; k < 8; ++k) CHECK(MubLabel::from_ordinal(k).ordinal() == k);
  CHECK(expected_detector(MubLabel(Basis::kM1, 3)) == DetectorId::kDH2);
  CHECK(expected_detector(MubLabel(Basis::kM2, 2)) == DetectorId::kDV1);
}

TEST_CASE("mub_state examples") {
  const OamTruncation& t = kOptics.truncation;
  const Complex c(1 / std::sqrt(2.0));
  const HybridState psi1 = product_state(jones::h(), {{1, c}, {-1, c}}, t);
  CHECK((mub_state(MubLabel(Basis::kM1, 1), kOptics) - psi1).norm() < kTol);
  const HybridState phi1 = product_state(jones::d(), {{1, c}, {-1, c * Complex(0, 1)}}, t);
  CHECK((mub_state(MubLabel(Basis::kM2, 1), kOptics) - phi1).norm() < kTol);

  const OpticsConfig wide = OpticsConfig::with_charge(QPlateCharge(1.0));
  const HybridState psi3 = product_state(jones::v(), {{2, c}, {-2, -c}}, wide.truncation);
  CHECK((mub_state(MubLabel(Basis::kM1, 3), wide) - psi3).norm() < kTol);
}

TEST_CASE("mub_state bases are orthonormal and mutually unbiased") {
  const auto m1 = basis_states(Basis::kM1);
  const auto m2 = basis_states(Basis::kM2);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      CHECK(std::abs(std::norm(inner(m1[i], m1[j])) - delta) < kTol);
      CHECK(std::abs(std::norm(inner(m2[i], m2[j])) - delta) < kTol);
      CHECK(std::abs(std::norm(inner(m1[i], m2[j])) - 0.25) < kTol);
    }
  }
}

TEST_CASE("frozen preparation angles") {
  struct Row { Basis b; int i; double a1; double da; };
  const Row rows[] = {
      {Basis::kM1, 1, 0, 0},           {Basis::kM1, 2, kPi / 2, 0},
      {Basis::kM1, 3, kPi / 2, kPi / 2}, {Basis::kM1, 4, 0, kPi / 2},
      {Basis::kM2, 1, kPi / 4, kPi / 4},  {Basis::kM2, 2, -kPi / 4, kPi / 4},
      {Basis::kM2, 3, -kPi / 4, -kPi / 4}, {Basis::kM2, 4, kPi / 4, -kPi / 4},
  };
  for (const Row& r : rows) {
    const PrepAngles got = prep_angles(MubLabel(r.b, r.i));
    CHECK(got.alpha1 == doctest::Approx(r.a1));
    CHECK(got.delta_alpha == doctest::Approx(r.da));
  }
}

TEST_CASE("pipeline reproduces every table state") {
  for (double q : {0.5, 1.0, -1.5}) {
    const OpticsConfig optics = OpticsConfig::with_charge(QPlateCharge(q));
    for (const MubLabel& label : all_labels()) {
      const PreparedState p = prepare_pipeline(prep_angles(label), optics);
      CHECK(std::abs(fidelity(p.state, mub_state(label, optics)) - 1.0) < kTol);
      CHECK(std::abs(p.state.squared_norm() - 1.0) < kTol);
      CHECK(std::abs(p.transmission - 0.5) < kTol);
    }
  }
}

TEST_CASE("pipeline needs the band to hold the shift") {
  OpticsConfig narrow;
  narrow.charge = QPlateCharge(1.0);
  narrow.truncation = OamTruncation(1);
  CHECK_THROWS_AS(mub_state(MubLabel(Basis::kM1, 1), narrow), BandViolation);
}

TEST_CASE("measurement effects are complete and positive") {
  for (Basis b : {Basis::kM1, Basis::kM2}) {
    const MeasurementModel m = measurement_effects(b, kOptics);
    REQUIRE(m.effects.size() == 4);
    Matrix sum = m.loss.matrix();
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(m.effects[k].detector == kDetectors[k]);
      const Matrix& e = m.effects[k].effect.matrix();
      CHECK((e - e.adjoint()).cwiseAbs().maxCoeff() < kTol);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(e);
      CHECK(eig.eigenvalues().minCoeff() > -kTol);
      sum += e;
    }
    CHECK((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() < kTol);
    Eigen::SelfAdjointEigenSolver<Matrix> loss(m.loss.matrix());
    CHECK(loss.eigenvalues().minCoeff() > -kTol);
  }
}

TEST_CASE("measurement maps each state to its detector") {
  for (Basis b : {Basis::kM1, Basis::kM2}) {
    const MeasurementModel matched = measurement_effects(b, kOptics);
    const Basis other = b == Basis::kM1 ? Basis::kM2 : Basis::kM1;
    const MeasurementModel crossed = measurement_effects(other, kOptics);
    for (int i = 1; i <= 4; ++i) {
      const MubLabel label(b, i);
      const HybridState s = mub_state(label, kOptics);
      const ClickDistribution p = click_distribution(s, matched);
      for (DetectorId d : kDetectors) {
        CHECK(std::abs(p[d] - (d == expected_detector(label) ? 0.5 : 0.0)) < kTol);
      }
      CHECK(std::abs(p.loss - 0.5) < kTol);

      const ClickDistribution u = click_distribution(s, crossed);
      for (DetectorId d : kDetectors) CHECK(std::abs(u[d] - 0.125) < kTol);
      CHECK(std::abs(u.loss - 0.5) < kTol);
    }
  }
  const ClickDistribution p3 =
      click_distribution(mub_state(MubLabel(Basis::kM1, 3), kOptics),
                         measurement_effects(Basis::kM1, kOptics));
  CHECK(p3[DetectorId::kDH2] == doctest::Approx(0.5).epsilon(kTol));
  const ClickDistribution p2 =
      click_distribution(mub_state(MubLabel(Basis::kM2, 2), kOptics),
                         measurement_effects(Basis::kM2, kOptics));
  CHECK(p2[DetectorId::kDV1] == doctest::Approx(0.5).epsilon(kTol));
}

TEST_CASE("a single basis rotation does not discriminate the diagonal basis") {
  const MeasurementModel m = measurement_effects(Basis::kM2, kOptics, Alpha4Policy::kNone);
  double worst = 1.0;
  for (int i = 1; i <= 4; ++i) {
    const MubLabel label(Basis::kM2, i);
    const ClickDistribution p = click_distribution(mub_state(label, kOptics), m);
    worst = std::min(worst, p[expected_detector(label)] / p.detected());
  }
  CHECK(worst < 0.9);
}

TEST_CASE("click_distribution probabilities sum to one") {
  const MeasurementModel m = measurement_effects(Basis::kM1, kOptics);
  const HybridState s = normalize(mub_state(MubLabel(Basis::kM1, 1), kOptics) +
                                  mub_state(MubLabel(Basis::kM2, 3), kOptics) * Complex(0.3, 0.7))
                            .first;
  const ClickDistribution p = click_distribution(s, m);
  CHECK(std::abs(p.detected() + p.loss - 1.0) < kTol);
  for (double x : p.detector) CHECK(x >= 0.0);
  CHECK_THROWS_AS(click_distribution(s * Complex(2.0), m), ValidationError);
}

TEST_CASE("crosstalk") {
  const CrosstalkTable ideal = crosstalk_matrix(0.0, kOptics);
  for (const auto& block : ideal.blocks) {
    CHECK((block - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < kTol);
  }
  CHECK(ideal.mean_qber() == doctest::Approx(0.0));

  const double delta = calibrate_misalignment(0.006, kOptics);
  CHECK(delta == doctest::Approx(std::asin(std::sqrt(0.006))).epsilon(1e-9));
  const CrosstalkTable t = crosstalk_matrix(delta, kOptics);
  CHECK(t.mean_efficiency() == doctest::Approx(0.994).epsilon(1e-9));
  for (int row = 0; row < 8; ++row) {
    CHECK(t.efficiency[row] == doctest::Approx(std::pow(std::cos(delta), 2)).epsilon(1e-9));
    const int b = row / 4;
    const int i = row % 4;
    double off = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) off += t.blocks[b](i, j);
    }
    CHECK(1.0 - t.efficiency[row] == doctest::Approx(off).epsilon(1e-12));
    CHECK(t.blocks[b](i, i) > 0.99);
  }
  for (const auto& row : t.raw) {
    double sum = 0.0;
    for (double x : row) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(kTol));
  }
  CHECK_THROWS_AS(calibrate_misalignment(-0.1, kOptics), ValidationError);
  CHECK_THROWS_AS(calibrate_misalignment(0.9, kOptics), ValidationError);
}

}  // TEST_SUITE
