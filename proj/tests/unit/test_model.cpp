#include <catch_amalgamated.hpp>

#include "nvspin/liouville.hpp"

using namespace nvspin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("model kinds parse", "[model]") {
  CHECK(parse_kind("two-level") == ModelKind::two_level);
  CHECK(parse_kind("seven-level-lindblad") == ModelKind::seven_level_lindblad);
  CHECK(parse_kind("seven-level-rate") == ModelKind::seven_level_rate);
  CHECK_THROWS_AS(parse_kind("three-level"), UnknownKind);
  CHECK_THROWS_AS(HyperfineTensors::preset("15N"), UnknownKind);
}

TEST_CASE("13Cb preset tensors", "[model]") {
  const auto h = HyperfineTensors::preset("13Cb");
  Mat3 g, e;
  g << -8.0, 0.0, -0.7, 0.0, -8.99, 0.0, -0.7, 0.0, -8.0;
  e << -3.78, 0.19, -1.47, 0.19, -5.83, 0.22, -1.47, 0.22, -4.12;
  CHECK((h.A_g - g).norm() == 0.0);
  CHECK((h.A_e - e).norm() == 0.0);
  CHECK((h.A_g - h.A_g.transpose()).norm() == 0.0);
  CHECK((h.scaled(10).A_e * 10 - e).norm() < 1e-14);
}

TEST_CASE("pumping rate is a Lorentzian in detuning", "[model]") {
  PumpingParams p;
  p.gamma_phi = 0.0;
  p.omega_R = 5.0;
  const double g = p.optical_linewidth();
  CHECK_THAT(g, WithinRel(0.5 / 0.012, 1e-14));
  // on resonance R = Omega^2 / (2 gamma)
  CHECK_THAT(pumping_rate(p), WithinRel(25.0 / (2 * g), 1e-12));
  p.delta = g;
  CHECK_THAT(pumping_rate(p), WithinRel(25.0 / (4 * g), 1e-12));
  p.R = 12.0;
  p.omega_R = 0.0;
  PumpingParams q = p;
  q.R.reset();
  q.omega_R = p.rabi();
  CHECK_THAT(q.rate(), WithinRel(12.0, 1e-12));
}

TEST_CASE("precession vectors", "[model]") {
  const auto h = HyperfineTensors::preset("13Cb");
  FieldSetup f;
  f.B = {0, 0, 5};
  PrecessionVectors pv = precession_vectors(f, h);
  CHECK(pv.a_g.norm() == 0.0);
  CHECK_THAT(pv.b_g(2), WithinRel(two_pi * -8.0, 1e-14));
  CHECK_THAT(pv.b_e(0), WithinRel(two_pi * -1.47, 1e-14));
  f.B = {0, 1, 0};
  pv = precession_vectors(f, h);
  // a_g = -2 pi (2 gamma_e / D_gs) A_g^T B_T
  CHECK_THAT(pv.a_g(1), WithinRel(two_pi * 2 * 28.025 / 2870 * 8.99, 1e-12));
  CHECK(pv.a_g(0) == 0.0);
  f.B = {0, 20, 0};
  CHECK_THROWS_AS(precession_vectors(f, h), PerturbationInvalid);
}

TEST_CASE("tilted frame conventions", "[model]") {
  const Frame fz = frame_from({0, 0, 2});
  CHECK_THAT(fz.phi, WithinAbs(pi / 2, 1e-15));
  CHECK((fz.eZ - Vec3::UnitZ()).norm() < 1e-15);
  const Frame f = frame_from({1.0, -2.0, 0.5});
  CHECK_THAT(f.omega(), WithinRel(std::sqrt(5.25), 1e-14));
  CHECK_THAT(f.eX.dot(f.eY), WithinAbs(0.0, 1e-15));
  CHECK_THAT(f.eX.cross(f.eY).dot(f.eZ), WithinAbs(1.0, 1e-14));
  CHECK(frame_from(Vec3::Zero()).degenerate);
}

TEST_CASE("mixed basis is orthonormal and keeps m=+-1 apart", "[model]") {
  for (const Vec3 B : {Vec3(0, 0, 0), Vec3(0, 5, 0), Vec3(3, 0, 4)}) {
    const MixedBasis mb = mixed_basis(2870, 28.025, B);
    CHECK((mb.V.adjoint() * mb.V - cmat::Identity(3, 3)).norm() < 1e-12);
    CHECK(std::norm(mb.V(1, 1)) > 0.9);
    CHECK(std::norm(mb.V(2, 2)) > 0.9);
  }
  const MixedBasis mb = mixed_basis(2870, 28.025, {0, 0, 10});
  CHECK_THAT(mb.energies(1) - mb.energies(2), WithinRel(two_pi * 2 * 28.025 * 10, 1e-12));
}

TEST_CASE("electron models are trace preserving", "[model]") {
  PumpingParams p;
  p.R = 50.0;
  FieldSetup f;
  f.B = {0, 3, 1};
  for (ModelKind k : {ModelKind::two_level, ModelKind::seven_level_rate, ModelKind::seven_level_lindblad}) {
    const ElectronModel m = build_electron_model(k, p, f);
    const Superoperator s = build_superoperator(m);
    CHECK((trace_row(m.dim) * s.L).norm() < 1e-9 * s.L.norm());
    CHECK(static_cast<int>(m.labels.size()) == m.dim);
  }
  p.gamma1 = -1;
  CHECK_THROWS_AS(build_electron_model(ModelKind::two_level, p), Error);
}

TEST_CASE("hyperfine operator forms", "[model]") {
  PumpingParams p;
  p.R = 83.0;
  FieldSetup f;
  f.B = {0, 2, 5};
  const auto h = HyperfineTensors::preset("13Cb");
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, p, f);
  const Coupling full = hyperfine_operator(h, f, m, true);
  const Coupling diag = hyperfine_operator(h, f, m, false);
  for (int a = 0; a < 3; ++a) {
    CHECK((full[a] - full[a].adjoint()).norm() < 1e-12);
    CHECK((cmat(full[a].diagonal().asDiagonal()) - diag[a]).norm() < 1e-12);
    CHECK(diag[a](lvl::S, lvl::S) == cplx(0.0));
  }
  // the diagonal m=0 entries approach the first-order a vectors
  const PrecessionVectors pv = precession_vectors(f, h);
  CHECK_THAT(diag[1](lvl::g0, lvl::g0).real(), WithinRel(pv.a_g(1), 0.02));
  CHECK_THAT(diag[2](lvl::gp, lvl::gp).real(), WithinRel(pv.b_g(2), 1e-3));
}
