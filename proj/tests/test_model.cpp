#include <doctest.h>

#include <cmath>

#include "cascade/model.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace cascade;
using testing::error_kind;
using testing::max_abs_diff;

namespace {

Matrix4 rows(std::initializer_list<std::initializer_list<double>> entries) {
  Matrix4 m;
  int i = 0;
  for (const auto& row : entries) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix4 comm(const Matrix4& a, const Matrix4& b) { return a * b - b * a; }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(SystemParams(0.0, 0.0));
  CHECK_NOTHROW(SystemParams(2.5, 1.0));
  CHECK(error_kind([] { SystemParams(-0.1, 1.0); }) == ErrorKind::InvalidParams);
  CHECK(error_kind([] { SystemParams(0.5, 1.1); }) == ErrorKind::InvalidParams);
  CHECK(error_kind([] { SystemParams(0.5, -0.1); }) == ErrorKind::InvalidParams);
  CHECK(error_kind([] { SystemParams(std::nan(""), 1.0); }) == ErrorKind::InvalidParams);
  CHECK(SystemParams(1.0, 0.5).resonant());
  CHECK_FALSE(SystemParams(0.99, 0.5).resonant());
}

TEST_CASE("unscaled parameters reduce to the ratio") {
  const SystemParams p = SystemParams::from_unscaled(2.0, 1.0, 9.0, 0.7);
  CHECK(p.r() == doctest::Approx(0.5));
  CHECK(p.epsilon() == 0.7);
  CHECK(error_kind([] { SystemParams::from_unscaled(0.0, 1.0, 1.0, 1.0); }) ==
        ErrorKind::InvalidParams);
}

TEST_CASE("operators match the printed 4x4 forms at perfect coupling") {
  for (double r : {0.0, 0.3, 0.5, 1.0, 1.4}) {
    const auto ops = build_operators(SystemParams(r, 1.0));
    CAPTURE(r);
    CHECK(max_abs_diff(ops.R1, rows({{0, 0, r, 0}, {0, 0, 0, r}, {1, 0, 0, 0}, {0, 1, 0, 0}})) == 0.0);
    CHECK(max_abs_diff(ops.R2, rows({{0, r, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, r}, {0, 0, 1, 0}})) == 0.0);
    const Matrix4 c1 =
        std::sqrt(2.0) * rows({{0, -r, r, 0}, {-1, 0, 0, r}, {1, 0, 0, -r}, {0, 1, -1, 0}});
    CHECK(max_abs_diff(ops.C1, c1) < 1e-15);
    CHECK(ops.C2.isZero());
    const double s = 1 + r * r;
    const Matrix4 g = rows({{-2, 0, 0, 2 * r}, {0, -s, 2 * r * r, 0}, {0, 2, -s, 0}, {2 * r, 0, 0, -2 * r * r}});
    CHECK(max_abs_diff(ops.heff_generator, g) < 1e-14);
  }
}

TEST_CASE("resonant operators for imperfect coupling") {
  for (double eps : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const auto ops = build_operators(SystemParams(1.0, eps));
    const double se = std::sqrt(eps);
    CAPTURE(eps);
    const Matrix4 g = rows({{-2, 0, 0, 2 * se}, {0, -2, 2 * se, 0}, {0, 2 * se, -2, 0}, {2 * se, 0, 0, -2}});
    CHECK(max_abs_diff(ops.heff_generator, g) < 1e-14);
    const Matrix4 c1 = std::sqrt(2.0) *
                       rows({{0, -1, se, 0}, {-1, 0, 0, se}, {se, 0, 0, -1}, {0, se, -1, 0}});
    CHECK(max_abs_diff(ops.C1, c1) < 1e-14);
    const Matrix4 c2 =
        std::sqrt(2 * (1 - eps)) * rows({{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK(max_abs_diff(ops.C2, c2) < 1e-14);

    CHECK(comm(ops.C1, ops.C2).norm() <= 1e-12);
    CHECK(comm(ops.C1, ops.heff_generator).norm() <= 1e-12);
    CHECK(comm(ops.C2, ops.heff_generator).norm() <= 1e-12);
  }
}

TEST_CASE("off resonance the jump operators do not commute with the drift") {
  const auto ops = build_operators(SystemParams(0.5, 0.5));
  CHECK(comm(ops.C1, ops.heff_generator).norm() > 1e-3);
}

TEST_CASE("operators agree with an independent Kronecker construction") {
  for (double r : {0.0, 0.4, 1.0, 1.8}) {
    for (double eps : {0.0, 0.3, 1.0}) {
      const auto ops = build_operators(SystemParams(r, eps));
      const auto ref = oracle::ops(r, eps);
      CHECK(max_abs_diff(ops.C1, ref.C1) < 1e-14);
      CHECK(max_abs_diff(ops.C2, ref.C2) < 1e-14);
      CHECK(max_abs_diff(ops.H0, ref.H0) < 1e-14);
      CHECK(max_abs_diff(ops.heff_generator, ref.G) < 1e-14);
      CHECK((ops.H0 - ops.H0.adjoint()).norm() < 1e-14);
    }
  }
}

TEST_CASE("Bell states under the resonant operators") {
  const double eps = 0.5;
  const auto ops = build_operators(SystemParams(1.0, eps));
  const double lp = -2 * (1 - std::sqrt(eps));
  const double lm = -2 * (1 + std::sqrt(eps));
  const double c2 = std::sqrt(2 * (1 - eps));
  struct Case {
    StateVector from, to;
    double lambda, c2_sign;
  };
  for (const auto& k : {Case{basis::phi_plus(), basis::psi_plus(), lp, 1},
                        Case{basis::phi_minus(), basis::psi_minus(), lm, -1},
                        Case{basis::psi_plus(), basis::phi_plus(), lp, 1},
                        Case{basis::psi_minus(), basis::phi_minus(), lm, -1}}) {
    const Vector4 x = k.from.amplitudes();
    CHECK((ops.heff_generator * x - k.lambda * x).norm() < 1e-14);
    CHECK((ops.C1 * x - k.lambda / std::sqrt(2.0) * k.to.amplitudes()).norm() < 1e-14);
    CHECK((ops.C2 * x - k.c2_sign * c2 * k.to.amplitudes()).norm() < 1e-14);
  }
}

TEST_CASE("jump operator collapses onto fixed states") {
  for (double r : {0.3, 0.5, 1.0}) {
    const auto ops = build_operators(SystemParams(r, 1.0));
    // E+ to +-Psi-, E- to +-(|00> - r|11>)/sqrt(1+r^2), sign set by the input.
    const Vector4 plus(0.6, 0, 0, 0.8);
    const Vector4 out_plus = ops.C1 * plus;
    const double sgn_plus = (0.6 - r * 0.8) > 0 ? 1.0 : -1.0;
    CHECK((out_plus.normalized() - sgn_plus * basis::psi_minus().amplitudes()).norm() < 1e-14);
    const Vector4 minus(0, 0.28, 0.96, 0);
    const Vector4 target = Vector4(-r, 0, 0, 1) / std::sqrt(1 + r * r);
    const double sgn_minus = (0.28 - 0.96) > 0 ? 1.0 : -1.0;
    CHECK((ops.C1 * minus).normalized().isApprox(sgn_minus * target, 1e-14));
  }
}

TEST_CASE("Liouvillian matches an entry-by-entry superoperator oracle") {
  for (double r : {0.0, 0.8, 1.0}) {
    for (double eps : {1.0, 0.35}) {
      const ComplexMatrix L = build_liouvillian(SystemParams(r, eps));
      const ComplexMatrix ref = oracle::liouvillian(oracle::ops(r, eps));
      CHECK((L - ref).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("Liouvillian preserves trace and agrees with the printed master equation") {
  const double r = 0.8;
  const auto ops = build_operators(SystemParams(r, 1.0));
  const ComplexMatrix L = build_liouvillian(SystemParams(r, 1.0));
  Matrix4 rho;
  rho << 0.3, cplx(0.1, 0.05), 0, 0.2, cplx(0.1, -0.05), 0.2, 0.05, 0, 0, 0.05, 0.1, 0, 0.2, 0, 0, 0.4;
  const Matrix4 out = unvectorize(L * vectorize(rho));
  CHECK(std::abs(out.trace()) < 1e-14);

  // Scaled master equation written with R_i directly.
  Matrix4 expected = Matrix4::Zero();
  for (const Matrix4* R : {&ops.R1, &ops.R2}) {
    expected += 2.0 * *R * rho * R->adjoint() - R->adjoint() * *R * rho - rho * R->adjoint() * *R;
  }
  expected += 2.0 * (rho * ops.R1.adjoint() * ops.R2 - ops.R2 * rho * ops.R1.adjoint() +
                     ops.R2.adjoint() * ops.R1 * rho - ops.R1 * rho * ops.R2.adjoint());
  CHECK(max_abs_diff(out, expected) < 1e-14);
}

TEST_CASE("vectorize and unvectorize are inverse column stacks") {
  Matrix4 m;
  for (int i = 0; i < 16; ++i) m(i % 4, i / 4) = cplx(i, -i);
  const auto v = vectorize(m);
  CHECK(v[5] == cplx(5, -5));
  CHECK(unvectorize(v) == m);
  CHECK(error_kind([] { unvectorize(ComplexVector::Zero(9)); }) == ErrorKind::InvalidState);
}

TEST_CASE("analytic no-jump eigenpairs have small residuals") {
  for (double r : {0.0, 0.25, 0.5, 0.75, 1.0, 1.6}) {
    const auto ops = build_operators(SystemParams(r, 1.0));
    const auto pairs = nojump_eigensystem(SystemParams(r, 1.0));
    REQUIRE(pairs.size() == 4);
    for (const auto& p : pairs) {
      const Vector4 x = p.state.amplitudes();
      CHECK(x.norm() == doctest::Approx(1.0));
      CHECK((ops.heff_generator * x - p.eigenvalue * x).norm() <= 1e-10);
    }
    CHECK(pairs[0].eigenvalue == 0.0);
    CHECK(pairs[1].eigenvalue == doctest::Approx(-2 * (1 + r * r)));
    CHECK(pairs[2].eigenvalue == doctest::Approx(-(r - 1) * (r - 1)));
    CHECK(pairs[3].eigenvalue == doctest::Approx(-(r + 1) * (r + 1)));
  }
}

TEST_CASE("the fourth eigenvector needs r on the |10> amplitude") {
  // As printed, |10> - r|01> is only an eigenvector at r = 1.
  const double r = 0.5;
  const auto ops = build_operators(SystemParams(r, 1.0));
  const Vector4 printed = Vector4(0, 1, -r, 0);
  const Vector4 corrected = Vector4(0, r, -1, 0);
  const double lambda = -(r + 1) * (r + 1);
  CHECK((ops.heff_generator * printed - lambda * printed).norm() > 0.1);
  CHECK((ops.heff_generator * corrected - lambda * corrected).norm() < 1e-14);
}

TEST_CASE("resonant eigenpairs for imperfect coupling") {
  const double eps = 0.3;
  const auto ops = build_operators(SystemParams(1.0, eps));
  for (const auto& p : nojump_eigensystem(SystemParams(1.0, eps))) {
    const Vector4 x = p.state.amplitudes();
    CHECK((ops.heff_generator * x - p.eigenvalue * x).norm() <= 1e-12);
  }
  CHECK(error_kind([] { nojump_eigensystem(SystemParams(0.5, 0.5)); }) == ErrorKind::Unsupported);
}

TEST_CASE("Bell basis is orthonormal and spans the space") {
  Matrix4 b;
  b << basis::phi_plus().amplitudes(), basis::phi_minus().amplitudes(),
      basis::psi_plus().amplitudes(), basis::psi_minus().amplitudes();
  CHECK((b.adjoint() * b - Matrix4::Identity()).norm() < 1e-15);
  CHECK(basis::psi_minus().c01().real() > 0);
  CHECK(basis::phi_minus().c00().real() > 0);
}

TEST_CASE("Pauli operators in the canonical basis") {
  CHECK(basis::sigma_zz().diagonal().real() == Eigen::Vector4d(1, -1, -1, 1));
  CHECK((basis::sigma_minus(1) * basis::ket11().amplitudes() - basis::ket01().amplitudes()).norm() == 0.0);
  CHECK((basis::sigma_plus(2) * basis::ket00().amplitudes() - basis::ket01().amplitudes()).norm() == 0.0);
  CHECK(error_kind([] { basis::sigma_z(3); }) == ErrorKind::InvalidParams);
}

TEST_CASE("state normalization and fidelity") {
  const StateVector s(cplx(0, 3), 0, 0, 4);
  CHECK(s.normalized().norm() == doctest::Approx(1.0));
  CHECK(fidelity(s, StateVector(cplx(0, 6), 0, 0, 8)) == doctest::Approx(1.0));
  CHECK(fidelity(basis::phi_plus(), basis::phi_minus()) < 1e-15);
  CHECK(error_kind([] { StateVector().normalized(); }) == ErrorKind::InvalidState);
}

}  // TEST_SUITE
