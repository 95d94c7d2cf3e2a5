#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "geophase/systems.hpp"

using namespace geophase;

namespace {

std::mt19937 rng(314);

Vec random_vec(int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

double subspace_distance(const Mat& A, const Mat& B) {
  // largest principal-angle sine between equal-dimension column spans
  const Mat Pa = A * A.transpose(), Pb = B * B.transpose();
  return (Pa - Pb).norm();
}

}  // namespace

TEST_CASE("vertical subalgebra of the disk") {
  const auto disk = make_vertical_disk(1, 1, 1, 2.0);
  for (double phi : {0.0, 0.7, 2.5}) {
    Vec b(1);
    b << phi;
    const auto basis = vertical_subalgebra(disk.sys, disk.cons, {b, identity(disk.sys.group)});
    REQUIRE(basis.size() == 1);
    Eigen::Vector3d expect(2.0 * std::cos(phi), 2.0 * std::sin(phi), 1.0);
    expect.normalize();
    const Vec got = basis[0].coords;
    CHECK(std::fabs(std::fabs(got.dot(expect)) - 1.0) < 1e-12);
  }
}

TEST_CASE("vertical subalgebra of the turntable is Ad_gamma xi_z") {
  const auto tb = make_turntable_ball(1, 1, 1, 0.7);
  const auto& G = tb.sys.group;
  for (int trial = 0; trial < 20; ++trial) {
    BundleState st{random_vec(2), exp(G, AlgebraVector(random_vec(3)))};
    const auto basis = vertical_subalgebra(tb.sys, tb.cons, st);
    REQUIRE(basis.size() == 1);
    Vec ez = Vec::Zero(3);
    ez(2) = 1;
    const Vec expect = Ad(G, st.g, AlgebraVector(ez)).coords;
    CHECK(std::fabs(std::fabs(basis[0].coords.dot(expect)) - 1.0) < 1e-12);
  }
}

TEST_CASE("purely kinematical rows give an empty basis") {
  ConfigurationSystem sys;
  sys.base_dim = 2;
  sys.group = LieGroupDescriptor::abelian(1, 0);
  sys.metric = [](const Vec&) {
    MetricBlocks k;
    k.k_BB = Mat::Identity(2, 2);
    k.k_Bg = Mat::Zero(2, 1);
    k.k_gg = Mat::Identity(1, 1);
    return k;
  };
  ConstraintData cons;
  cons.m = 1;
  cons.rows = [](const Vec& b) {
    ConstraintRows r;
    r.A = Mat(1, 2);
    r.A << b(1), 0;
    r.W = Mat::Identity(1, 1);
    return r;
  };
  const auto basis = vertical_subalgebra(sys, cons, {random_vec(2), identity(sys.group)});
  CHECK(basis.empty());
}

TEST_CASE("Ad-equivariance of the vertical subalgebra") {
  const auto tb2 = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb2.sys.group;
  for (int trial = 0; trial < 40; ++trial) {
    BundleState st{random_vec(2, 0.4), exp(G, AlgebraVector(random_vec(6)))};
    const auto g = exp(G, AlgebraVector(random_vec(6)));
    const auto base_q = vertical_subalgebra(tb2.sys, tb2.cons, st);
    const auto base_gq =
        vertical_subalgebra(tb2.sys, tb2.cons, {st.b, mul(G, g, st.g)});
    REQUIRE(base_q.size() == 4);
    REQUIRE(base_gq.size() == 4);
    Mat A(6, 4), B(6, 4);
    for (int i = 0; i < 4; ++i) {
      A.col(i) = Ad(G, g, base_q[i]).coords;
      B.col(i) = base_gq[i].coords;
    }
    // Ad is orthogonal for this group, so the shifted columns stay orthonormal.
    CHECK(subspace_distance(A, B) < 1e-10);
  }
}

TEST_CASE("principal case check") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  Vec b(1);
  b << 0.3;
  const auto rep = check_principal_case(disk.sys, disk.cons, b);
  CHECK(rep.holds);
  CHECK(rep.rank_W == 2);
  CHECK(rep.rank_WA == 2);

  const auto tb = make_turntable_ball(1, 1, 1, 0.7);
  CHECK(check_principal_case(tb.sys, tb.cons, random_vec(2)).holds);

  // artificial pure-base row: W-row = 0, A-row != 0
  ConstraintData broken = disk.cons;
  broken.m = 3;
  broken.rows = [inner = disk.cons.rows](const Vec& b) {
    ConstraintRows r = inner(b);
    ConstraintRows out;
    out.A = Mat(3, 1);
    out.A << r.A, 1.0;
    out.W = Mat(3, 3);
    out.W << r.W, Mat::Zero(1, 3);
    return out;
  };
  const auto rep2 = check_principal_case(disk.sys, broken, b);
  CHECK_FALSE(rep2.holds);
}

TEST_CASE("constraint residual: membership, linearity, turntable row") {
  const auto disk = make_vertical_disk(1, 1, 1, 1.0);
  Vec b(1);
  b << 1.1;
  BundleState st{b, identity(disk.sys.group)};
  const double thetadot = 0.8;
  Vec eta(3);
  eta << std::cos(1.1) * thetadot, std::sin(1.1) * thetadot, thetadot;
  Vec bdot(1);
  bdot << 2.0;
  CHECK(constraint_residual(disk.sys, disk.cons, st, bdot, AlgebraVector(eta), 0).norm() < 1e-12);

  Vec eta_eps = eta;
  eta_eps(0) += 0.25;
  const Vec r = constraint_residual(disk.sys, disk.cons, st, bdot, AlgebraVector(eta_eps), 0);
  CHECK(r(0) == doctest::Approx(0.25));
  CHECK(r(1) == doctest::Approx(0.0));

  // turntable: exact row => first residual zero.  omega = -eta.
  const auto tb = make_turntable_ball(1, 1, 1.0, 0.7);
  Vec xy(2);
  xy << 0.4, -0.2;
  Vec xydot(2);
  xydot << 0.3, 0.1;
  // -xdot + a*omega_y = Omega*y  =>  omega_y = (Omega*y + xdot) / a
  Vec eta_tb(3);
  eta_tb << 0.0, -(0.7 * xy(1) + xydot(0)) / 1.0, 0.5;
  BundleState st_tb{xy, identity(tb.sys.group)};
  const Vec rr =
      constraint_residual(tb.sys, tb.cons, st_tb, xydot, AlgebraVector(eta_tb), 0.0);
  CHECK(std::fabs(rr(0)) < 1e-14);

  // linear constraints are homogeneous of degree 1
  const Vec r1 = constraint_residual(disk.sys, disk.cons, st, bdot, AlgebraVector(eta_eps), 0);
  const Vec r2 = constraint_residual(disk.sys, disk.cons, st, Vec(2 * bdot),
                                     AlgebraVector(Vec(2 * eta_eps)), 0);
  CHECK((r2 - 2 * r1).norm() < 1e-13);
}

TEST_CASE("frame propagation: identity, disk rotation, degeneracy guards") {
  const auto disk = make_vertical_disk(1, 1, 1, 1.0);
  std::vector<double> ts;
  std::vector<BundleState> states;
  for (int i = 0; i <= 100; ++i) {
    ts.push_back(i * 0.01);
    Vec b(1);
    b << ts.back();
    states.push_back({b, identity(disk.sys.group)});
  }
  const auto fr = build_frame(disk.sys, disk.cons, ts, states);
  CHECK(fr.k == 1);
  for (size_t i = 0; i < ts.size(); ++i) {
    Eigen::Vector3d expect(std::cos(ts[i]), std::sin(ts[i]), 1.0);
    expect.normalize();
    // propagated frame follows the analytic nullspace continuously (no sign flips)
    CHECK(fr.basis[i].col(0).dot(expect) == doctest::Approx(1.0).epsilon(1e-10));
  }

  // identical states: identical basis
  const Mat again = propagate_frame(fr.basis[0], fr.basis[0]);
  CHECK((again - fr.basis[0]).norm() < 1e-14);

  // dimension change
  CHECK_THROWS_AS(propagate_frame(fr.basis[0], Mat::Identity(3, 2)), DegenerateRankError);
  // discontinuity
  Mat far(3, 1);
  far << -std::sin(0.0), std::cos(0.0), 0.0;
  // orthogonal to frame at t=0 up to the z component; overlap ~ 0
  CHECK_THROWS_AS(propagate_frame(fr.basis[0], far), FrameDiscontinuityError);
}

TEST_CASE("constant-W system keeps a constant frame") {
  ConfigurationSystem sys;
  sys.base_dim = 1;
  sys.group = LieGroupDescriptor::abelian(3, 0);
  sys.metric = [](const Vec&) {
    MetricBlocks k;
    k.k_BB = Mat::Identity(1, 1);
    k.k_Bg = Mat::Zero(1, 3);
    k.k_gg = Mat::Identity(3, 3);
    return k;
  };
  ConstraintData cons;
  cons.m = 1;
  cons.rows = [](const Vec&) {
    ConstraintRows r;
    r.A = Mat::Zero(1, 1);
    r.W = Mat(1, 3);
    r.W << 1, 1, 0;
    return r;
  };
  std::vector<double> ts;
  std::vector<BundleState> states;
  for (int i = 0; i < 10; ++i) {
    ts.push_back(0.1 * i);
    states.push_back({Vec::Constant(1, 0.1 * i), identity(sys.group)});
  }
  const auto fr = build_frame(sys, cons, ts, states);
  for (size_t i = 1; i < fr.basis.size(); ++i)
    CHECK((fr.basis[i] - fr.basis[0]).norm() < 1e-14);
}

TEST_CASE("nullspace threshold flags ambiguous rank") {
  Mat M(2, 3);
  M << 1, 0, 0, 0, 1e-9, 0;  // singular value sits in the ambiguity band
  CHECK_THROWS_AS(nullspace_basis(M), DegenerateRankError);
}
