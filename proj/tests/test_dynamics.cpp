#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "geophase/systems.hpp"

using namespace geophase;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937 rng(99);

Vec random_vec(int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

BaseCurve disk_linear_phi(double omega, double phi0 = 0.0) {
  return BaseCurve::analytic(
      [=](double t) { return Vec(Vec::Constant(1, omega * t + phi0)); },
      [=](double) { return Vec(Vec::Constant(1, omega)); });
}

BaseCurve static_base(const Vec& b0) {
  return BaseCurve::analytic([b0](double) { return b0; },
                             [n = b0.size()](double) { return Vec(Vec::Zero(n)); });
}

BaseCurve fourier2d(const Eigen::Vector4d& ax, const Eigen::Vector4d& ay) {
  auto pos = [=](double t) {
    Vec b(2);
    b << ax(0) * std::sin(kPi * t) + ax(1) * std::cos(2 * kPi * t) + ax(2) * t + ax(3),
        ay(0) * std::sin(2 * kPi * t) + ay(1) * std::cos(kPi * t) + ay(2) * t + ay(3);
    return b;
  };
  auto vel = [=](double t) {
    Vec b(2);
    b << ax(0) * kPi * std::cos(kPi * t) - ax(1) * 2 * kPi * std::sin(2 * kPi * t) + ax(2),
        ay(0) * 2 * kPi * std::cos(2 * kPi * t) - ay(1) * kPi * std::sin(kPi * t) + ay(2);
    return b;
  };
  return BaseCurve::analytic(pos, vel);
}

}  // namespace

TEST_CASE("disk: thetadot stays constant and (x, y) follows the quadrature oracle") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  const BaseCurve base = disk_linear_phi(1.0);
  Vec b0(1);
  b0 << 0.0;
  const BundleState q0{b0, identity(G)};
  const Grid grid{0.0, 2 * kPi, 1e-3};
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, q0, grid);
  const double thetadot = 0.5;
  Vec xi1(3);
  xi1 << thetadot, 0.0, thetadot;  // R cos(0) thetadot, R sin(0) thetadot, thetadot
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));

  for (int i = 0; i < traj.n_nodes(); i += 500)
    CHECK(traj.xi[i](2) == doctest::Approx(thetadot).epsilon(1e-10));
  CHECK(traj.max_res_constraint() < 1e-10);
  CHECK(traj.max_res_momentum() < 1e-8);

  for (int i = 0; i < traj.n_nodes(); i += 1000) {
    const double t = traj.t[i];
    const Eigen::Vector3d ref = oracle::disk_quadrature(
        1.0, [](double s) { return s; }, thetadot, 0, 0, 0, 0.0, t, 1e-3);
    const GroupElement c_group = mul(G, traj.g[i], nh.g0[2 * i]);
    CHECK(std::fabs(c_group.coords(0) - ref(0)) < 1e-7);
    CHECK(std::fabs(c_group.coords(1) - ref(1)) < 1e-7);
  }
}

TEST_CASE("turntable: spatial omega_z constant, matches the reference field") {
  const double a = 1.0, Omega = 0.7;
  const auto tb = make_turntable_ball(1.0, 1.0, a, Omega);
  const auto& G = tb.sys.group;
  const BaseCurve base = fourier2d({0.3, 0.1, 0.05, 0.2}, {0.2, -0.15, 0.1, -0.1});
  const Grid grid{0.0, 1.0, 1e-3};
  const BundleState q0{base.position(0.0), identity(G)};
  AffineSelector sel;
  sel.kind = AffineSelector::PinComponents;
  sel.pins = {{2, 0.0}};
  const auto aff = lift_affine(tb.sys, tb.cons, base, q0, grid, sel);

  const double omega_z0 = 0.5;
  // xi = lambda * Ad_{gamma0} e_z at t=0 with gamma0(0) = e; spatial
  // omega_z = -eta_c,z, so lambda(0) = -omega_z0.
  Vec ez = Vec::Zero(3);
  ez(2) = 1.0;
  const Vec xi1 = -omega_z0 * ez;
  const auto traj = simulate(tb.sys, tb.cons, aff, identity(G), AlgebraVector(xi1));
  CHECK(traj.max_res_constraint() < 1e-9);
  CHECK(traj.max_res_momentum() < 1e-7);

  double drift = 0;
  for (int i = 0; i < traj.n_nodes(); ++i) {
    const int j = 2 * i;
    const Vec eta_c =
        aff.eta0[j] + Ad_matrix(G, inverse(G, aff.g0[j])) * traj.xi[i];
    drift = std::max(drift, std::fabs(-eta_c(2) - omega_z0));
  }
  CHECK(drift < 1e-9);

  // physical ball rotation h = (g_c)^{-1} vs the reference vector field
  const Eigen::Matrix3d ref = oracle::turntable_reference(
      [&](double t) { return Eigen::Vector2d(base.position(t)); },
      [&](double t) { return Eigen::Vector2d(base.velocity(t)); }, a, Omega, omega_z0, 0.0, 1.0,
      1e-4);
  const GroupElement gc = mul(G, traj.g.back(), aff.g0.back());
  const Eigen::Matrix3d h_sim = rotation_matrix(inverse(G, gc).quat);
  CHECK((h_sim - ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("equilibrium: stationary base, zero initial velocity") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  Vec w0(2);
  w0 << 0.2, -0.1;
  const auto nh = lift_nonholonomic(tb.sys, tb.cons, static_base(w0), {w0, identity(G)},
                                    {0.0, 0.5, 1e-3});
  const auto traj =
      simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector::zero(G));
  for (int i = 0; i < traj.n_nodes(); i += 100) {
    CHECK(group_distance(G, traj.g[i], identity(G)) < 1e-12);
    CHECK(traj.xi[i].norm() < 1e-12);
  }
}

TEST_CASE("free rigid body reproduces the Euler equations") {
  const Eigen::Vector3d inertia(1, 2, 3);
  const auto body = make_free_body(inertia);
  const auto& G = body.sys.group;
  const BaseCurve none = static_base(Vec());
  const Grid grid{0.0, 10.0, 1e-3};
  const auto gauge = lift_trivial(body.sys, none, {Vec(), identity(G)}, grid);

  Vec mu(3);
  mu << 0.3, 0.4, 1.2;
  const auto traj = solve_conserved_momentum(body.sys, gauge, MomentumCovector(mu), identity(G));

  // spatial momentum conservation
  for (int i = 0; i < traj.n_nodes(); i += 1000)
    CHECK((traj.J_spatial[i] - mu).norm() < 1e-7);

  // fine-step reference for Pi and the attitude
  const auto ref = oracle::euler_top(inertia, mu.head<3>(), 10.0, 1e-4);
  CHECK((traj.Pi.back().head<3>() - ref.Pi).norm() < 1e-7);
  CHECK((rotation_matrix(traj.g.back().quat) - ref.R).cwiseAbs().maxCoeff() < 1e-6);

  // kinetic energy constant
  for (int i = 0; i < traj.n_nodes(); i += 2000)
    CHECK(traj.K[i] == doctest::Approx(traj.K[0]).epsilon(1e-10));

  // E constant for the autonomous system
  for (int i = 0; i < traj.n_nodes(); i += 2000)
    CHECK(traj.E[i] == doctest::Approx(traj.E[0]).epsilon(1e-10));
}

TEST_CASE("conserved momentum with mu = 0 stays at the mechanical gauge") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = BaseCurve::analytic(
      [](double t) {
        Vec b(2);
        b << 0.3 * std::sin(2 * kPi * t), 0.3 * (1 - std::cos(2 * kPi * t));
        return b;
      },
      [](double t) {
        Vec b(2);
        b << 0.3 * 2 * kPi * std::cos(2 * kPi * t), 0.3 * 2 * kPi * std::sin(2 * kPi * t);
        return b;
      });
  const auto mech =
      lift_mechanical(tb.sys, base, {base.position(0.0), identity(G)}, {0.0, 1.0, 1e-3});
  const auto traj = solve_conserved_momentum(tb.sys, mech, MomentumCovector::zero(G), identity(G));
  for (int i = 0; i < traj.n_nodes(); i += 200) {
    CHECK(group_distance(G, traj.g[i], identity(G)) < 1e-10);
    CHECK(traj.Pi[i].norm() < 1e-12);
  }
}

TEST_CASE("abelian group: Pi is constant under conserved momentum") {
  ConfigurationSystem sys;
  sys.base_dim = 1;
  sys.group = LieGroupDescriptor::abelian(2, 0);
  sys.metric = [](const Vec& b) {
    MetricBlocks k;
    k.k_BB = Mat::Identity(1, 1);
    k.k_Bg = Mat::Zero(1, 2);
    k.k_gg = Mat::Identity(2, 2) * (2.0 + std::sin(b(0)));
    return k;
  };
  const BaseCurve base = BaseCurve::analytic(
      [](double t) { return Vec(Vec::Constant(1, std::sin(t))); },
      [](double t) { return Vec(Vec::Constant(1, std::cos(t))); });
  const auto gauge =
      lift_trivial(sys, base, {base.position(0.0), identity(sys.group)}, {0.0, 1.0, 1e-3});
  Vec mu(2);
  mu << 0.4, -0.3;
  const auto traj = solve_conserved_momentum(sys, gauge, MomentumCovector(mu), identity(sys.group));
  for (int i = 0; i < traj.n_nodes(); i += 100) CHECK((traj.Pi[i] - mu).norm() < 1e-12);
}

TEST_CASE("abelian solution: disk quadrature against simulate") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  const BaseCurve base = disk_linear_phi(1.0);
  Vec b0(1);
  b0 << 0.0;
  const Grid grid{0.0, 2.0, 1e-3};
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, grid);
  const double thetadot = 0.5;

  // J(cdot)(t) from the known conservation law of the disk
  auto Jc = [&](double t) {
    Vec J(3);
    J << thetadot * std::cos(t), thetadot * std::sin(t), thetadot;
    return J;
  };
  const auto sol = abelian_solution(disk.sys, disk.cons, nh, Jc);
  CHECK(sol.max_parallel_transport_residual < 1e-8);

  Vec xi1(3);
  xi1 << thetadot, 0, thetadot;
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));
  for (int i = 0; i < traj.n_nodes(); i += 250)
    CHECK(group_distance(G, sol.g[i], traj.g[i]) < 1e-8);
}

TEST_CASE("energy track: identity and quadrature routes agree") {
  // driven gauge with nonzero J0: two-ball NH lift
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = fourier2d({0.2, 0.05, 0.0, 0.1}, {0.15, -0.1, 0.0, -0.05});
  const auto nh =
      lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, {0.0, 1.0, 1e-3});
  Vec xi1 = Vec::Zero(6);
  {
    // admissible initial velocity: a frame combination
    const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
    for (size_t i = 0; i < frame.size(); ++i) xi1 += 0.2 * frame[i].coords;
  }
  const auto traj = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));
  const auto track = energy_track(tb.sys, traj, nh);
  CHECK(track.max_difference < 1e-8);
  // driven: E is genuinely non-constant
  double spread = 0;
  for (double e : track.E_identity) spread = std::max(spread, std::fabs(e - track.E_identity[0]));
  CHECK(spread > 1e-4);
}

TEST_CASE("mechanical gauge: E = -K") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = fourier2d({0.2, 0.05, 0.0, 0.1}, {0.15, -0.1, 0.0, -0.05});
  const auto mech =
      lift_mechanical(tb.sys, base, {base.position(0.0), identity(G)}, {0.0, 1.0, 1e-3});
  const auto traj = solve_conserved_momentum(
      tb.sys, mech, momentum(tb.sys, mech.state(0), mech.bdot[0], AlgebraVector(mech.eta0[0])),
      identity(G));
  for (int i = 0; i < traj.n_nodes(); i += 100)
    CHECK(traj.E[i] == doctest::Approx(-traj.K[i]).epsilon(1e-12));
}

TEST_CASE("constraint torque lies in the kernel of i*") {
  // disk: torque orthogonal to the frame direction
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  const BaseCurve base = disk_linear_phi(1.0);
  Vec b0(1);
  b0 << 0.0;
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, {0.0, 1.0, 1e-3});
  Vec xi1(3);
  xi1 << 0.5, 0.0, 0.5;
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));
  const auto torque = constraint_torque(traj);
  double worst = 0, magnitude = 0;
  for (int i = 0; i < traj.n_nodes(); ++i) {
    worst = std::max(worst, torque.i_star_norm[i]);
    magnitude = std::max(magnitude, torque.torque[i].norm());
  }
  CHECK(worst < 1e-7);
  CHECK(magnitude > 0.1);  // the disk really needs constraint forces

  // unconstrained conserved-momentum run: torque it self vanishes
  const auto body = make_free_body(Eigen::Vector3d(1, 2, 3));
  const auto gauge = lift_trivial(body.sys, static_base(Vec()), {Vec(), identity(body.sys.group)},
                                  {0.0, 1.0, 1e-3});
  Vec mu(3);
  mu << 0.3, 0.4, 1.2;
  const auto free_traj =
      solve_conserved_momentum(body.sys, gauge, MomentumCovector(mu), identity(body.sys.group));
  const auto free_torque = constraint_torque(free_traj);
  double worst_free = 0;
  for (int i = 0; i < free_traj.n_nodes(); ++i)
    worst_free = std::max(worst_free, free_torque.torque[i].norm());
  CHECK(worst_free < 1e-7);
}

TEST_CASE("gauge covariance: disk simulated in a transformed gauge") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  const BaseCurve base = disk_linear_phi(1.0);
  Vec b0(1);
  b0 << 0.0;
  const Grid grid{0.0, 1.5, 1e-3};
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, grid);
  Vec xi1(3);
  xi1 << 0.5, 0.0, 0.5;
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));

  // smooth random gauge motion g_cg(t) = exp(p(t) X) with body velocity p'(t) X
  const Vec X = random_vec(3);
  auto gcg = [&](double t) {
    const double p = 0.3 * std::sin(2 * t) + 0.1 * t;
    const double pdot = 0.6 * std::cos(2 * t) + 0.1;
    return std::make_pair(exp(G, AlgebraVector((p * X).eval())), Vec((pdot * X).eval()));
  };
  const auto custom = gauge_transform(nh, gcg);
  // same physical initial velocity: xi-tilde(0) = xi - Ad_{g0...} zeta; for
  // the abelian disk this is xi1 - zeta(0).
  const Vec xi1_t = xi1 - gcg(0.0).second;
  const GroupElement g1_t = mul(G, identity(G), inverse(G, gcg(0.0).first));
  const auto traj2 = simulate(disk.sys, disk.cons, custom, g1_t, AlgebraVector(xi1_t));

  for (int i = 0; i < traj.n_nodes(); i += 250) {
    const GroupElement c1 = mul(G, traj.g[i], nh.g0[2 * i]);
    const GroupElement c2 = mul(G, traj2.g[i], custom.g0[2 * i]);
    CHECK(group_distance(G, c1, c2) < 1e-8);
  }
}

TEST_CASE("step halving shows fourth-order convergence of simulate") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = fourier2d({0.2, 0.05, 0.0, 0.1}, {0.15, -0.1, 0.0, -0.05});
  auto endpoint = [&](double h) {
    const auto nh =
        lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, {0.0, 1.0, h});
    Vec xi1 = Vec::Zero(6);
    const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
    for (size_t i = 0; i < frame.size(); ++i) xi1 += 0.2 * frame[i].coords;
    return simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1)).g.back();
  };
  const auto g1 = endpoint(2e-2), g2 = endpoint(1e-2), g3 = endpoint(5e-3);
  const double r = group_distance(G, g1, g2) / group_distance(G, g2, g3);
  CHECK(r > 11.0);
  CHECK(r < 24.0);
}

TEST_CASE("initial velocity violating the constraints is rejected") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  Vec b0(1);
  b0 << 0.0;
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, disk_linear_phi(1.0), {b0, identity(G)},
                                    {0.0, 1.0, 1e-3});
  Vec bad(3);
  bad << 1.0, 0.0, 0.0;  // xdot without the rolling relation
  CHECK_THROWS_AS(simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(bad)),
                  PreconditionError);
}

TEST_CASE("trajectory export round trip schema") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  Vec b0(1);
  b0 << 0.0;
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, disk_linear_phi(1.0), {b0, identity(G)},
                                    {0.0, 0.1, 1e-2});
  Vec xi1(3);
  xi1 << 0.5, 0.0, 0.5;
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));
  write_trajectory_csv(traj, "/tmp/geophase_test_traj.csv", {"version 1", "seed 0"});
  std::ifstream f("/tmp/geophase_test_traj.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "# version 1");
  std::getline(f, line);
  std::getline(f, line);
  CHECK(line.rfind("t,g0,g1,g2,xi0", 0) == 0);
  CHECK(line.find("lambda0") != std::string::npos);
  CHECK(line.find("res_momentum") != std::string::npos);
}
