#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "geophase/integrators.hpp"
#include "geophase/systems.hpp"

using namespace geophase;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937 rng(1234);

Vec random_vec(int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

}  // namespace

TEST_CASE("every example system passes the principal-case check on a chart sample") {
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto tb = make_turntable_ball(1, 1, 1, 0.7);
  const auto balls = make_two_ball(10, 1, 1, 0.2);
  for (int i = 0; i < 100; ++i) {
    CHECK(check_principal_case(disk.sys, disk.cons, random_vec(1, 2.0)).holds);
    CHECK(check_principal_case(tb.sys, tb.cons, random_vec(2, 1.0)).holds);
    CHECK(check_principal_case(balls.sys, balls.cons, random_vec(2, 0.6)).holds);
  }
}

TEST_CASE("constructors validate their parameters") {
  CHECK_THROWS_AS(make_vertical_disk(-1, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_two_ball(1, 1, 0.2, 1.0), std::invalid_argument);  // r < a
  CHECK_THROWS_AS(make_magnetic_dipole(Eigen::Vector3d(1, 1, 1), 0.5,
                                       [](double) { return Eigen::Vector3d::Zero(); },
                                       MomentumCovector(Vec(Vec::Zero(3)))),
                  std::invalid_argument);
}

TEST_CASE("two-ball chart and section") {
  for (int trial = 0; trial < 50; ++trial) {
    const Vec w = random_vec(2, 0.8);
    const Eigen::Vector3d b = two_ball_chart_point(w);
    CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const Eigen::Matrix3d Rb = two_ball_section(w);
    CHECK((Rb * Rb.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((Rb * Eigen::Vector3d::UnitZ() - b).norm() < 1e-12);

    // velocity map against finite differences of the section
    const Vec dw = random_vec(2);
    const double eps = 1e-7;
    const Eigen::Matrix3d Rp = two_ball_section((w + eps * dw).eval());
    const Eigen::Matrix3d Rm = two_ball_section((w - eps * dw).eval());
    const Eigen::Vector3d omega_fd = vee(((Rp - Rm) / (2 * eps)) * Rb.transpose());
    const Eigen::Vector3d omega = two_ball_section_velocity_map(w) * Eigen::Vector2d(dw);
    CHECK((omega - omega_fd).norm() < 1e-6 * (1.0 + omega.norm()));

    // chart Jacobian against finite differences
    const Eigen::Vector3d db_fd =
        (two_ball_chart_point((w + eps * dw).eval()) - two_ball_chart_point((w - eps * dw).eval())) /
        (2 * eps);
    CHECK((two_ball_chart_jacobian(w) * Eigen::Vector2d(dw) - db_fd).norm() < 1e-6);
  }
}

TEST_CASE("two-ball: dim g^q = 4 and the h generators satisfy the constraints") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  for (int trial = 0; trial < 20; ++trial) {
    BundleState st{random_vec(2, 0.6), exp(G, AlgebraVector(random_vec(6)))};
    CHECK(vertical_subalgebra(tb.sys, tb.cons, st).size() == 4);
    const ConstraintRows rows = tb.cons.rows(st.b);
    for (const auto& h : tb.horizontal_symmetry)
      CHECK((rows.W * Ad_matrix(G, inverse(G, st.g)) * h.coords).norm() < 1e-12);
  }
}

TEST_CASE("two-ball simulation: conservation and the third vertical equation") {
  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = BaseCurve::analytic(
      [](double t) {
        Vec b(2);
        b << 0.3 * std::cos(2 * kPi * t), 0.3 * std::sin(2 * kPi * t);
        return b;
      },
      [](double t) {
        Vec b(2);
        b << -0.3 * 2 * kPi * std::sin(2 * kPi * t), 0.3 * 2 * kPi * std::cos(2 * kPi * t);
        return b;
      });
  const Grid grid{0.0, 1.0, 1e-3};
  const auto nh = lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, grid);
  Vec xi1;
  {
    const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
    xi1 = 0.4 * frame[0].coords + 0.15 * frame[2].coords - 0.1 * frame[3].coords;
  }
  const auto traj = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));

  // i*_h J conserved
  const Vec muh = traj.J_spatial[0].head<3>();
  for (int i = 0; i < traj.n_nodes(); i += 50)
    CHECK((traj.J_spatial[i].head<3>() - muh).norm() < 1e-7);

  // third vertical equation: (d/dt (R3^-1 R3'), Ad_{g3 R_b} xi_z) = 0,
  // with R3^-1 R3' = Ad_{g3}(eta_R - eta_3) of the full motion.
  std::vector<Vec> body3(traj.n_nodes());
  std::vector<Eigen::Vector3d> axis(traj.n_nodes());
  for (int i = 0; i < traj.n_nodes(); ++i) {
    const int j = 2 * i;
    const GroupElement gc = mul(G, traj.g[i], nh.g0[j]);
    const Vec eta_c = nh.eta0[j] + Ad_matrix(G, inverse(G, nh.g0[j])) * traj.xi[i];
    const Eigen::Matrix3d Rg3 = rotation_matrix(gc.comps[1].quat);
    body3[i] = Rg3 * (eta_c.head<3>() - eta_c.tail<3>());
    axis[i] = Rg3 * two_ball_section(nh.b[j]) * Eigen::Vector3d::UnitZ();
  }
  double worst = 0;
  for (int i = 0; i < traj.n_nodes(); ++i) {
    const Vec ddt = stencil_derivative(body3, i, traj.h);
    worst = std::max(worst, std::fabs(ddt.dot(axis[i])));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("turntable: converted left action reproduces the paper momentum map") {
  const auto tb = make_turntable_ball(1.3, 0.9, 1.0, 0.7);
  const auto& G = tb.sys.group;
  for (int trial = 0; trial < 20; ++trial) {
    // physical ball rotation h, chart coordinate gamma = h^{-1}
    const GroupElement h = exp(G, AlgebraVector(random_vec(3)));
    const GroupElement gamma = inverse(G, h);
    const Vec omega_body = random_vec(3);  // h^{-1} h' as a vector
    // eta = gamma^{-1} gamma' = -h' h^{-1} in the chart
    const Vec eta = -(rotation_matrix(h.quat) * omega_body).eval();
    const Vec J =
        momentum(tb.sys, {random_vec(2), gamma}, random_vec(2), AlgebraVector(eta)).coords;
    const double mk2 = 1.3 * 0.81;
    CHECK((J + mk2 * omega_body).norm() < 1e-10);  // J = -m k^2 g^{-1} g'
  }
}

TEST_CASE("registry resolves names and rejects unknown ones") {
  CHECK(make_system_by_name("vertical_disk", {{"m", 2.0}}).sys.name == "vertical_disk");
  CHECK(make_system_by_name("turntable_ball", {}).sys.name == "turntable_ball");
  CHECK(make_system_by_name("two_ball", {}).sys.name == "two_ball");
  CHECK(make_system_by_name("free_body", {}).sys.name == "free_body");
  CHECK(make_system_by_name("magnetic_dipole", {{"L0z", 1.5}}).dipolar.has_value());
  CHECK_THROWS_AS(make_system_by_name("nope", {}), std::invalid_argument);
}

TEST_CASE("oracle self-consistency: disk closed form vs quadrature") {
  for (double t : {0.5, 1.5, 4.0}) {
    const Eigen::Vector3d a =
        oracle::disk_constant_rates(1, 1, 1.2, 0.9, 0.3, 0.5, 0.1, -0.2, 0.4, t);
    const Eigen::Vector3d b = oracle::disk_quadrature(
        1.2, [](double s) { return 0.9 * s + 0.3; }, 0.5, 0.1, -0.2, 0.4, 0.0, t, 1e-3);
    CHECK((a - b).norm() < 1e-10);
  }
}

TEST_CASE("oracle self-consistency: Euler top conserves energy and momentum norm") {
  const Eigen::Vector3d inertia(1, 2, 3), Pi0(0.3, 0.4, 1.2);
  const auto ref = oracle::euler_top(inertia, Pi0, 7.0, 1e-4);
  CHECK(ref.Pi.norm() == doctest::Approx(Pi0.norm()).epsilon(1e-9));
  const double E0 = Pi0.cwiseProduct(Pi0.cwiseQuotient(inertia)).sum();
  const double E1 = ref.Pi.cwiseProduct(ref.Pi.cwiseQuotient(inertia)).sum();
  CHECK(E1 == doctest::Approx(E0).epsilon(1e-9));
  CHECK((ref.R * ref.R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}
