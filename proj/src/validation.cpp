#include "geophase/validation.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "geophase/integrators.hpp"

namespace geophase {

namespace {

constexpr double kPi = std::numbers::pi;

BaseCurve no_base() {
  return BaseCurve::analytic([](double) { return Vec(); }, [](double) { return Vec(); });
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

BaseCurve circle2d(double rho, double cx, double cy, double phase) {
  return BaseCurve::analytic(
      [=](double t) {
        Vec b(2);
        b << cx + rho * std::cos(2 * kPi * t + phase), cy + rho * std::sin(2 * kPi * t + phase);
        return b;
      },
      [=](double t) {
        Vec b(2);
        b << -rho * 2 * kPi * std::sin(2 * kPi * t + phase),
            rho * 2 * kPi * std::cos(2 * kPi * t + phase);
        return b;
      });
}

Vec random_vec(std::mt19937& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

}  // namespace

bool ValidationSummary::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed()) return false;
  return true;
}

void ValidationSummary::add(std::string name, double value, double threshold) {
  checks.push_back({std::move(name), value, threshold});
}

ValidationSummary acceptance_vertical_disk() {
  ValidationSummary out;
  const auto disk = make_vertical_disk(1, 1, 1, 1);
  const auto& G = disk.sys.group;
  const BaseCurve base = BaseCurve::analytic(
      [](double t) { return Vec(Vec::Constant(1, t)); },
      [](double) { return Vec(Vec::Constant(1, 1.0)); });
  Vec b0(1);
  b0 << 0.0;
  const Grid grid{0.0, 2 * kPi, 1e-3};
  const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, grid);
  const double thetadot = 0.5;
  Vec xi1(3);
  xi1 << thetadot, 0.0, thetadot;
  const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));

  double drift = 0;
  for (int i = 0; i < traj.n_nodes(); ++i)
    drift = std::max(drift, std::fabs(traj.xi[i](2) - thetadot));
  out.add("disk.thetadot_constant", drift, 1e-8);

  double xy_err = 0;
  for (int i = 0; i < traj.n_nodes(); ++i) {
    const double t = traj.t[i];
    const GroupElement c_group = mul(G, traj.g[i], nh.g0[2 * i]);
    xy_err = std::max(xy_err, std::fabs(c_group.coords(0) - 0.5 * std::sin(t)));
    xy_err = std::max(xy_err, std::fabs(c_group.coords(1) - 0.5 * (1.0 - std::cos(t))));
  }
  out.add("disk.xy_vs_quadrature_oracle", xy_err, 1e-6);

  // second route: the abelian exponential-quadrature solution
  auto Jc = [&](double t) {
    Vec J(3);
    J << thetadot * std::cos(t), thetadot * std::sin(t), thetadot;
    return J;
  };
  const auto sol = abelian_solution(disk.sys, disk.cons, nh, Jc);
  double route_err = 0;
  for (int i = 0; i < traj.n_nodes(); i += 25)
    route_err = std::max(route_err, group_distance(G, sol.g[i], traj.g[i]));
  out.add("disk.abelian_solution_route", route_err, 1e-8);
  out.add("disk.parallel_transport_residual", sol.max_parallel_transport_residual, 1e-8);
  return out;
}

ValidationSummary acceptance_turntable(unsigned seed) {
  ValidationSummary out;
  std::mt19937 rng(seed ^ 0x7475726eu);
  const double a = 1.0, Omega = 0.7;
  const auto tb = make_turntable_ball(1.0, 1.0, a, Omega);
  const auto& G = tb.sys.group;
  const Eigen::Vector4d ax = 0.25 * Eigen::Vector4d(random_vec(rng, 4));
  const Eigen::Vector4d ay = 0.25 * Eigen::Vector4d(random_vec(rng, 4));
  const BaseCurve base = fourier2d(ax, ay);
  const Grid grid{0.0, 1.0, 1e-3};
  AffineSelector sel;
  sel.kind = AffineSelector::PinComponents;
  sel.pins = {{2, 0.0}};
  const auto aff = lift_affine(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, grid, sel);

  const double omega_z0 = 0.5;
  Vec xi1 = Vec::Zero(3);
  xi1(2) = -omega_z0;
  const auto traj = simulate(tb.sys, tb.cons, aff, identity(G), AlgebraVector(xi1));

  double drift = 0;
  for (int i = 0; i < traj.n_nodes(); ++i) {
    const int j = 2 * i;
    const Vec eta_c = aff.eta0[j] + Ad_matrix(G, inverse(G, aff.g0[j])) * traj.xi[i];
    drift = std::max(drift, std::fabs(-eta_c(2) - omega_z0));
  }
  out.add("turntable.omega_z_drift", drift, 1e-8);
  out.add("turntable.affine_constraint_residual", traj.max_res_constraint(), 1e-8);

  const Eigen::Matrix3d ref = oracle::turntable_reference(
      [&](double t) { return Eigen::Vector2d(base.position(t)); },
      [&](double t) { return Eigen::Vector2d(base.velocity(t)); }, a, Omega, omega_z0, 0.0, 1.0,
      1e-4);
  const GroupElement gc = mul(G, traj.g.back(), aff.g0.back());
  const Eigen::Matrix3d h_sim = rotation_matrix(inverse(G, gc).quat);
  out.add("turntable.vs_reference_field", (h_sim - ref).cwiseAbs().maxCoeff(), 1e-6);
  return out;
}

ValidationSummary acceptance_conserved_momentum() {
  ValidationSummary out;
  const Eigen::Vector3d inertia(1, 2, 3);
  const auto body = make_free_body(inertia);
  const auto& G = body.sys.group;
  Vec mu(3);
  mu << 0.3, 0.4, 1.2;

  const auto gauge = lift_trivial(body.sys, no_base(), {Vec(), identity(G)}, {0.0, 10.0, 1e-3});
  const auto traj = solve_conserved_momentum(body.sys, gauge, MomentumCovector(mu), identity(G));

  double jdrift = 0;
  for (int i = 0; i < traj.n_nodes(); ++i)
    jdrift = std::max(jdrift, (traj.J_spatial[i] - mu).norm());
  out.add("top.J_spatial_drift", jdrift, 1e-6);

  const auto ref = oracle::euler_top(inertia, mu.head<3>(), 10.0, 1e-4);
  out.add("top.Pi_vs_fine_reference", (traj.Pi.back().head<3>() - ref.Pi).norm(), 1e-6);

  const auto P = isotropy_projector(G, MomentumCovector(mu), Mat::Identity(3, 3));
  const auto dec = reconstruct_phases(group_curve_of(traj), P, &traj.Pi);
  out.add("top.factorization_residual", dec.max_factor_residual(), 1e-8);

  const auto ef = dynamic_phase_energy_form(body.sys, traj, gauge, P);
  out.add("top.energy_form_vs_ode_theta_dyn",
          std::fabs(dec.theta_dyn.back() - ef.theta_dyn.back()), 1e-5);

  // Closed Pi loop: the polhode period exceeds the stated horizon, so detect
  // it on a longer scout run and refine.
  double T = 0;
  {
    const auto scout_gauge =
        lift_trivial(body.sys, no_base(), {Vec(), identity(G)}, {0.0, 40.0, 2e-3});
    const auto scout = solve_conserved_momentum(body.sys, scout_gauge, MomentumCovector(mu),
                                                identity(G));
    double best = 1e9;
    int besti = -1;
    for (int i = 1000; i < scout.n_nodes(); ++i) {
      const double gap = (scout.Pi[i] - scout.Pi[0]).norm();
      if (gap < best) {
        best = gap;
        besti = i;
      }
    }
    double lo = scout.t[besti] - 4e-3, hi = scout.t[besti] + 4e-3;
    auto gap_at = [&](double tt) {
      const int n = std::max(4, static_cast<int>(std::lround(tt / 1e-3)));
      const auto gg = lift_trivial(body.sys, no_base(), {Vec(), identity(G)}, {0.0, tt, tt / n});
      const auto tr = solve_conserved_momentum(body.sys, gg, MomentumCovector(mu), identity(G));
      return (tr.Pi.back() - tr.Pi[0]).norm();
    };
    for (int it = 0; it < 36; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (gap_at(m1) < gap_at(m2))
        hi = m2;
      else
        lo = m1;
    }
    T = 0.5 * (lo + hi);
  }
  const int n = static_cast<int>(std::lround(T / 1e-3));
  const auto loop_gauge = lift_trivial(body.sys, no_base(), {Vec(), identity(G)}, {0.0, T, T / n});
  const auto loop_traj =
      solve_conserved_momentum(body.sys, loop_gauge, MomentumCovector(mu), identity(G));
  out.add("top.Pi_loop_gap", (loop_traj.Pi.back() - loop_traj.Pi[0]).norm(), 1e-6);

  const auto loop_dec = reconstruct_phases(group_curve_of(loop_traj), P, &loop_traj.Pi);
  std::vector<Eigen::Vector3d> loop(loop_traj.n_nodes());
  for (int i = 0; i < loop_traj.n_nodes(); ++i) loop[i] = loop_traj.Pi[i].head<3>();
  loop.back() = loop.front();
  const double Om = solid_angle(loop);
  out.add("top.geometric_phase_vs_solid_angle",
          std::fabs(std::remainder(loop_dec.theta_geom + Om, 2 * kPi)), 1e-4);
  return out;
}

ValidationSummary acceptance_dipole() {
  ValidationSummary out;
  // gamma = -0.5 together with |L0| = sqrt(3) makes the body-momentum loop a
  // 30-degree cone that closes in exactly one Larmor period; see the project
  // notes on the acceptance parameters.
  const double c = 2.0, gamma = -0.5;
  const Eigen::Vector3d B(0, 0, 1);
  Vec L0(3);
  L0 << std::sqrt(3.0) / 2.0, 0.0, 1.5;
  const auto dip = make_magnetic_dipole(Eigen::Vector3d(c, c, c), gamma,
                                        [B](double) { return B; }, MomentumCovector(L0));
  const double T = 4 * kPi;  // one Larmor period
  const int n = static_cast<int>(std::lround(T / 1e-3));
  const auto res = dipole_phase_pipeline(dip.sys, no_base(), [B](double) { return B; }, gamma,
                                         MomentumCovector(L0), {Vec(), identity(dip.sys.group)},
                                         {0.0, T, T / n});
  out.add("dipole.coAd_RM_Pi_drift", res.conservation_drift, 1e-6);
  out.add("dipole.Pi_loop_gap", res.loop_gap, 1e-6);
  out.add("dipole.theta_geom_vs_cone_angle",
          std::fabs(std::remainder(res.decomposition.theta_geom - 2 * kPi * (1 - std::sqrt(3.0) / 2),
                                   2 * kPi)),
          1e-4);
  out.add("dipole.theta_geom_plus_solid_angle",
          std::fabs(std::remainder(res.decomposition.theta_geom + res.solid_angle_value, 2 * kPi)),
          1e-4);
  out.add("dipole.phase_formula_vs_direct", res.phase_formula_residual, 1e-5);
  return out;
}

ValidationSummary acceptance_two_ball(unsigned seed) {
  ValidationSummary out;
  std::mt19937 rng(seed ^ 0x7477626cu);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = 0.15 + 0.15 * u(rng);
  const double cx = 0.3 * (u(rng) - 0.5), cy = 0.3 * (u(rng) - 0.5);
  const double phase = 2 * kPi * u(rng);

  const auto tb = make_two_ball(10, 1, 1, 0.2);
  const auto& G = tb.sys.group;
  const BaseCurve base = circle2d(rho, cx, cy, phase);
  const Grid grid{0.0, 1.0, 1e-3};
  const auto nh = lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, grid);
  Vec xi1;
  {
    const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
    xi1 = 0.3 * frame[0].coords - 0.2 * frame[1].coords + 0.15 * frame[3].coords;
  }
  const auto traj = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));

  const Vec muh = traj.J_spatial[0].head<3>();
  double drift = 0;
  for (int i = 0; i < traj.n_nodes(); ++i)
    drift = std::max(drift, (traj.J_spatial[i].head<3>() - muh).norm());
  out.add("two_ball.total_angular_momentum_drift", drift, 1e-6);

  // third vertical equation residual
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
  double third = 0;
  for (int i = 0; i < traj.n_nodes(); ++i)
    third = std::max(third, std::fabs(stencil_derivative(body3, i, traj.h).dot(axis[i])));
  out.add("two_ball.third_vertical_equation_residual", third, 1e-6);

  out.add("two_ball.constraint_residual", traj.max_res_constraint(), 1e-8);

  const auto hs = horizontal_symmetry_phases(tb.sys, tb.cons, nh, traj, tb.horizontal_symmetry);
  out.add("two_ball.phase_relation_residual", hs.phase_relation_residual, 1e-5);
  return out;
}

ValidationSummary acceptance_gauge_covariance(unsigned seed) {
  ValidationSummary out;
  std::mt19937 rng(seed ^ 0x636f7661u);

  // disk
  {
    const auto disk = make_vertical_disk(1, 1, 1, 1);
    const auto& G = disk.sys.group;
    const BaseCurve base = BaseCurve::analytic(
        [](double t) { return Vec(Vec::Constant(1, t)); },
        [](double) { return Vec(Vec::Constant(1, 1.0)); });
    Vec b0(1);
    b0 << 0.0;
    const Grid grid{0.0, 1.5, 1e-3};
    const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, grid);
    Vec xi1(3);
    xi1 << 0.5, 0.0, 0.5;
    const auto traj = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));

    const Vec X = random_vec(rng, 3);
    auto gcg = [&](double t) {
      const double p = 0.3 * std::sin(2 * t) + 0.1 * t;
      const double pdot = 0.6 * std::cos(2 * t) + 0.1;
      return std::make_pair(exp(G, AlgebraVector((p * X).eval())), Vec((pdot * X).eval()));
    };
    const auto custom = gauge_transform(nh, gcg);
    const Vec xi1_t = xi1 - gcg(0.0).second;
    const auto traj2 =
        simulate(disk.sys, disk.cons, custom, inverse(G, gcg(0.0).first), AlgebraVector(xi1_t));
    const GroupElement c1 = mul(G, traj.g.back(), nh.g0.back());
    const GroupElement c2 = mul(G, traj2.g.back(), custom.g0.back());
    out.add("covariance.disk_end_state", group_distance(G, c1, c2), 1e-6);
  }

  // two-ball
  {
    const auto tb = make_two_ball(10, 1, 1, 0.2);
    const auto& G = tb.sys.group;
    const BaseCurve base = circle2d(0.25, 0.05, -0.05, 0.3);
    const Grid grid{0.0, 1.0, 1e-3};
    const auto nh =
        lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, grid);
    Vec xi1;
    {
      const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
      xi1 = 0.3 * frame[0].coords + 0.1 * frame[3].coords;
    }
    const auto traj = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));

    const Vec X = random_vec(rng, 6, 0.4);
    auto gcg = [&](double t) {
      const double p = std::sin(kPi * t);
      const double pdot = kPi * std::cos(kPi * t);
      // body velocity of exp(p X) is dexp-corrected; use exp(pX) with
      // zeta = p' dexpinv... for a single generator the body velocity is p' X.
      return std::make_pair(exp(G, AlgebraVector((p * X).eval())), Vec((pdot * X).eval()));
    };
    const auto custom = gauge_transform(nh, gcg);
    // same physical initial data: g-tilde = g gcg^{-1}, xi-tilde = Ad_gcg(xi - zeta)
    const auto [gc0, zeta0] = gcg(0.0);
    const Vec xi1_t = Ad_matrix(G, gc0) * (xi1 - zeta0);
    const auto traj2 =
        simulate(tb.sys, tb.cons, custom, inverse(G, gc0), AlgebraVector(xi1_t));
    const GroupElement c1 = mul(G, traj.g.back(), nh.g0.back());
    const GroupElement c2 = mul(G, traj2.g.back(), custom.g0.back());
    out.add("covariance.two_ball_end_state", group_distance(G, c1, c2), 1e-6);
  }
  return out;
}

ValidationSummary acceptance_purely_kinematical(unsigned seed) {
  ValidationSummary out;
  std::mt19937 rng(seed ^ 0x706b7379u);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // One-dimensional abelian fiber over a 2-d base with a curvature-carrying
  // connection row: xdot = -v udot.
  ConfigurationSystem sys;
  sys.base_dim = 2;
  sys.group = LieGroupDescriptor::abelian(1, 0);
  sys.name = "pk_demo";
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
    r.A << b(1), 0.0;
    r.W = Mat::Identity(1, 1);
    return r;
  };

  const double rho = 0.4 + 0.3 * u(rng);
  const BaseCurve base = circle2d(rho, 0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5), 2 * kPi * u(rng));
  const Grid grid{0.0, 1.0, 1e-3};
  const auto& G = sys.group;

  {
    const auto rep = check_principal_case(sys, cons, base.position(0.3));
    out.add("pk.principal_case", rep.holds ? 0.0 : 1.0, 0.5);
    const auto basis = vertical_subalgebra(sys, cons, {base.position(0.3), identity(G)});
    out.add("pk.empty_vertical_subalgebra", static_cast<double>(basis.size()), 0.5);
  }

  const auto nh = lift_nonholonomic(sys, cons, base, {base.position(0.0), identity(G)}, grid);
  const auto traj = simulate(sys, cons, nh, identity(G), AlgebraVector::zero(G));
  double lift_gap = 0;
  for (int i = 0; i < traj.n_nodes(); ++i)
    lift_gap = std::max(lift_gap, group_distance(G, traj.g[i], identity(G)));
  out.add("pk.solution_equals_horizontal_lift", lift_gap, 1e-8);
  out.add("pk.constraint_residual", traj.max_res_constraint(), 1e-8);

  // closed-loop phase: holonomy = -closed-loop integral of v du (area form)
  const GroupElement g_G = mul(G, nh.g0.back(), inverse(G, nh.g0.front()));
  double area = 0;
  {
    const int n = 200000;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) * h;
      area -= base.position(t)(1) * base.velocity(t)(0) * h;
    }
  }
  out.add("pk.holonomy_vs_area_oracle", std::fabs(g_G.coords(0) - area), 1e-6);

  const GroupElement c_end = mul(G, traj.g.back(), nh.g0.back());
  const GroupElement rhs = mul(G, g_G, mul(G, traj.g.front(), nh.g0.front()));
  out.add("pk.closed_loop_phase_relation", group_distance(G, c_end, rhs), 1e-8);
  return out;
}

ValidationSummary acceptance_structural(unsigned seed) {
  ValidationSummary out;
  std::mt19937 rng(seed ^ 0x73747275u);

  // Equivariance of J and I on 100 random samples.
  {
    const auto tb = make_two_ball(10, 1, 1, 0.2);
    const auto& G = tb.sys.group;
    double worstJ = 0, worstI = 0;
    for (int s = 0; s < 100; ++s) {
      BundleState st{random_vec(rng, 2, 0.4), exp(G, AlgebraVector(random_vec(rng, 6)))};
      const Vec bd = random_vec(rng, 2);
      const AlgebraVector et(random_vec(rng, 6));
      const auto g = exp(G, AlgebraVector(random_vec(rng, 6)));
      const Vec lhs = momentum(tb.sys, {st.b, mul(G, g, st.g)}, bd, et).coords;
      const Vec rhs = coAd(G, g, momentum(tb.sys, st, bd, et)).coords;
      worstJ = std::max(worstJ, (lhs - rhs).norm() / (1.0 + rhs.norm()));
      const Mat lhsI = locked_inertia(tb.sys, {st.b, mul(G, g, st.g)});
      const Mat Adg_inv = Ad_matrix(G, inverse(G, g));
      const Mat rhsI = Adg_inv.transpose() * locked_inertia(tb.sys, st) * Adg_inv;
      worstI = std::max(worstI, (lhsI - rhsI).cwiseAbs().maxCoeff() / (1.0 + rhsI.norm()));
    }
    out.add("structural.J_equivariance", worstJ, 1e-10);
    out.add("structural.I_equivariance", worstI, 1e-10);
  }

  // Jacobi identity on random triples.
  {
    double worst = 0;
    for (const auto& G :
         {LieGroupDescriptor::so3(),
          LieGroupDescriptor::product({LieGroupDescriptor::so3(), LieGroupDescriptor::so3()}),
          LieGroupDescriptor::product({LieGroupDescriptor::so3(), LieGroupDescriptor::abelian(2, 1)})}) {
      for (int s = 0; s < 50; ++s) {
        const AlgebraVector x(random_vec(rng, G.dim)), y(random_vec(rng, G.dim)),
            z(random_vec(rng, G.dim));
        const Vec jac = bracket(G, x, bracket(G, y, z)).coords +
                        bracket(G, y, bracket(G, z, x)).coords +
                        bracket(G, z, bracket(G, x, y)).coords;
        worst = std::max(worst, jac.norm());
      }
    }
    out.add("structural.jacobi_identity", worst, 1e-12);
  }

  // exp/log round trips.
  {
    double worst = 0;
    const auto G = LieGroupDescriptor::product(
        {LieGroupDescriptor::so3(), LieGroupDescriptor::abelian(2, 1)});
    for (int s = 0; s < 100; ++s) {
      Vec w = random_vec(rng, G.dim);
      if (w.head<3>().norm() > 3.1) w.head<3>() *= 3.1 / w.head<3>().norm();
      const auto g = exp(G, AlgebraVector(w));
      worst = std::max(worst, group_distance(G, g, exp(G, log(G, g))));
      const auto p = mul(G, g, exp(G, AlgebraVector((-w).eval())));
      worst = std::max(worst, group_distance(G, p, identity(G)));
    }
    out.add("structural.exp_log_round_trip", worst, 1e-12);
  }

  // Compatibility Ad_h P = P Ad_h of the default projector.
  {
    double worst = 0;
    for (const auto& G :
         {LieGroupDescriptor::so3(),
          LieGroupDescriptor::product({LieGroupDescriptor::so3(), LieGroupDescriptor::so3()})}) {
      for (int s = 0; s < 10; ++s) {
        const MomentumCovector mu(random_vec(rng, G.dim));
        const auto P = isotropy_projector(G, mu, Mat::Identity(G.dim, G.dim), false,
                                          rng());
        for (int r = 0; r < 10; ++r) {
          Vec z = Vec::Zero(G.dim);
          for (int j = 0; j < P.basis.cols(); ++j)
            z += std::normal_distribution<double>()(rng)*P.basis.col(j);
          const Mat Adh = Ad_matrix(G, exp(G, AlgebraVector(z)));
          worst = std::max(worst, (Adh * P.P - P.P * Adh).cwiseAbs().maxCoeff());
        }
      }
    }
    out.add("structural.projector_compatibility", worst, 1e-10);
  }

  // Kinetic-energy decomposition identity for random gauge/group splits.
  {
    const auto tb = make_two_ball(10, 1, 1, 0.2);
    const auto& G = tb.sys.group;
    double worst = 0;
    for (int s = 0; s < 100; ++s) {
      BundleState d0{random_vec(rng, 2, 0.4), exp(G, AlgebraVector(random_vec(rng, 6)))};
      const Vec bdot = random_vec(rng, 2);
      const AlgebraVector eta0(random_vec(rng, 6)), xi(random_vec(rng, 6));
      const KineticSplit ks = kinetic_energy_gauge_split(tb.sys, d0, bdot, eta0, xi);
      const Vec eta_total = eta0.coords + Ad_matrix(G, inverse(G, d0.g)) * xi.coords;
      const double direct = kinetic_energy(tb.sys, d0, bdot, AlgebraVector(eta_total)).total;
      worst = std::max(worst, std::fabs(ks.total - direct) / (1.0 + std::fabs(direct)));
    }
    out.add("structural.kinetic_energy_identity", worst, 1e-10);
  }

  // Energy-variable dual computation on a driven run.
  {
    const auto tb = make_two_ball(10, 1, 1, 0.2);
    const auto& G = tb.sys.group;
    const BaseCurve base = fourier2d({0.2, 0.05, 0.1, 0.1}, {0.15, -0.1, 0.05, -0.05});
    const auto nh = lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)},
                                      {0.0, 1.0, 1e-3});
    Vec xi1;
    {
      const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
      xi1 = 0.25 * frame[0].coords + 0.1 * frame[2].coords;
    }
    const auto traj = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));
    const auto track = energy_track(tb.sys, traj, nh);
    out.add("structural.energy_dual_computation", track.max_difference, 1e-8);
  }

  // Order-4 step-halving convergence on all built-in systems.
  auto order_check = [&](auto&& endpoint) {
    const Vec g1 = endpoint(2e-2), g2 = endpoint(1e-2), g3 = endpoint(5e-3);
    return std::fabs(std::log2((g1 - g2).norm() / ((g2 - g3).norm())) - 4.0);
  };
  {
    const auto disk = make_vertical_disk(1, 1, 1, 1);
    const auto& G = disk.sys.group;
    const BaseCurve base = BaseCurve::analytic(
        [](double t) { return Vec(Vec::Constant(1, std::sin(t) + 0.6 * t)); },
        [](double t) { return Vec(Vec::Constant(1, std::cos(t) + 0.6)); });
    Vec b0 = base.position(0.0);
    auto ep = [&](double h) {
      const auto nh = lift_nonholonomic(disk.sys, disk.cons, base, {b0, identity(G)}, {0, 1, h});
      Vec xi1(3);
      const double c0 = std::cos(b0(0)), s0 = std::sin(b0(0));
      xi1 << c0 * 0.5, s0 * 0.5, 0.5;
      const auto tr = simulate(disk.sys, disk.cons, nh, identity(G), AlgebraVector(xi1));
      return serialize(G, mul(G, tr.g.back(), nh.g0.back()));
    };
    out.add("structural.order4_vertical_disk", order_check(ep), 0.8);
  }
  {
    const auto tb = make_turntable_ball(1, 1, 1, 0.7);
    const auto& G = tb.sys.group;
    const BaseCurve base = fourier2d({0.3, 0.1, 0.05, 0.2}, {0.2, -0.15, 0.1, -0.1});
    AffineSelector sel;
    sel.kind = AffineSelector::PinComponents;
    sel.pins = {{2, 0.0}};
    auto ep = [&](double h) {
      const auto aff = lift_affine(tb.sys, tb.cons, base, {base.position(0.0), identity(G)},
                                   {0, 1, h}, sel);
      Vec xi1 = Vec::Zero(3);
      xi1(2) = -0.5;
      const auto tr = simulate(tb.sys, tb.cons, aff, identity(G), AlgebraVector(xi1));
      return serialize(G, mul(G, tr.g.back(), aff.g0.back()));
    };
    out.add("structural.order4_turntable", order_check(ep), 0.8);
  }
  {
    const auto tb = make_two_ball(10, 1, 1, 0.2);
    const auto& G = tb.sys.group;
    const BaseCurve base = fourier2d({0.2, 0.05, 0.0, 0.1}, {0.15, -0.1, 0.0, -0.05});
    auto ep = [&](double h) {
      const auto nh =
          lift_nonholonomic(tb.sys, tb.cons, base, {base.position(0.0), identity(G)}, {0, 1, h});
      Vec xi1;
      const auto frame = vertical_subalgebra(tb.sys, tb.cons, nh.state(0));
      xi1 = 0.2 * frame[0].coords + 0.2 * frame[1].coords;
      const auto tr = simulate(tb.sys, tb.cons, nh, identity(G), AlgebraVector(xi1));
      return serialize(G, tr.g.back());
    };
    out.add("structural.order4_two_ball", order_check(ep), 0.8);
  }
  {
    const auto body = make_free_body(Eigen::Vector3d(1, 2, 3));
    const auto& G = body.sys.group;
    Vec mu(3);
    mu << 0.3, 0.4, 1.2;
    auto ep = [&](double h) {
      const auto gauge = lift_trivial(body.sys, no_base(), {Vec(), identity(G)}, {0, 2, h});
      const auto tr = solve_conserved_momentum(body.sys, gauge, MomentumCovector(mu), identity(G),
                                               SimOptions{1e-2, 1e-8, 0.5, false});
      return serialize(G, tr.g.back());
    };
    out.add("structural.order4_free_body", order_check(ep), 0.8);
  }
  {
    const double c = 2.0, gamma = 0.5;
    const Eigen::Vector3d B(0.1, -0.2, 1.0);
    Vec L0(3);
    L0 << 0.3, 0.4, 1.2;
    const auto dip = make_magnetic_dipole(Eigen::Vector3d(c, c, c), gamma,
                                          [B](double) { return B; }, MomentumCovector(L0));
    auto ep = [&](double h) {
      const auto res = dipole_phase_pipeline(dip.sys, no_base(), [B](double) { return B; }, gamma,
                                             MomentumCovector(L0),
                                             {Vec(), identity(dip.sys.group)}, {0, 2, h});
      return serialize(dip.sys.group, res.traj.g.back());
    };
    out.add("structural.order4_magnetic_dipole", order_check(ep), 0.8);
  }
  return out;
}

ValidationSummary run_all_acceptance(unsigned seed, double threshold_override) {
  ValidationSummary all;
  for (const auto& s :
       {acceptance_vertical_disk(), acceptance_turntable(seed), acceptance_conserved_momentum(),
        acceptance_dipole(), acceptance_two_ball(seed), acceptance_gauge_covariance(seed),
        acceptance_purely_kinematical(seed), acceptance_structural(seed)}) {
    for (auto c : s.checks) {
      if (threshold_override > 0) c.threshold = threshold_override;
      all.checks.push_back(std::move(c));
    }
  }
  return all;
}

}  // namespace geophase
