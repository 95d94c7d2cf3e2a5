#include "geophase/systems.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

namespace geophase {

namespace {

Mat zero_mat(int r, int c) { return Mat::Zero(r, c); }

Eigen::Matrix3d gram_schmidt(const Eigen::Matrix3d& M) {
  Eigen::Matrix3d R = M;
  R.col(0).normalize();
  R.col(1) -= R.col(0).dot(R.col(1)) * R.col(0);
  R.col(1).normalize();
  R.col(2) = R.col(0).cross(R.col(1));
  return R;
}

}  // namespace

ExampleSystem make_vertical_disk(double m, double I, double J_roll, double R) {
  if (m <= 0 || I <= 0 || J_roll <= 0 || R <= 0)
    throw std::invalid_argument("vertical_disk: parameters must be positive");
  ExampleSystem ex;
  ex.params = {{"m", m}, {"I", I}, {"J_roll", J_roll}, {"R", R}};
  ex.sys.name = "vertical_disk";
  ex.sys.base_dim = 1;
  ex.sys.group = LieGroupDescriptor::abelian(2, 1);
  ex.sys.group.basis_labels = {"x", "y", "theta"};
  // the base coordinate is the angle phi
  ex.sys.base_distance = [](const Vec& a, const Vec& b) {
    return std::fabs(std::remainder(a(0) - b(0), 2 * std::numbers::pi));
  };
  ex.sys.metric = [m, I, J_roll](const Vec&) {
    MetricBlocks k;
    k.k_BB = Mat::Constant(1, 1, J_roll);
    k.k_Bg = zero_mat(1, 3);
    k.k_gg = Eigen::Vector3d(m, m, I).asDiagonal();
    return k;
  };
  ex.cons.m = 2;
  ex.cons.rows = [R](const Vec& b) {
    const double phi = b(0);
    ConstraintRows rows;
    rows.A = zero_mat(2, 1);
    rows.W = Mat(2, 3);
    rows.W << 1, 0, -R * std::cos(phi), 0, 1, -R * std::sin(phi);
    return rows;
  };
  return ex;
}

ExampleSystem make_turntable_ball(double m, double k_gyr, double a, double Omega) {
  if (m <= 0 || k_gyr <= 0 || a <= 0)
    throw std::invalid_argument("turntable_ball: parameters must be positive");
  ExampleSystem ex;
  ex.params = {{"m", m}, {"k_gyr", k_gyr}, {"a", a}, {"Omega", Omega}};
  ex.sys.name = "turntable_ball";
  ex.sys.base_dim = 2;
  ex.sys.group = LieGroupDescriptor::so3();
  ex.sys.metric = [m, k_gyr](const Vec&) {
    MetricBlocks k;
    k.k_BB = m * Mat::Identity(2, 2);
    k.k_Bg = zero_mat(2, 3);
    k.k_gg = m * k_gyr * k_gyr * Mat::Identity(3, 3);
    return k;
  };
  // The chart stores the inverse ball rotation, so the body velocity eta of
  // the chart coordinate equals minus the ball's spatial angular velocity.
  ex.cons.m = 2;
  ex.cons.rows = [a](const Vec&) {
    ConstraintRows rows;
    rows.A = Mat(2, 2);
    rows.A << -1, 0, 0, 1;
    rows.W = Mat(2, 3);
    rows.W << 0, -a, 0, -a, 0, 0;
    return rows;
  };
  ex.cons.affine = [Omega](const Vec& b, double) {
    Vec g(2);
    g << Omega * b(1), Omega * b(0);
    return g;
  };
  return ex;
}

Eigen::Vector3d two_ball_chart_point(const Vec& w) {
  const double u = w(0), v = w(1), D = 1.0 + u * u + v * v;
  return Eigen::Vector3d(2 * u / D, 2 * v / D, (2.0 - D) / D);
}

Eigen::Matrix<double, 3, 2> two_ball_chart_jacobian(const Vec& w) {
  const double u = w(0), v = w(1), D = 1.0 + u * u + v * v;
  Eigen::Matrix<double, 3, 2> E;
  E << (2 + 2 * v * v - 2 * u * u) / (D * D), -4 * u * v / (D * D),
      -4 * u * v / (D * D), (2 + 2 * u * u - 2 * v * v) / (D * D),
      -4 * u / (D * D), -4 * v / (D * D);
  return E;
}

Eigen::Matrix3d two_ball_section(const Vec& w) {
  // Rotation taking z-hat to b with axis orthogonal to z-hat.
  const Eigen::Vector3d b = two_ball_chart_point(w);
  const Eigen::Vector3d vv(-b.y(), b.x(), 0.0);
  return Eigen::Matrix3d::Identity() + hat(vv) + hat(vv) * hat(vv) / (1.0 + b.z());
}

Eigen::Matrix<double, 3, 2> two_ball_section_velocity_map(const Vec& w) {
  const Eigen::Vector3d b = two_ball_chart_point(w);
  const Eigen::Matrix<double, 3, 2> E = two_ball_chart_jacobian(w);
  const Eigen::Vector3d vv(-b.y(), b.x(), 0.0);
  const Eigen::Matrix3d Rb = two_ball_section(w);
  Eigen::Matrix<double, 3, 2> Wb;
  for (int j = 0; j < 2; ++j) {
    const Eigen::Vector3d db = E.col(j);
    const Eigen::Vector3d dv(-db.y(), db.x(), 0.0);
    const Eigen::Matrix3d dR = hat(dv) +
                               (hat(dv) * hat(vv) + hat(vv) * hat(dv)) / (1.0 + b.z()) -
                               hat(vv) * hat(vv) * (db.z() / ((1.0 + b.z()) * (1.0 + b.z())));
    Wb.col(j) = vee(dR * Rb.transpose());
  }
  return Wb;
}

ExampleSystem make_two_ball(double m1, double m2, double r, double a) {
  if (!(r > a && a > 0 && m1 > 0 && m2 > 0))
    throw std::invalid_argument("two_ball: need r > a > 0 and positive masses");
  ExampleSystem ex;
  ex.params = {{"m1", m1}, {"m2", m2}, {"r", r}, {"a", a}};
  const double i1 = 0.4 * m1 * (r + a) * (r + a);
  const double i3 = 0.4 * m2 * a * a;
  const double c2 = (m1 * m2 / (m1 + m2)) * r * r;
  ex.sys.name = "two_ball";
  ex.sys.base_dim = 2;
  ex.sys.group =
      LieGroupDescriptor::product({LieGroupDescriptor::so3(), LieGroupDescriptor::so3()});
  ex.sys.in_chart = [](const Vec& w) { return w.squaredNorm() < 9.0; };
  ex.sys.metric = [i1, i3, c2](const Vec& w) {
    const Eigen::Vector3d b = two_ball_chart_point(w);
    const Eigen::Matrix<double, 3, 2> E = two_ball_chart_jacobian(w);
    MetricBlocks k;
    k.k_BB = c2 * E.transpose() * E;
    k.k_Bg = zero_mat(2, 6);
    k.k_Bg.leftCols(3) = -c2 * E.transpose() * hat(b);
    k.k_gg = zero_mat(6, 6);
    k.k_gg.topLeftCorner(3, 3) =
        (i1 + i3) * Mat::Identity(3, 3) +
        c2 * (Mat::Identity(3, 3) - b * b.transpose());
    k.k_gg.topRightCorner(3, 3) = -i3 * Mat::Identity(3, 3);
    k.k_gg.bottomLeftCorner(3, 3) = -i3 * Mat::Identity(3, 3);
    k.k_gg.bottomRightCorner(3, 3) = i3 * Mat::Identity(3, 3);
    return k;
  };
  ex.cons.m = 2;
  const double ratio = a / r;
  ex.cons.rows = [ratio](const Vec& w) {
    const Eigen::Matrix3d Rb = two_ball_section(w);
    const Eigen::Matrix<double, 3, 2> Wb = two_ball_section_velocity_map(w);
    ConstraintRows rows;
    rows.A = Mat(2, 2);
    rows.W = zero_mat(2, 6);
    for (int i = 0; i < 2; ++i) {
      const Eigen::Vector3d dir = Rb.col(i);  // R_b e_i
      rows.A.row(i) = -(dir.transpose() * Wb);
      rows.W.block<1, 3>(i, 3) = ratio * dir.transpose();
    }
    return rows;
  };
  for (int i = 0; i < 3; ++i) {
    Vec h = Vec::Zero(6);
    h(i) = 1.0;
    ex.horizontal_symmetry.emplace_back(h);
  }
  return ex;
}

ExampleSystem make_magnetic_dipole(const Eigen::Vector3d& inertia_diag, double gamma_gyro,
                                   std::function<Eigen::Vector3d(double)> B_field,
                                   const MomentumCovector& L0) {
  if (L0.coords.norm() == 0) throw std::invalid_argument("magnetic_dipole: L0 must be nonzero");
  ExampleSystem ex;
  ex.sys.name = "magnetic_dipole";
  ex.sys.base_dim = 0;
  ex.sys.group = LieGroupDescriptor::so3();
  ex.sys.metric = [inertia_diag](const Vec&) {
    MetricBlocks k;
    k.k_BB = zero_mat(0, 0);
    k.k_Bg = zero_mat(0, 3);
    k.k_gg = inertia_diag.asDiagonal();
    return k;
  };
  // Homogeneous part of the mechanical-connection constraint; the dipolar
  // affine field depends on the group point and lives in DipolarSpec.
  ex.cons.m = 3;
  ex.cons.rows = [](const Vec&) {
    ConstraintRows rows;
    rows.A = zero_mat(3, 0);
    rows.W = Mat::Identity(3, 3);
    return rows;
  };
  ex.dipolar = DipolarSpec{gamma_gyro, std::move(B_field), L0};
  return ex;
}

ExampleSystem make_free_body(const Eigen::Vector3d& inertia_diag) {
  ExampleSystem ex;
  ex.sys.name = "free_body";
  ex.sys.base_dim = 0;
  ex.sys.group = LieGroupDescriptor::so3();
  ex.sys.metric = [inertia_diag](const Vec&) {
    MetricBlocks k;
    k.k_BB = zero_mat(0, 0);
    k.k_Bg = zero_mat(0, 3);
    k.k_gg = inertia_diag.asDiagonal();
    return k;
  };
  ex.cons.m = 0;
  ex.cons.rows = [](const Vec&) {
    ConstraintRows rows;
    rows.A = zero_mat(0, 0);
    rows.W = zero_mat(0, 3);
    return rows;
  };
  return ex;
}

ExampleSystem make_system_by_name(const std::string& name,
                                  const std::map<std::string, double>& p) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
  };
  if (name == "vertical_disk")
    return make_vertical_disk(get("m", 1), get("I", 1), get("J_roll", 1), get("R", 1));
  if (name == "turntable_ball")
    return make_turntable_ball(get("m", 1), get("k_gyr", 1), get("a", 1), get("Omega", 0.5));
  if (name == "two_ball") return make_two_ball(get("m1", 10), get("m2", 1), get("r", 1), get("a", 0.2));
  if (name == "free_body")
    return make_free_body(Eigen::Vector3d(get("I1", 1), get("I2", 2), get("I3", 3)));
  if (name == "magnetic_dipole") {
    const Eigen::Vector3d B(get("Bx", 0), get("By", 0), get("Bz", 1));
    Vec L0(3);
    L0 << get("L0x", 0), get("L0y", 0), get("L0z", 1);
    const double I = get("I", 2);
    return make_magnetic_dipole(Eigen::Vector3d(I, I, I), get("gamma_gyro", 0.5),
                                [B](double) { return B; }, MomentumCovector(L0));
  }
  throw std::invalid_argument("unknown system: " + name);
}

namespace oracle {

Eigen::Vector3d disk_constant_rates(double m, double I, double R, double omega, double phi0,
                                    double thetadot, double x0, double y0, double theta0,
                                    double t) {
  (void)m;
  (void)I;
  const double x = x0 + (R * thetadot / omega) * (std::sin(omega * t + phi0) - std::sin(phi0));
  const double y = y0 - (R * thetadot / omega) * (std::cos(omega * t + phi0) - std::cos(phi0));
  return Eigen::Vector3d(x, y, theta0 + thetadot * t);
}

Eigen::Vector3d disk_quadrature(double R, const std::function<double(double)>& phi,
                                double thetadot, double x0, double y0, double theta0, double t1,
                                double t, double h) {
  const double hf = h / 10.0;
  const int n = std::max(2, static_cast<int>(std::ceil((t - t1) / hf)));
  const double step = (t - t1) / n;
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    const double a = t1 + i * step, bmid = a + step / 2, c = a + step;
    sx += (step / 6.0) * (std::cos(phi(a)) + 4 * std::cos(phi(bmid)) + std::cos(phi(c)));
    sy += (step / 6.0) * (std::sin(phi(a)) + 4 * std::sin(phi(bmid)) + std::sin(phi(c)));
  }
  return Eigen::Vector3d(x0 + R * thetadot * sx, y0 + R * thetadot * sy,
                         theta0 + thetadot * (t - t1));
}

RigidBodyRef euler_top(const Eigen::Vector3d& inertia, const Eigen::Vector3d& Pi0, double t,
                       double h) {
  const int n = std::max(1, static_cast<int>(std::ceil(t / h)));
  const double step = t / n;
  Eigen::Vector3d Pi = Pi0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  auto fP = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector3d(p.cross(Eigen::Vector3d(p.cwiseQuotient(inertia))));
  };
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d k1 = fP(Pi);
    const Eigen::Matrix3d K1 = R * hat(Pi.cwiseQuotient(inertia));
    const Eigen::Vector3d k2 = fP(Pi + 0.5 * step * k1);
    const Eigen::Matrix3d K2 = (R + 0.5 * step * K1) * hat((Pi + 0.5 * step * k1).cwiseQuotient(inertia));
    const Eigen::Vector3d k3 = fP(Pi + 0.5 * step * k2);
    const Eigen::Matrix3d K3 = (R + 0.5 * step * K2) * hat((Pi + 0.5 * step * k2).cwiseQuotient(inertia));
    const Eigen::Vector3d k4 = fP(Pi + step * k3);
    const Eigen::Matrix3d K4 = (R + step * K3) * hat((Pi + step * k3).cwiseQuotient(inertia));
    Pi += (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    R += (step / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4);
    R = gram_schmidt(R);
  }
  return RigidBodyRef{Pi, R};
}

Eigen::Matrix3d turntable_reference(const std::function<Eigen::Vector2d(double)>& xy,
                                    const std::function<Eigen::Vector2d(double)>& xy_dot, double a,
                                    double Omega, double omega_z0, double t1, double t, double h) {
  auto omega = [&](double s) {
    const Eigen::Vector2d p = xy(s), v = xy_dot(s);
    return Eigen::Vector3d((Omega * p.x() - v.y()) / a, (v.x() + Omega * p.y()) / a, omega_z0);
  };
  const int n = std::max(1, static_cast<int>(std::ceil((t - t1) / h)));
  const double step = (t - t1) / n;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  for (int i = 0; i < n; ++i) {
    const double s = t1 + i * step;
    const Eigen::Matrix3d K1 = hat(omega(s)) * R;
    const Eigen::Matrix3d K2 = hat(omega(s + step / 2)) * (R + 0.5 * step * K1);
    const Eigen::Matrix3d K3 = hat(omega(s + step / 2)) * (R + 0.5 * step * K2);
    const Eigen::Matrix3d K4 = hat(omega(s + step)) * (R + step * K3);
    R += (step / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4);
    R = gram_schmidt(R);
  }
  return R;
}

Eigen::Matrix3d larmor_R_M(const Eigen::Vector3d& L0, double inertia, double gamma,
                           const Eigen::Vector3d& B, double t) {
  const Eigen::Vector3d n = L0 / inertia + gamma * B;  // L0/c - omega_l
  const double th = n.norm() * t;
  const Eigen::Vector3d u = n.normalized();
  return Eigen::Matrix3d(Eigen::AngleAxisd(th, u));
}

}  // namespace oracle

}  // namespace geophase
