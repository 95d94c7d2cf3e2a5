#pragma once

#include <map>

#include "geophase/phases.hpp"

namespace geophase {

struct DipolarSpec {
  double gamma_gyro = 0;
  std::function<Eigen::Vector3d(double)> B_field;
  MomentumCovector L0;
};

struct ExampleSystem {
  ConfigurationSystem sys;
  ConstraintData cons;
  std::optional<DipolarSpec> dipolar;
  std::vector<AlgebraVector> horizontal_symmetry;  // registered h basis, may be empty
  std::map<std::string, double> params;
};

// Vertical rotating disk: Q = R^2 x S^1 x S^1, G = R^2 x S^1 abelian,
// non-sliding rows xdot = R cos(phi) thetadot, ydot = R sin(phi) thetadot,
// base variable phi.
ExampleSystem make_vertical_disk(double m, double I, double J_roll, double R);

// Ball on a rotating turntable: Q = R^2 x SO(3); the natural right action is
// turned into a left one by storing the inverse rotation as the group
// coordinate, so the chart body velocity is minus the ball's spatial angular
// velocity.  Affine rows -xdot + a*omega_y = Omega*y, ydot + a*omega_x =
// Omega*x; base (x, y).
ExampleSystem make_turntable_ball(double m, double k_gyr, double a, double Omega);

// Two rigid spheres, the small one rolling without sliding inside the big
// one: chart S^2_chart x (SO(3) x SO(3)) with a base-fiber cross block in
// the metric; h = so(3) x {0} registered as horizontal-symmetry subalgebra.
ExampleSystem make_two_ball(double m1, double m2, double r, double a);

// Rigid body with a dipolar magnetic moment: G = SO(3), base_dim = 0; the
// affine constraint J(cdot) = coAd(h_M, L0) is realized through the
// mechanical-connection projector and handled by the dipole phase pipeline.
ExampleSystem make_magnetic_dipole(const Eigen::Vector3d& inertia_diag, double gamma_gyro,
                                   std::function<Eigen::Vector3d(double)> B_field,
                                   const MomentumCovector& L0);

// Free rigid body: G = SO(3), no constraints (D = TQ).
ExampleSystem make_free_body(const Eigen::Vector3d& inertia_diag);

ExampleSystem make_system_by_name(const std::string& name,
                                  const std::map<std::string, double>& params);

// Stereographic-style chart of S^2 (excluding a cap around the south pole)
// used by the two-ball system: b(u,v), its Jacobian, and the section
// R_b taking z-hat to b with the angular velocity map omega_b = Omega_b(w) wdot.
Eigen::Vector3d two_ball_chart_point(const Vec& w);
Eigen::Matrix<double, 3, 2> two_ball_chart_jacobian(const Vec& w);
Eigen::Matrix3d two_ball_section(const Vec& w);
Eigen::Matrix<double, 3, 2> two_ball_section_velocity_map(const Vec& w);

// Independent reference computations for the acceptance suite.  These share
// no code with the dynamics module: rotations are integrated as raw 3x3
// matrices with Gram-Schmidt reprojection and fine RK4 steps.
namespace oracle {

// Disk with phi(t) = omega t + phi0 and constant thetadot: closed form
// (x, y, theta)(t).
Eigen::Vector3d disk_constant_rates(double m, double I, double R, double omega, double phi0,
                                    double thetadot, double x0, double y0, double theta0, double t);

// Quadrature of the disk constraint ODE for arbitrary phi(t) at 10x finer
// step.
Eigen::Vector3d disk_quadrature(double R, const std::function<double(double)>& phi,
                                double thetadot, double x0, double y0, double theta0, double t1,
                                double t, double h);

// Free rigid body: fine-step RK4 for Pi' = Pi x (I^-1 Pi), R' = R hat(I^-1 Pi).
struct RigidBodyRef {
  Eigen::Vector3d Pi;
  Eigen::Matrix3d R;
};
RigidBodyRef euler_top(const Eigen::Vector3d& inertia, const Eigen::Vector3d& Pi0, double t,
                       double h);

// Turntable reference field gdot_tot = omega_ref(t)^ g_tot with
// omega_ref = ((Omega x - ydot)/a, (xdot + Omega y)/a, omega_z0).
Eigen::Matrix3d turntable_reference(const std::function<Eigen::Vector2d(double)>& xy,
                                    const std::function<Eigen::Vector2d(double)>& xy_dot, double a,
                                    double Omega, double omega_z0, double t1, double t, double h);

// Larmor precession of a spherical body in a constant field: closed form for
// R_M(t) = exp(t * hat(L0/c - omega_l)) and its derived quantities.
Eigen::Matrix3d larmor_R_M(const Eigen::Vector3d& L0, double inertia, double gamma,
                           const Eigen::Vector3d& B, double t);

}  // namespace oracle

}  // namespace geophase
