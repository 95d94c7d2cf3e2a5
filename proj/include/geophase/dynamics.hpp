#pragma once

#include "geophase/gauge.hpp"

namespace geophase {

struct SimOptions {
  double momentum_residual_tol = 1e-6;
  double constraint_tol = 1e-8;
  double frame_continuity_threshold = 0.5;
  bool abort_on_residual_breach = false;
};

// Time-sampled solution of the gauge-covariant equations of motion.  Node
// columns are the public record; the fine arrays (half-step samples of g and
// xi) feed the phase pipelines, which need stage-accurate data.
struct Trajectory {
  LieGroupDescriptor group;
  double t1 = 0, h = 0;
  std::vector<double> t;            // nodes
  std::vector<GroupElement> g;      // group factor, c(t) = g(t) . d0(t)
  std::vector<Vec> xi;              // body velocity of g
  std::vector<Vec> Pi;              // I0 xi + J0
  std::vector<Vec> J_spatial;       // coAd(g, Pi)
  std::vector<Vec> lambda;          // frame coordinates of xi
  std::vector<Mat> frame;           // basis of g^{d0(t)} at nodes
  std::vector<double> E, K;
  std::vector<double> res_constraint, res_momentum;

  std::vector<double> t_fine;
  std::vector<GroupElement> g_fine;
  std::vector<Vec> xi_fine;

  int n_nodes() const { return static_cast<int>(t.size()); }
  double max_res_constraint() const;
  double max_res_momentum() const;
};

// Integrates the momentum equation paired against the moving frame of
// g^{d0(t)}: xi = xi_p + sum_i lambda_i v_i(t) with A(t) lambda' = rhs.
// The particular term xi_p vanishes for gauges satisfying their defining
// relation (NonHolonomic / Affine); for Custom or Mechanical gauges it is the
// minimal-norm solution of the gauge-induced affine constraint, which is the
// infinitesimal form of transforming back to a nonholonomic gauge.
Trajectory simulate(const ConfigurationSystem& sys, const ConstraintData& cons,
                    const GaugeCurve& gauge, const GroupElement& g1, const AlgebraVector& xi1,
                    const SimOptions& opts = {});

// Conserved-momentum case (no D-constraints): integrates
//   dPi/dt = -coad(I0^{-1}(Pi - J0), Pi)
// on the coadjoint orbit and reconstructs g via xi = I0^{-1}(Pi - J0).
Trajectory solve_conserved_momentum(const ConfigurationSystem& sys, const GaugeCurve& gauge,
                                    const MomentumCovector& mu, const GroupElement& g1,
                                    const SimOptions& opts = {});

struct AbelianSolution {
  std::vector<double> t;  // nodes
  std::vector<GroupElement> g;
  double max_parallel_transport_residual = 0;
};

// Abelian reconstruction g(t) = exp( int (i* I0 i)^{-1} i* J(cdot) ds ) by
// composite Simpson quadrature on the gauge grid; also evaluates the
// parallel-transport residual of the momentum coordinates in a frame whose
// complement is I0-orthogonal.
AbelianSolution abelian_solution(const ConfigurationSystem& sys, const ConstraintData& cons,
                                 const GaugeCurve& gauge,
                                 const std::function<Vec(double)>& J_c);

struct EnergyTrack {
  std::vector<double> t;
  std::vector<double> E_identity;  // -K + <Pi, I0^{-1} J0>
  std::vector<double> E_ode;       // quadrature of the energy-variable equation
  double max_difference = 0;
};

EnergyTrack energy_track(const ConfigurationSystem& sys, const Trajectory& traj,
                         const GaugeCurve& gauge);

struct TorqueDiagnostic {
  std::vector<double> t;
  std::vector<Vec> torque;          // d/dt J(cdot)
  std::vector<double> i_star_norm;  // pairing with the frame at c(t)
};

TorqueDiagnostic constraint_torque(const Trajectory& traj);

// CSV / JSON trajectory export with the column schema
// t, g, xi, Pi, J_spatial, lambda, E, K, res_constraint, res_momentum.
void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const std::vector<std::string>& header_lines = {});
void write_trajectory_json(const Trajectory& traj, const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& header = {});

}  // namespace geophase
