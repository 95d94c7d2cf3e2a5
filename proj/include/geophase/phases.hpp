#pragma once

#include "geophase/dynamics.hpp"

namespace geophase {

// Linear projector P : g -> g_mu commuting with Ad_h for h in the stabilizer
// G_mu; by default the orthogonal projector of an Ad-invariant inner product.
struct IsotropyProjector {
  MomentumCovector mu;
  Mat inner;   // Ad-invariant product on g
  Mat basis;   // columns: inner-orthonormal basis of g_mu
  Mat P;       // dim x dim
};

IsotropyProjector isotropy_projector(const LieGroupDescriptor& G, const MomentumCovector& mu,
                                     const Mat& inner_product, bool allow_zero_mu = false,
                                     unsigned seed = 12345);

// g(t) = h_D(t) g_G(t): dynamic factor in the stabilizer, geometric factor
// horizontal for the P-connection.
struct PhaseDecomposition {
  std::vector<double> t;
  std::vector<GroupElement> g, h_D, g_G;
  std::vector<double> theta_dyn;        // unwrapped stabilizer angle (1-d G_mu)
  double theta_geom = 0;                // angle of g_G(t2) about the mu axis
  std::vector<double> factor_residual;  // |g - h_D g_G| per sample
  std::vector<double> stabilizer_residual;   // |coAd(h_D, mu) - mu|
  std::vector<double> horizontality_residual;  // |P(g_G' g_G^-1)|
  double max_factor_residual() const;
  double max_stabilizer_residual() const;
  double max_horizontality_residual() const;
};

// Sampled group curve with its body velocity, on a half-step grid (the
// layout produced by Trajectory::g_fine / xi_fine).
struct GroupCurve {
  LieGroupDescriptor group;
  double t1 = 0, h = 0;  // node step
  std::vector<double> t_fine;
  std::vector<GroupElement> g_fine;
  std::vector<Vec> xi_fine;
  int n_nodes() const { return (static_cast<int>(t_fine.size()) + 1) / 2; }
};

GroupCurve group_curve_of(const Trajectory& traj);

// Integrates h_D' h_D^{-1} = P(g' g^{-1}) from the identity; requires the
// spatial momentum coAd(g, Pi) to be constant along the curve (checked when
// node samples of Pi are supplied).
std::vector<GroupElement> dynamic_phase(const GroupCurve& curve, const IsotropyProjector& P,
                                        const std::vector<Vec>* Pi_nodes = nullptr,
                                        double conservation_tol = 1e-6);

PhaseDecomposition reconstruct_phases(const GroupCurve& curve, const IsotropyProjector& P,
                                      const std::vector<Vec>* Pi_nodes = nullptr,
                                      double conservation_tol = 1e-6);

// Energy form of the dynamic phase in the mechanical (or horizontal NH)
// gauge; valid for 1-dimensional stabilizers plus the (u_i, I^{-1} mu)
// correction components.
struct EnergyFormPhase {
  std::vector<double> t;
  std::vector<double> theta_dyn;              // cumulative, unwrapped
  std::vector<Vec> stabilizer_components;     // coefficients on the g_mu basis
};

EnergyFormPhase dynamic_phase_energy_form(const ConfigurationSystem& sys, const Trajectory& traj,
                                          const GaugeCurve& gauge, const IsotropyProjector& P);

// Signed solid angle enclosed by a closed, non-self-intersecting loop on a
// sphere about the origin of g* ~ R^3, via the summed spherical excess of
// the triangle fan from the loop centroid direction.  Positive for loops
// running counterclockwise seen from outside the sphere along the centroid
// (+mu-hat) direction; reported in steradians mod 4*pi.
double solid_angle(const std::vector<Eigen::Vector3d>& loop, double closure_tol = 1e-8);

struct HolonomyReport {
  GroupElement g_NH;      // d0^NH(t2) = g_NH . d0^NH(t1)
  GroupElement g_Mech;    // mechanical factor at t2
  GroupElement g_MP;      // g_Mech(t2) . g_NH
};

HolonomyReport nonholonomic_holonomy(const ConfigurationSystem& sys, const ConstraintData& cons,
                                     const BaseCurve& closed_base, const BundleState& q0,
                                     const Grid& grid);

struct HorizontalSymmetryPhases {
  LieGroupDescriptor H;            // subgroup (product of factor blocks)
  std::vector<int> factor_indices; // which product factors span h
  Vec mu_h;                        // conserved i*_h J
  double conservation_drift = 0;   // max |i*_h J(t) - mu_h|
  PhaseDecomposition decomposition;  // of the H-component of g(t)
  GroupElement g_NH_effective;     // holonomy of (e, g_nonH) . d0 (closed base)
  double phase_relation_residual = -1;  // closed-base relation, -1 if base open
};

HorizontalSymmetryPhases horizontal_symmetry_phases(const ConfigurationSystem& sys,
                                                    const ConstraintData& cons,
                                                    const GaugeCurve& gauge, const Trajectory& traj,
                                                    const std::vector<AlgebraVector>& H_basis);

struct DipolePhases {
  Trajectory traj;                      // direct simulation, gauge-relative
  GaugeCurve gauge;                     // mechanical gauge used
  std::vector<GroupElement> h_M;       // Larmor frame at nodes
  std::vector<Vec> Pi;                  // body momentum at nodes
  double conservation_drift = 0;        // max |coAd(R_M, Pi) - L0|
  PhaseDecomposition decomposition;     // of R_M = h_M^{-1} g
  double theta_dyn_integral = 0;        // energy/magnetic form at t2
  double solid_angle_value = 0;         // of the Pi loop (if closed)
  double loop_gap = 0;                  // |Pi(t2) - Pi(t1)|
  double phase_formula_residual = 0;    // endpoint formula vs direct simulation
};

DipolePhases dipole_phase_pipeline(const ConfigurationSystem& sys, const BaseCurve& base,
                                   const std::function<Eigen::Vector3d(double)>& B_field,
                                   double gamma_gyro, const MomentumCovector& L0,
                                   const BundleState& q0, const Grid& grid);

// Phase report payload for the CLI.
struct PhaseReport {
  Vec mu;
  double theta_dyn = 0, theta_geom = 0, solid_angle = 0;
  Vec g_NH, g_MP;  // serialized
  double factor_residual_max = 0;
  std::vector<std::pair<std::string, double>> extras;
};

void write_phase_report_json(const PhaseReport& rep, const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& header = {});

}  // namespace geophase
