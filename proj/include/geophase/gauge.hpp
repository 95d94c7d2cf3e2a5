#pragma once

#include "geophase/constraints.hpp"

namespace geophase {

enum class GaugeTag { NonHolonomic, Mechanical, Affine, Trivial, Custom };

// Time grid for lifts and simulations.  Gauge curves are sampled on a half
// step grid (nodes plus midpoints) so that 4th-order stages and stencils can
// be evaluated without interpolation.
struct Grid {
  double t1 = 0, t2 = 1, h = 1e-3;
  int n_nodes() const;
  double node_time(int i) const { return t1 + i * h; }
};

struct GaugeCurve {
  LieGroupDescriptor group;
  GaugeTag tag = GaugeTag::Custom;
  double t1 = 0, h = 0;     // node step
  double fine_h = 0;        // h / 2
  std::vector<double> t;    // fine grid, size 2*(n_nodes-1)+1
  std::vector<Vec> b, bdot;
  std::vector<GroupElement> g0;
  std::vector<Vec> eta0;
  std::vector<double> defining_residual;

  int n_fine() const { return static_cast<int>(t.size()); }
  int n_nodes() const { return (n_fine() + 1) / 2; }
  int node_to_fine(int i) const { return 2 * i; }
  BundleState state(int fine_idx) const { return BundleState{b[fine_idx], g0[fine_idx]}; }
  double max_defining_residual() const;
};

// Selector for the affine-gauge non-uniqueness (the constraint rows are
// underdetermined when dim g^q > 0).
struct AffineSelector {
  enum Kind { MinKineticNorm, PinComponents } kind = MinKineticNorm;
  // PinComponents: fix eta0(index) = value for each pin; the remaining
  // components solve the affine rows.
  std::vector<std::pair<int, double>> pins;
};

// Horizontal lift with respect to the nonholonomic connection: at each time
// eta0 solves  { W(b) eta0 = gamma - A(b) bdot ;  <k_gg eta0 + k_Bg^t bdot, u> = 0
// for u in Null(W(b)) }  and g0 advances by 4th-order exponential staging.
GaugeCurve lift_nonholonomic(const ConfigurationSystem& sys, const ConstraintData& cons,
                             const BaseCurve& base, const BundleState& q0, const Grid& grid);

// Mechanical gauge: J(d0dot) = 0, i.e. eta0 = -k_gg^{-1} k_Bg^t bdot.
GaugeCurve lift_mechanical(const ConfigurationSystem& sys, const BaseCurve& base,
                           const BundleState& q0, const Grid& grid);

// Affine gauge: W(b) eta0 = gamma - A(b) bdot, selector resolves the slack.
GaugeCurve lift_affine(const ConfigurationSystem& sys, const ConstraintData& cons,
                       const BaseCurve& base, const BundleState& q0, const Grid& grid,
                       const AffineSelector& selector = {});

// Stationary-group lift d0 = (b(t), q0.g).
GaugeCurve lift_trivial(const ConfigurationSystem& sys, const BaseCurve& base,
                        const BundleState& q0, const Grid& grid);

// d0 -> gcg(t) . d0 with consistently transformed velocities.  gcg returns
// the group element and its body velocity at t.
GaugeCurve gauge_transform(const GaugeCurve& gauge,
                           const std::function<std::pair<GroupElement, Vec>(double)>& gcg);

// CSV export: t, b, serialized g0, eta0, defining residual.
void write_gauge_csv(const GaugeCurve& gauge, const std::string& path,
                     const std::vector<std::string>& header_lines = {});

}  // namespace geophase
