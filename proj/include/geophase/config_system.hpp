#pragma once

#include <functional>
#include <optional>
#include <string>

#include "geophase/lie.hpp"

namespace geophase {

// Trivialized bundle chart Q_loc = B_chart x G with a G-invariant block
// metric.  The blocks are functions of the base point only and act on pairs
// (bdot, eta) with eta = g^-1 gdot the body velocity, so G-invariance holds
// identically.

struct MetricBlocks {
  Mat k_BB;  // base_dim x base_dim
  Mat k_Bg;  // base_dim x dim(g)
  Mat k_gg;  // dim(g) x dim(g)
};

struct ConfigurationSystem {
  int base_dim = 0;
  LieGroupDescriptor group;
  std::function<MetricBlocks(const Vec& b)> metric;
  std::string name;
  // Chart validity; single global chart per system, transitions out of scope.
  std::function<bool(const Vec& b)> in_chart = [](const Vec&) { return true; };
  // Distance between base points; periodic charts (angle coordinates)
  // override this so closed loops are recognized.
  std::function<double(const Vec&, const Vec&)> base_distance =
      [](const Vec& a, const Vec& b) { return (a - b).norm(); };
};

// Checks symmetry and positive definiteness of the blocks (and of the full
// block matrix) on the supplied base points.  Throws on violation.
void validate_metric(const ConfigurationSystem& sys, const std::vector<Vec>& sample_points,
                     double tol = 1e-10);

struct BundleState {
  Vec b;
  GroupElement g;
};

// Base curve b(t): either an analytic pair (position, velocity) or a sample
// table with cubic Hermite interpolation (finite-difference slopes).
class BaseCurve {
 public:
  BaseCurve() = default;
  static BaseCurve analytic(std::function<Vec(double)> pos, std::function<Vec(double)> vel);
  // Position only; velocity by central differences with step 1e-6.
  static BaseCurve from_position(std::function<Vec(double)> pos);
  static BaseCurve from_samples(const std::vector<double>& t, const std::vector<Vec>& b);

  Vec position(double t) const { return pos_(t); }
  Vec velocity(double t) const { return vel_(t); }

 private:
  std::function<Vec(double)> pos_, vel_;
};

// Spatial momentum J = Ad*_g ( k_gg(b) eta + k_Bg(b)^t bdot ).
MomentumCovector momentum(const ConfigurationSystem& sys, const BundleState& state, const Vec& bdot,
                          const AlgebraVector& eta);

// Locked inertia tensor I_q = Ad*_g o k_gg(b) o Ad_{g^-1} as a matrix.
Mat locked_inertia(const ConfigurationSystem& sys, const BundleState& state);

// Gram matrix <I_q u_i, u_j> on a linearly independent subspace basis.
Mat restricted_inertia(const ConfigurationSystem& sys, const BundleState& state,
                       const std::vector<AlgebraVector>& subspace_basis);

struct KineticSplit {
  double total = 0;     // K
  double internal = 0;  // K_int
  double coupling = 0;  // <J0, xi>
  double vertical = 0;  // 1/2 <I0 xi, xi>
};

// K for the full velocity (bdot, eta) at state, split against the gauge
// velocity (bdot, 0) through the same point.
KineticSplit kinetic_energy(const ConfigurationSystem& sys, const BundleState& state, const Vec& bdot,
                            const AlgebraVector& eta);

// Appendix-style split for an explicit gauge/group decomposition: the gauge
// moves with (bdot, eta0) through state and the group factor has body
// velocity xi.  total equals the direct form at eta = eta0 + Ad_{g^-1} xi.
KineticSplit kinetic_energy_gauge_split(const ConfigurationSystem& sys, const BundleState& d0,
                                        const Vec& bdot, const AlgebraVector& eta0,
                                        const AlgebraVector& xi);

}  // namespace geophase
