#pragma once

#include <functional>
#include <optional>

#include "geophase/config_system.hpp"

namespace geophase {

struct GeophaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateRankError : GeophaseError {
  using GeophaseError::GeophaseError;
};
struct FrameDiscontinuityError : GeophaseError {
  using GeophaseError::GeophaseError;
};
struct AffineInfeasibleError : GeophaseError {
  using GeophaseError::GeophaseError;
};
struct NonUniqueLiftError : GeophaseError {
  using GeophaseError::GeophaseError;
};
struct IntegrationError : GeophaseError {
  using GeophaseError::GeophaseError;
};
struct PreconditionError : GeophaseError {
  using GeophaseError::GeophaseError;
};

// Rows of the distribution D acting on (bdot, eta):
//   A(b) bdot + W(b) eta = gamma(b, t),
// with gamma == 0 for linear constraints.  Rows depend only on the base
// point and the body velocity, which makes G-invariance structural.
struct ConstraintRows {
  Mat A;  // m x base_dim
  Mat W;  // m x dim(g)
};

struct ConstraintData {
  int m = 0;
  std::function<ConstraintRows(const Vec& b)> rows;
  std::function<Vec(const Vec& b, double t)> affine;  // null -> zero field

  bool is_affine() const { return static_cast<bool>(affine); }
  Vec affine_value(const Vec& b, double t) const {
    return affine ? affine(b, t) : Vec(Vec::Zero(m));
  }
};

// Relative singular-value threshold for rank decisions.
inline constexpr double kRankThreshold = 1e-10;

// Orthonormal basis of the nullspace of M (columns), with a degeneracy guard:
// singular values within a factor ~100 of the rank threshold raise
// DegenerateRankError (ambiguous dimension).
Mat nullspace_basis(const Mat& M, double rel_threshold = kRankThreshold);

// Orthonormal basis of g^q = { X : W(b) Ad_{g^-1} X = 0 }.
std::vector<AlgebraVector> vertical_subalgebra(const ConfigurationSystem& sys,
                                               const ConstraintData& cons, const BundleState& state);

struct PrincipalCaseReport {
  bool holds = false;
  int rank_W = 0;
  int rank_WA = 0;
};

// (H1): every base velocity is admissible by a vertical adjustment, i.e.
// rank(W) = rank([W | A]).
PrincipalCaseReport check_principal_case(const ConfigurationSystem& sys, const ConstraintData& cons,
                                         const Vec& b);

// A(b) bdot + W(b) eta - gamma(b, t); zero iff (bdot, eta) lies in D.
Vec constraint_residual(const ConfigurationSystem& sys, const ConstraintData& cons,
                        const BundleState& state, const Vec& bdot, const AlgebraVector& eta,
                        double t);

// Projects the previous orthonormal frame onto the new nullspace and
// re-orthonormalizes via the polar factor (minimal frame rotation).
// prev and nullsp carry the basis vectors as columns.
Mat propagate_frame(const Mat& prev, const Mat& nullsp, double continuity_threshold = 0.5);

// Moving orthonormal frame of g^{d0(t)} along a sampled curve of states.
struct ConstraintSubalgebraFrame {
  std::vector<double> t;
  std::vector<Mat> basis;  // dim(g) x k per sample
  int k = 0;
};

ConstraintSubalgebraFrame build_frame(const ConfigurationSystem& sys, const ConstraintData& cons,
                                      const std::vector<double>& times,
                                      const std::vector<BundleState>& states,
                                      double continuity_threshold = 0.5);

}  // namespace geophase
