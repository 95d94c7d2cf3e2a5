#include "geophase/constraints.hpp"

#include <Eigen/SVD>

namespace geophase {

Mat nullspace_basis(const Mat& M, double rel_threshold) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return Mat::Identity(n, n);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    const double rel = sv(i) / smax;
    if (rel > rel_threshold * 100 || rel < rel_threshold * 0.01) {
      if (rel > rel_threshold) ++rank;
    } else {
      throw DegenerateRankError("nullspace dimension is numerically ambiguous (singular value " +
                                std::to_string(sv(i)) + " near threshold)");
    }
  }
  return svd.matrixV().rightCols(n - rank);
}

std::vector<AlgebraVector> vertical_subalgebra(const ConfigurationSystem& sys,
                                               const ConstraintData& cons,
                                               const BundleState& state) {
  const ConstraintRows rows = cons.rows(state.b);
  const Mat M = rows.W * Ad_matrix(sys.group, inverse(sys.group, state.g));
  const Mat N = nullspace_basis(M);
  std::vector<AlgebraVector> out;
  out.reserve(N.cols());
  for (int i = 0; i < N.cols(); ++i) out.emplace_back(N.col(i));
  return out;
}

PrincipalCaseReport check_principal_case(const ConfigurationSystem& sys, const ConstraintData& cons,
                                         const Vec& b) {
  (void)sys;
  const ConstraintRows rows = cons.rows(b);
  auto rank_of = [](const Mat& M) {
    if (M.size() == 0 || M.rows() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) / sv(0) > kRankThreshold) ++r;
    return r;
  };
  PrincipalCaseReport rep;
  rep.rank_W = rank_of(rows.W);
  Mat WA(rows.W.rows(), rows.W.cols() + rows.A.cols());
  WA << rows.W, rows.A;
  rep.rank_WA = rank_of(WA);
  rep.holds = rep.rank_W == rep.rank_WA;
  return rep;
}

Vec constraint_residual(const ConfigurationSystem& sys, const ConstraintData& cons,
                        const BundleState& state, const Vec& bdot, const AlgebraVector& eta,
                        double t) {
  (void)sys;
  const ConstraintRows rows = cons.rows(state.b);
  Vec r = rows.W * eta.coords - cons.affine_value(state.b, t);
  if (rows.A.cols() > 0) r += rows.A * bdot;
  return r;
}

Mat propagate_frame(const Mat& prev, const Mat& nullsp, double continuity_threshold) {
  if (prev.cols() != nullsp.cols())
    throw DegenerateRankError("constraint subalgebra dimension changed along the curve (" +
                              std::to_string(prev.cols()) + " -> " + std::to_string(nullsp.cols()) +
                              ")");
  if (prev.cols() == 0) return nullsp;
  const Mat M = nullsp.transpose() * prev;  // k x k cross-Gram
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < continuity_threshold)
    throw FrameDiscontinuityError("frame overlap dropped below continuity threshold");
  return nullsp * (svd.matrixU() * svd.matrixV().transpose());
}

ConstraintSubalgebraFrame build_frame(const ConfigurationSystem& sys, const ConstraintData& cons,
                                      const std::vector<double>& times,
                                      const std::vector<BundleState>& states,
                                      double continuity_threshold) {
  ConstraintSubalgebraFrame fr;
  fr.t = times;
  fr.basis.reserve(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    const ConstraintRows rows = cons.rows(states[i].b);
    const Mat M = rows.W * Ad_matrix(sys.group, inverse(sys.group, states[i].g));
    Mat N = nullspace_basis(M);
    if (i == 0) {
      fr.k = static_cast<int>(N.cols());
    } else {
      N = propagate_frame(fr.basis.back(), N, continuity_threshold);
    }
    fr.basis.push_back(std::move(N));
  }
  return fr;
}

}  // namespace geophase
