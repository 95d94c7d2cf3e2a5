#include "geophase/gauge.hpp"

#include <cmath>
#include <fstream>

#include "geophase/integrators.hpp"

namespace geophase {

namespace {

// eta0(t) for each tag, as a function of base data only; the group component
// is then integrated with 4th-order exponential staging on the fine grid.
using EtaSolver = std::function<Vec(double t, const Vec& b, const Vec& bdot)>;

Vec solve_nonholonomic_eta(const ConfigurationSystem& sys, const ConstraintData& cons, double t,
                           const Vec& b, const Vec& bdot) {
  const MetricBlocks k = sys.metric(b);
  const int dim = sys.group.dim;
  Vec rhs_c;
  Mat W;
  if (cons.m > 0) {
    const ConstraintRows rows = cons.rows(b);
    W = rows.W;
    rhs_c = cons.affine_value(b, t);
    if (rows.A.cols() > 0) rhs_c -= rows.A * bdot;
  } else {
    W = Mat::Zero(0, dim);
    rhs_c = Vec::Zero(0);
  }
  const Mat U = nullspace_basis(W);
  const int kdim = static_cast<int>(U.cols());
  Mat M(W.rows() + kdim, dim);
  Vec rhs(W.rows() + kdim);
  if (W.rows() > 0) {
    M.topRows(W.rows()) = W;
    rhs.head(W.rows()) = rhs_c;
  }
  if (kdim > 0) {
    M.bottomRows(kdim) = U.transpose() * k.k_gg;
    rhs.tail(kdim) = sys.base_dim > 0 ? Vec(-U.transpose() * k.k_Bg.transpose() * bdot)
                                      : Vec(Vec::Zero(kdim));
  }
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < dim)
    throw NonUniqueLiftError("nonholonomic lift system is singular at t=" + std::to_string(t));
  const Vec eta = qr.solve(rhs);
  if ((M * eta - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
    throw AffineInfeasibleError("nonholonomic lift system is inconsistent at t=" +
                                std::to_string(t));
  return eta;
}

Vec solve_mechanical_eta(const ConfigurationSystem& sys, const Vec& b, const Vec& bdot) {
  const MetricBlocks k = sys.metric(b);
  if (sys.base_dim == 0) return Vec::Zero(sys.group.dim);
  return k.k_gg.ldlt().solve((-k.k_Bg.transpose() * bdot).eval());
}

Vec solve_affine_eta(const ConfigurationSystem& sys, const ConstraintData& cons,
                     const AffineSelector& sel, double t, const Vec& b, const Vec& bdot) {
  const int dim = sys.group.dim;
  if (cons.m == 0) return Vec::Zero(dim);
  const ConstraintRows rows = cons.rows(b);
  Vec rhs = cons.affine_value(b, t);
  if (rows.A.cols() > 0) rhs -= rows.A * bdot;

  if (sel.kind == AffineSelector::PinComponents) {
    Mat M(rows.W.rows() + sel.pins.size(), dim);
    Vec r(rows.W.rows() + sel.pins.size());
    M.topRows(rows.W.rows()) = rows.W;
    r.head(rows.W.rows()) = rhs;
    for (size_t i = 0; i < sel.pins.size(); ++i) {
      M.row(rows.W.rows() + i).setZero();
      M(rows.W.rows() + i, sel.pins[i].first) = 1.0;
      r(rows.W.rows() + i) = sel.pins[i].second;
    }
    const Vec eta = M.colPivHouseholderQr().solve(r);
    if ((M * eta - r).norm() > 1e-8 * (1.0 + r.norm()))
      throw AffineInfeasibleError("affine gauge with pinned components is infeasible at t=" +
                                  std::to_string(t));
    return eta;
  }

  // Minimal kinetic norm: eta = k_gg^{-1} W^t (W k_gg^{-1} W^t)^{-1} rhs,
  // which is k_gg-orthogonal to Null(W).
  const MetricBlocks k = sys.metric(b);
  const Mat kinv_Wt = k.k_gg.ldlt().solve(rows.W.transpose().eval());
  const Mat S = rows.W * kinv_Wt;
  Eigen::ColPivHouseholderQR<Mat> qr(S);
  qr.setThreshold(kRankThreshold);
  const Vec y = qr.solve(rhs);
  if ((S * y - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
    throw AffineInfeasibleError("affine constraint rows are inconsistent at t=" +
                                std::to_string(t));
  return kinv_Wt * y;
}

GaugeCurve run_lift(const ConfigurationSystem& sys, const BaseCurve& base, const BundleState& q0,
                    const Grid& grid, GaugeTag tag, const EtaSolver& eta_of) {
  const int n_nodes = grid.n_nodes();
  const int n_fine = 2 * (n_nodes - 1) + 1;
  const double hf = grid.h / 2.0;

  GaugeCurve gc;
  gc.group = sys.group;
  gc.tag = tag;
  gc.t1 = grid.t1;
  gc.h = grid.h;
  gc.fine_h = hf;
  gc.t.resize(n_fine);
  gc.b.resize(n_fine);
  gc.bdot.resize(n_fine);
  gc.g0.resize(n_fine);
  gc.eta0.resize(n_fine);
  gc.defining_residual.assign(n_fine, 0.0);

  const Vec b1 = base.position(grid.t1);
  if ((q0.b - b1).norm() > 1e-9 * (1.0 + b1.norm()))
    throw PreconditionError("initial state does not project onto the base curve start");

  for (int i = 0; i < n_fine; ++i) {
    const double ti = grid.t1 + i * hf;
    gc.t[i] = ti;
    gc.b[i] = base.position(ti);
    gc.bdot[i] = base.velocity(ti);
    if (!sys.in_chart(gc.b[i]))
      throw PreconditionError("base curve leaves the chart of system " + sys.name + " at t=" +
                              std::to_string(ti));
    gc.eta0[i] = eta_of(ti, gc.b[i], gc.bdot[i]);
  }

  auto f = [&](double s, const GroupElement&) { return eta_of(s, base.position(s), base.velocity(s)); };
  gc.g0[0] = q0.g;
  for (int i = 0; i + 1 < n_fine; ++i)
    gc.g0[i + 1] = rkmk4_step_left(sys.group, gc.g0[i], gc.t[i], hf, f);
  return gc;
}

void fill_residuals(const ConfigurationSystem& sys, const ConstraintData* cons, GaugeCurve& gc) {
  for (int i = 0; i < gc.n_fine(); ++i) {
    double r = 0;
    const MetricBlocks k = sys.metric(gc.b[i]);
    Vec body = k.k_gg * gc.eta0[i];
    if (sys.base_dim > 0) body += k.k_Bg.transpose() * gc.bdot[i];
    switch (gc.tag) {
      case GaugeTag::NonHolonomic: {
        const Vec cr = constraint_residual(sys, *cons, gc.state(i), gc.bdot[i],
                                           AlgebraVector(gc.eta0[i]), gc.t[i]);
        const Mat U = nullspace_basis(cons->rows(gc.b[i]).W);
        r = cr.norm();
        if (U.cols() > 0) r = std::max(r, (U.transpose() * body).norm());
        break;
      }
      case GaugeTag::Mechanical:
        r = body.norm();
        break;
      case GaugeTag::Affine:
        r = constraint_residual(sys, *cons, gc.state(i), gc.bdot[i], AlgebraVector(gc.eta0[i]),
                                gc.t[i])
                .norm();
        break;
      case GaugeTag::Trivial:
      case GaugeTag::Custom:
        r = 0;
        break;
    }
    gc.defining_residual[i] = r;
  }
}

}  // namespace

int Grid::n_nodes() const {
  if (h <= 0 || t2 <= t1) throw std::invalid_argument("grid needs h > 0 and t2 > t1");
  const int n = static_cast<int>(std::lround((t2 - t1) / h));
  return std::max(n, 1) + 1;
}

double GaugeCurve::max_defining_residual() const {
  double m = 0;
  for (double r : defining_residual) m = std::max(m, r);
  return m;
}

GaugeCurve lift_nonholonomic(const ConfigurationSystem& sys, const ConstraintData& cons,
                             const BaseCurve& base, const BundleState& q0, const Grid& grid) {
  {
    const PrincipalCaseReport rep = check_principal_case(sys, cons, base.position(grid.t1));
    if (!rep.holds)
      throw PreconditionError("principal case (H1) fails on the base curve: rank W = " +
                              std::to_string(rep.rank_W) + ", rank [W|A] = " +
                              std::to_string(rep.rank_WA));
  }
  auto eta = [&](double t, const Vec& b, const Vec& bdot) {
    return solve_nonholonomic_eta(sys, cons, t, b, bdot);
  };
  GaugeCurve gc = run_lift(sys, base, q0, grid, GaugeTag::NonHolonomic, eta);
  fill_residuals(sys, &cons, gc);
  return gc;
}

GaugeCurve lift_mechanical(const ConfigurationSystem& sys, const BaseCurve& base,
                           const BundleState& q0, const Grid& grid) {
  auto eta = [&](double, const Vec& b, const Vec& bdot) { return solve_mechanical_eta(sys, b, bdot); };
  GaugeCurve gc = run_lift(sys, base, q0, grid, GaugeTag::Mechanical, eta);
  fill_residuals(sys, nullptr, gc);
  return gc;
}

GaugeCurve lift_affine(const ConfigurationSystem& sys, const ConstraintData& cons,
                       const BaseCurve& base, const BundleState& q0, const Grid& grid,
                       const AffineSelector& selector) {
  if (!cons.is_affine() && cons.m == 0)
    throw PreconditionError("affine lift needs constraint rows");
  auto eta = [&](double t, const Vec& b, const Vec& bdot) {
    return solve_affine_eta(sys, cons, selector, t, b, bdot);
  };
  GaugeCurve gc = run_lift(sys, base, q0, grid, GaugeTag::Affine, eta);
  fill_residuals(sys, &cons, gc);
  return gc;
}

GaugeCurve lift_trivial(const ConfigurationSystem& sys, const BaseCurve& base,
                        const BundleState& q0, const Grid& grid) {
  auto eta = [&](double, const Vec&, const Vec&) { return Vec(Vec::Zero(sys.group.dim)); };
  GaugeCurve gc = run_lift(sys, base, q0, grid, GaugeTag::Trivial, eta);
  fill_residuals(sys, nullptr, gc);
  return gc;
}

GaugeCurve gauge_transform(const GaugeCurve& gauge,
                           const std::function<std::pair<GroupElement, Vec>(double)>& gcg) {
  GaugeCurve out = gauge;
  out.tag = GaugeTag::Custom;
  for (int i = 0; i < gauge.n_fine(); ++i) {
    const auto [gi, zeta] = gcg(gauge.t[i]);
    out.g0[i] = mul(gauge.group, gi, gauge.g0[i]);
    out.eta0[i] =
        gauge.eta0[i] + Ad_matrix(gauge.group, inverse(gauge.group, gauge.g0[i])) * zeta;
    out.defining_residual[i] = 0.0;
  }
  return out;
}

void write_gauge_csv(const GaugeCurve& gauge, const std::string& path,
                     const std::vector<std::string>& header_lines) {
  std::ofstream f(path);
  if (!f) throw GeophaseError("cannot open " + path + " for writing");
  for (const auto& l : header_lines) f << "# " << l << "\n";
  f << "t";
  const int bdim = gauge.b.empty() ? 0 : static_cast<int>(gauge.b[0].size());
  for (int i = 0; i < bdim; ++i) f << ",b" << i;
  for (int i = 0; i < serialized_size(gauge.group); ++i) f << ",g" << i;
  for (int i = 0; i < gauge.group.dim; ++i) f << ",eta" << i;
  f << ",defining_residual\n";
  char buf[32];
  auto put = [&](double v) {
    snprintf(buf, sizeof buf, "%.17g", v);
    f << ',' << buf;
  };
  for (int i = 0; i < gauge.n_fine(); ++i) {
    snprintf(buf, sizeof buf, "%.17g", gauge.t[i]);
    f << buf;
    for (int j = 0; j < gauge.b[i].size(); ++j) put(gauge.b[i](j));
    const Vec s = serialize(gauge.group, gauge.g0[i]);
    for (int j = 0; j < s.size(); ++j) put(s(j));
    for (int j = 0; j < gauge.eta0[i].size(); ++j) put(gauge.eta0[i](j));
    put(gauge.defining_residual[i]);
    f << "\n";
  }
}

}  // namespace geophase
