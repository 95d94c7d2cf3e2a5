#include "geophase/dynamics.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "geophase/integrators.hpp"

namespace geophase {

namespace {

struct GaugeCoefficients {
  int k = 0;  // dim g^{d0(t)}
  std::vector<Mat> I0, I0inv, F, dI0, dF;
  std::vector<Vec> J0, dJ0, xi_p, dxi_p;
  std::vector<double> Kint;
};

Mat mat_stencil(const std::vector<Mat>& v, int i, double h) {
  const int n = static_cast<int>(v.size());
  auto at = [&](int j) -> const Mat& { return v[j]; };
  if (i >= 2 && i <= n - 3)
    return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
  if (i == 0)
    return (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * h);
  if (i == 1)
    return (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h);
  if (i == n - 2)
    return (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) + 6.0 * at(n - 4) - at(n - 5)) /
           (12.0 * h);
  return (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) - 16.0 * at(n - 4) +
          3.0 * at(n - 5)) /
         (12.0 * h);
}

GaugeCoefficients precompute(const ConfigurationSystem& sys, const ConstraintData* cons,
                             const GaugeCurve& gauge, double continuity_threshold) {
  const int n = gauge.n_fine();
  if (n < 5) throw std::invalid_argument("grid too coarse: need at least 3 node steps");
  const int dim = sys.group.dim;

  GaugeCoefficients c;
  c.I0.resize(n);
  c.I0inv.resize(n);
  c.J0.resize(n);
  c.F.resize(n);
  c.xi_p.resize(n);
  c.Kint.resize(n);

  for (int i = 0; i < n; ++i) {
    const MetricBlocks k = sys.metric(gauge.b[i]);
    const Mat Adm_inv = Ad_matrix(sys.group, inverse(sys.group, gauge.g0[i]));
    c.I0[i] = Adm_inv.transpose() * k.k_gg * Adm_inv;
    c.I0inv[i] = c.I0[i].ldlt().solve(Mat::Identity(dim, dim));
    Vec body = k.k_gg * gauge.eta0[i];
    double kint = 0.5 * gauge.eta0[i].dot(k.k_gg * gauge.eta0[i]);
    if (sys.base_dim > 0) {
      body += k.k_Bg.transpose() * gauge.bdot[i];
      kint += 0.5 * gauge.bdot[i].dot(k.k_BB * gauge.bdot[i]) +
              gauge.bdot[i].dot(k.k_Bg * gauge.eta0[i]);
    }
    c.J0[i] = Adm_inv.transpose() * body;
    c.Kint[i] = kint;
  }

  // Moving frame of g^{d0(t)} and minimal-norm particular solution of the
  // gauge-induced affine constraint on xi (zero for NH/Affine gauges).
  if (cons != nullptr && cons->m > 0) {
    std::vector<BundleState> states;
    states.reserve(n);
    for (int i = 0; i < n; ++i) states.push_back(gauge.state(i));
    const ConstraintSubalgebraFrame fr =
        build_frame(sys, *cons, gauge.t, states, continuity_threshold);
    c.k = fr.k;
    c.F = fr.basis;
    for (int i = 0; i < n; ++i) {
      const ConstraintRows rows = cons->rows(gauge.b[i]);
      Vec r = cons->affine_value(gauge.b[i], gauge.t[i]) - rows.W * gauge.eta0[i];
      if (rows.A.cols() > 0) r -= rows.A * gauge.bdot[i];
      if (r.norm() <= 1e-13 * (1.0 + gauge.eta0[i].norm())) {
        c.xi_p[i] = Vec::Zero(dim);
      } else {
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(rows.W);
        cod.setThreshold(kRankThreshold);
        const Vec y = cod.solve(r);
        if ((rows.W * y - r).norm() > 1e-8 * (1.0 + r.norm()))
          throw AffineInfeasibleError("gauge-induced constraint is infeasible at t=" +
                                      std::to_string(gauge.t[i]));
        c.xi_p[i] = Ad_matrix(sys.group, gauge.g0[i]) * y;
      }
    }
  } else {
    c.k = dim;
    for (int i = 0; i < n; ++i) {
      c.F[i] = Mat::Identity(dim, dim);
      c.xi_p[i] = Vec::Zero(dim);
    }
  }

  c.dI0.resize(n);
  c.dF.resize(n);
  c.dJ0.resize(n);
  c.dxi_p.resize(n);
  const double hf = gauge.fine_h;
  for (int i = 0; i < n; ++i) {
    c.dI0[i] = mat_stencil(c.I0, i, hf);
    c.dF[i] = mat_stencil(c.F, i, hf);
    c.dJ0[i] = stencil_derivative(c.J0, i, hf);
    c.dxi_p[i] = stencil_derivative(c.xi_p, i, hf);
  }
  return c;
}

Vec lambda_rate(const ConfigurationSystem& sys, const GaugeCoefficients& c, int j, const Vec& lam) {
  const Vec xi = c.xi_p[j] + c.F[j] * lam;
  const Vec Pi = c.I0[j] * xi + c.J0[j];
  const Vec ad_term = -ad_matrix(sys.group, AlgebraVector(xi)).transpose() * Pi;
  const Vec rhs = c.dI0[j] * xi + c.I0[j] * (c.dxi_p[j] + c.dF[j] * lam) + c.dJ0[j] + ad_term;
  const Mat A = c.F[j].transpose() * c.I0[j] * c.F[j];
  return A.ldlt().solve((-c.F[j].transpose() * rhs).eval());
}

// Cubic Hermite midpoint in the exponential chart centered at g0:
// g(t + h/2) ~ g0 * exp(d/2 + (h/8)(v0 - v1)) with d = log(g0^-1 g1),
// v0 = xi(t), v1 = dexpinv(d, xi(t+h)).
GroupElement hermite_group_midpoint(const LieGroupDescriptor& G, const GroupElement& g0,
                                    const GroupElement& g1, const Vec& xi0, const Vec& xi1,
                                    double h) {
  const Vec d = log(G, mul(G, inverse(G, g0), g1)).coords;
  const Vec v1 = dexpinv(G, d, xi1);
  const Vec u = 0.5 * d + (h / 8.0) * (xi0 - v1);
  return mul(G, g0, exp(G, AlgebraVector(u)));
}

void finalize_columns(const ConfigurationSystem& sys, const ConstraintData* cons,
                      const GaugeCurve& gauge, const GaugeCoefficients& c, Trajectory& traj) {
  const int n = traj.n_nodes();
  traj.Pi.resize(n);
  traj.J_spatial.resize(n);
  traj.frame.resize(n);
  traj.E.resize(n);
  traj.K.resize(n);
  traj.res_constraint.assign(n, 0.0);
  traj.res_momentum.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    const int j = gauge.node_to_fine(i);
    traj.Pi[i] = c.I0[j] * traj.xi[i] + c.J0[j];
    traj.J_spatial[i] =
        Ad_matrix(sys.group, inverse(sys.group, traj.g[i])).transpose() * traj.Pi[i];
    traj.frame[i] = c.F[j];
    const KineticSplit ks =
        kinetic_energy_gauge_split(sys, gauge.state(j), gauge.bdot[j],
                                   AlgebraVector(gauge.eta0[j]), AlgebraVector(traj.xi[i]));
    traj.K[i] = ks.total;
    traj.E[i] = -ks.total + traj.Pi[i].dot(c.I0inv[j] * c.J0[j]);
    if (cons != nullptr && cons->m > 0) {
      const Vec eta_c =
          gauge.eta0[j] + Ad_matrix(sys.group, inverse(sys.group, gauge.g0[j])) * traj.xi[i];
      traj.res_constraint[i] = constraint_residual(sys, *cons, gauge.state(j), gauge.bdot[j],
                                                   AlgebraVector(eta_c), traj.t[i])
                                   .norm();
    }
    if (!traj.Pi[i].allFinite())
      throw IntegrationError("non-finite state at t=" + std::to_string(traj.t[i]));
  }
  for (int i = 0; i < n; ++i) {
    const Vec dPi = stencil_derivative(traj.Pi, i, traj.h);
    const Vec full =
        dPi - ad_matrix(sys.group, AlgebraVector(traj.xi[i])).transpose() * traj.Pi[i];
    traj.res_momentum[i] = (traj.frame[i].transpose() * full).norm();
  }
}

}  // namespace

double Trajectory::max_res_constraint() const {
  double m = 0;
  for (double r : res_constraint) m = std::max(m, r);
  return m;
}

double Trajectory::max_res_momentum() const {
  double m = 0;
  for (double r : res_momentum) m = std::max(m, r);
  return m;
}

Trajectory simulate(const ConfigurationSystem& sys, const ConstraintData& cons,
                    const GaugeCurve& gauge, const GroupElement& g1, const AlgebraVector& xi1,
                    const SimOptions& opts) {
  const GaugeCoefficients c = precompute(sys, &cons, gauge, opts.frame_continuity_threshold);
  const int n_nodes = gauge.n_nodes();
  const double h = gauge.h;
  const auto& G = sys.group;

  if (cons.m > 0) {
    const Vec y1 = Ad_matrix(G, inverse(G, gauge.g0[0])) * xi1.coords;
    const ConstraintRows rows = cons.rows(gauge.b[0]);
    Vec r = cons.affine_value(gauge.b[0], gauge.t[0]) - rows.W * gauge.eta0[0];
    if (rows.A.cols() > 0) r -= rows.A * gauge.bdot[0];
    if ((rows.W * y1 - r).norm() > 1e-8 * (1.0 + r.norm()))
      throw PreconditionError("initial body velocity violates the constraints");
  }

  Trajectory traj;
  traj.group = G;
  traj.t1 = gauge.t1;
  traj.h = h;
  traj.t.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) traj.t[i] = gauge.t1 + i * h;
  traj.g.resize(n_nodes);
  traj.xi.resize(n_nodes);
  traj.lambda.resize(n_nodes);
  traj.t_fine = gauge.t;
  traj.g_fine.resize(gauge.n_fine());
  traj.xi_fine.resize(gauge.n_fine());

  auto xi_of = [&](int j, const Vec& l) { return (c.xi_p[j] + c.F[j] * l).eval(); };

  Vec lam = c.F[0].transpose() * (xi1.coords - c.xi_p[0]);
  GroupElement g = g1;

  for (int i = 0;; ++i) {
    const int j = gauge.node_to_fine(i);
    traj.g[i] = g;
    traj.lambda[i] = lam;
    traj.xi[i] = xi_of(j, lam);
    if (!lam.allFinite())
      throw IntegrationError("non-finite state at t=" + std::to_string(traj.t[i]));
    if (i == n_nodes - 1) break;

    // Classical RK4 on lambda coupled to a Munthe-Kaas 4 update of g, with
    // stages on the half-step gauge samples.
    const int jm = j + 1, jn = j + 2;
    const Vec k1 = lambda_rate(sys, c, j, lam);
    const Vec a1 = xi_of(j, lam);
    const Vec l2 = lam + 0.5 * h * k1;
    const Vec k2 = lambda_rate(sys, c, jm, l2);
    const Vec a2 = dexpinv(G, 0.5 * h * a1, xi_of(jm, l2));
    const Vec l3 = lam + 0.5 * h * k2;
    const Vec k3 = lambda_rate(sys, c, jm, l3);
    const Vec a3 = dexpinv(G, 0.5 * h * a2, xi_of(jm, l3));
    const Vec l4 = lam + h * k3;
    const Vec k4 = lambda_rate(sys, c, jn, l4);
    const Vec a4 = dexpinv(G, h * a3, xi_of(jn, l4));

    lam += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    g = mul(G, g, exp(G, AlgebraVector(((h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)).eval())));
  }

  // Fine record: nodes verbatim, midpoints by Hermite interpolation in the
  // exponential chart (4th order, matching the integrator).
  for (int i = 0; i < n_nodes; ++i) {
    const int j = gauge.node_to_fine(i);
    traj.g_fine[j] = traj.g[i];
    traj.xi_fine[j] = traj.xi[i];
    if (i + 1 < n_nodes) {
      traj.g_fine[j + 1] = hermite_group_midpoint(G, traj.g[i], traj.g[i + 1], traj.xi[i],
                                                  traj.xi[i + 1], h);
      const Vec lmid = 0.5 * (traj.lambda[i] + traj.lambda[i + 1]) +
                       (h / 8.0) * (lambda_rate(sys, c, j, traj.lambda[i]) -
                                    lambda_rate(sys, c, j + 2, traj.lambda[i + 1]));
      traj.xi_fine[j + 1] = xi_of(j + 1, lmid);
    }
  }

  finalize_columns(sys, &cons, gauge, c, traj);
  return traj;
}

Trajectory solve_conserved_momentum(const ConfigurationSystem& sys, const GaugeCurve& gauge,
                                    const MomentumCovector& mu, const GroupElement& g1,
                                    const SimOptions& opts) {
  const GaugeCoefficients c = precompute(sys, nullptr, gauge, opts.frame_continuity_threshold);
  const auto& G = sys.group;
  const int n_nodes = gauge.n_nodes();
  const double h = gauge.h;

  Trajectory traj;
  traj.group = G;
  traj.t1 = gauge.t1;
  traj.h = h;
  traj.t.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) traj.t[i] = gauge.t1 + i * h;
  traj.g.resize(n_nodes);
  traj.xi.resize(n_nodes);
  traj.lambda.resize(n_nodes);
  traj.t_fine = gauge.t;
  traj.g_fine.resize(gauge.n_fine());
  traj.xi_fine.resize(gauge.n_fine());

  GroupElement g = g1;
  // coAd(g1^{-1}, mu): spatial momentum pulled to the body frame at t1.
  Vec Pi = Ad_matrix(G, g1).transpose() * mu.coords;
  std::vector<Vec> Pi_nodes(n_nodes);

  auto xi_of = [&](int j, const Vec& p) { return (c.I0inv[j] * (p - c.J0[j])).eval(); };
  auto rate = [&](int j, const Vec& p) {
    return (ad_matrix(G, AlgebraVector(xi_of(j, p))).transpose() * p).eval();
  };

  for (int i = 0;; ++i) {
    const int j = gauge.node_to_fine(i);
    traj.g[i] = g;
    traj.xi[i] = xi_of(j, Pi);
    traj.lambda[i] = Vec();
    Pi_nodes[i] = Pi;

    const Vec drift = Ad_matrix(G, inverse(G, g)).transpose() * Pi - mu.coords;
    if (!drift.allFinite()) throw IntegrationError("non-finite state in conserved-momentum solve");
    if (drift.norm() > opts.momentum_residual_tol)
      throw IntegrationError("spatial momentum drift " + std::to_string(drift.norm()) +
                             " exceeds tolerance at t=" + std::to_string(traj.t[i]));
    if (i == n_nodes - 1) break;

    const int jm = j + 1, jn = j + 2;
    const Vec k1 = rate(j, Pi);
    const Vec a1 = xi_of(j, Pi);
    const Vec p2 = Pi + 0.5 * h * k1;
    const Vec k2 = rate(jm, p2);
    const Vec a2 = dexpinv(G, 0.5 * h * a1, xi_of(jm, p2));
    const Vec p3 = Pi + 0.5 * h * k2;
    const Vec k3 = rate(jm, p3);
    const Vec a3 = dexpinv(G, 0.5 * h * a2, xi_of(jm, p3));
    const Vec p4 = Pi + h * k3;
    const Vec k4 = rate(jn, p4);
    const Vec a4 = dexpinv(G, h * a3, xi_of(jn, p4));

    Pi += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    g = mul(G, g, exp(G, AlgebraVector(((h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)).eval())));
  }

  for (int i = 0; i < n_nodes; ++i) {
    const int j = gauge.node_to_fine(i);
    traj.g_fine[j] = traj.g[i];
    traj.xi_fine[j] = traj.xi[i];
    if (i + 1 < n_nodes) {
      traj.g_fine[j + 1] = hermite_group_midpoint(G, traj.g[i], traj.g[i + 1], traj.xi[i],
                                                  traj.xi[i + 1], h);
      const Vec pmid = 0.5 * (Pi_nodes[i] + Pi_nodes[i + 1]) +
                       (h / 8.0) * (rate(j, Pi_nodes[i]) - rate(j + 2, Pi_nodes[i + 1]));
      traj.xi_fine[j + 1] = xi_of(j + 1, pmid);
    }
  }

  finalize_columns(sys, nullptr, gauge, c, traj);
  return traj;
}

AbelianSolution abelian_solution(const ConfigurationSystem& sys, const ConstraintData& cons,
                                 const GaugeCurve& gauge, const std::function<Vec(double)>& J_c) {
  if (!sys.group.is_abelian())
    throw std::invalid_argument("abelian_solution requires an abelian group");
  const GaugeCoefficients c = precompute(sys, &cons, gauge, 0.5);
  const auto& G = sys.group;
  const int nf = gauge.n_fine();
  const double hf = gauge.fine_h;

  std::vector<Vec> integrand(nf), p(nf);
  for (int j = 0; j < nf; ++j) {
    const Vec Jc = J_c(gauge.t[j]);
    const Mat A = c.F[j].transpose() * c.I0[j] * c.F[j];
    const Vec lam = A.ldlt().solve((c.F[j].transpose() * Jc).eval());
    integrand[j] = c.F[j] * lam;
    p[j] = c.F[j].transpose() * Jc;
  }

  AbelianSolution out;
  const int n_nodes = gauge.n_nodes();
  out.t.resize(n_nodes);
  out.g.resize(n_nodes);
  Vec acc = Vec::Zero(G.dim);
  out.t[0] = gauge.t1;
  out.g[0] = identity(G);
  for (int i = 1; i < n_nodes; ++i) {
    const int j = 2 * i;
    acc += (hf / 3.0) * (integrand[j - 2] + 4.0 * integrand[j - 1] + integrand[j]);
    out.t[i] = gauge.t1 + i * gauge.h;
    out.g[i] = exp(G, AlgebraVector(acc));
  }

  // Parallel-transport residual of the frame coordinates of J(cdot), with
  // the complement of the frame chosen I0-orthogonal.
  double worst = 0;
  if (c.k > 0) {
    for (int j = 0; j < nf; ++j) {
      const Vec dp = stencil_derivative(p, j, hf);
      const Mat C = nullspace_basis((c.F[j].transpose() * c.I0[j]).eval());
      Mat B(G.dim, c.k + C.cols());
      B << c.F[j], C;
      const Mat X = B.colPivHouseholderQr().solve(c.dF[j]);
      Vec res(c.k);
      for (int i = 0; i < c.k; ++i) res(i) = dp(i) - X.col(i).head(c.k).dot(p[j]);
      worst = std::max(worst, res.norm());
    }
  }
  out.max_parallel_transport_residual = worst;
  return out;
}

EnergyTrack energy_track(const ConfigurationSystem& sys, const Trajectory& traj,
                         const GaugeCurve& gauge) {
  const int n = traj.n_nodes();
  if (gauge.n_nodes() != n) throw std::invalid_argument("energy_track: grid mismatch");
  EnergyTrack out;
  out.t = traj.t;
  out.E_identity = traj.E;
  out.E_ode.resize(n);

  const int dim = sys.group.dim;
  std::vector<Mat> I0inv(n);
  std::vector<Vec> I0invJ0(n);
  std::vector<double> T0(n);
  for (int i = 0; i < n; ++i) {
    const int j = gauge.node_to_fine(i);
    const MetricBlocks k = sys.metric(gauge.b[j]);
    const Mat Adm_inv = Ad_matrix(sys.group, inverse(sys.group, gauge.g0[j]));
    const Mat I0 = Adm_inv.transpose() * k.k_gg * Adm_inv;
    I0inv[i] = I0.ldlt().solve(Mat::Identity(dim, dim));
    Vec body = k.k_gg * gauge.eta0[j];
    double kint = 0.5 * gauge.eta0[j].dot(k.k_gg * gauge.eta0[j]);
    if (sys.base_dim > 0) {
      body += k.k_Bg.transpose() * gauge.bdot[j];
      kint += 0.5 * gauge.bdot[j].dot(k.k_BB * gauge.bdot[j]) +
              gauge.bdot[j].dot(k.k_Bg * gauge.eta0[j]);
    }
    const Vec J0 = Adm_inv.transpose() * body;
    I0invJ0[i] = I0inv[i] * J0;
    T0[i] = kint - 0.5 * J0.dot(I0invJ0[i]);
  }

  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) {
    const Mat dI0inv = mat_stencil(I0inv, i, traj.h);
    const Vec dI0invJ0 = stencil_derivative(I0invJ0, i, traj.h);
    const double dT0 = stencil_derivative(T0, i, traj.h);
    f[i] = -(0.5 * traj.Pi[i].dot(dI0inv * traj.Pi[i]) - traj.Pi[i].dot(dI0invJ0) + dT0);
  }

  // Cumulative trapezoid with Euler-Maclaurin endpoint correction (4th order).
  std::vector<double> fp(n);
  for (int i = 0; i < n; ++i) fp[i] = stencil_derivative(f, i, traj.h);
  double trapz = 0;
  out.E_ode[0] = traj.E[0];
  double worst = 0;
  for (int i = 1; i < n; ++i) {
    trapz += 0.5 * traj.h * (f[i - 1] + f[i]);
    out.E_ode[i] = traj.E[0] + trapz - (traj.h * traj.h / 12.0) * (fp[i] - fp[0]);
    worst = std::max(worst, std::fabs(out.E_ode[i] - out.E_identity[i]));
  }
  out.max_difference = worst;
  return out;
}

TorqueDiagnostic constraint_torque(const Trajectory& traj) {
  TorqueDiagnostic out;
  const int n = traj.n_nodes();
  out.t = traj.t;
  out.torque.resize(n);
  out.i_star_norm.resize(n);
  for (int i = 0; i < n; ++i) {
    out.torque[i] = stencil_derivative(traj.J_spatial, i, traj.h);
    const Mat frame_c = Ad_matrix(traj.group, traj.g[i]) * traj.frame[i];
    out.i_star_norm[i] = (frame_c.transpose() * out.torque[i]).norm();
  }
  return out;
}

namespace {
void write_scalar(std::ofstream& f, double v) {
  char buf[32];
  snprintf(buf, sizeof buf, "%.17g", v);
  f << buf;
}
}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const std::vector<std::string>& header_lines) {
  std::ofstream f(path);
  if (!f) throw GeophaseError("cannot open " + path + " for writing");
  for (const auto& l : header_lines) f << "# " << l << "\n";
  const int gs = serialized_size(traj.group);
  const int dim = traj.group.dim;
  const int kdim = traj.lambda.empty() ? 0 : static_cast<int>(traj.lambda[0].size());
  f << "t";
  for (int i = 0; i < gs; ++i) f << ",g" << i;
  for (int i = 0; i < dim; ++i) f << ",xi" << i;
  for (int i = 0; i < dim; ++i) f << ",Pi" << i;
  for (int i = 0; i < dim; ++i) f << ",J" << i;
  for (int i = 0; i < kdim; ++i) f << ",lambda" << i;
  f << ",E,K,res_constraint,res_momentum\n";
  for (int i = 0; i < traj.n_nodes(); ++i) {
    write_scalar(f, traj.t[i]);
    auto put_vec = [&](const Vec& v) {
      for (int j = 0; j < v.size(); ++j) {
        f << ',';
        write_scalar(f, v(j));
      }
    };
    put_vec(serialize(traj.group, traj.g[i]));
    put_vec(traj.xi[i]);
    put_vec(traj.Pi[i]);
    put_vec(traj.J_spatial[i]);
    put_vec(traj.lambda[i]);
    f << ',';
    write_scalar(f, traj.E[i]);
    f << ',';
    write_scalar(f, traj.K[i]);
    f << ',';
    write_scalar(f, traj.res_constraint[i]);
    f << ',';
    write_scalar(f, traj.res_momentum[i]);
    f << "\n";
  }
}

void write_trajectory_json(const Trajectory& traj, const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& header) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : header) j["header"][k] = v;
  auto vec_to_json = [](const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["t"] = traj.t;
  j["g"] = nlohmann::json::array();
  j["xi"] = nlohmann::json::array();
  j["Pi"] = nlohmann::json::array();
  j["J_spatial"] = nlohmann::json::array();
  j["lambda"] = nlohmann::json::array();
  for (int i = 0; i < traj.n_nodes(); ++i) {
    j["g"].push_back(vec_to_json(serialize(traj.group, traj.g[i])));
    j["xi"].push_back(vec_to_json(traj.xi[i]));
    j["Pi"].push_back(vec_to_json(traj.Pi[i]));
    j["J_spatial"].push_back(vec_to_json(traj.J_spatial[i]));
    j["lambda"].push_back(vec_to_json(traj.lambda[i]));
  }
  j["E"] = traj.E;
  j["K"] = traj.K;
  j["res_constraint"] = traj.res_constraint;
  j["res_momentum"] = traj.res_momentum;
  std::ofstream f(path);
  if (!f) throw GeophaseError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

}  // namespace geophase
