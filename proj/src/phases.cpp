#include "geophase/phases.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "geophase/integrators.hpp"

namespace geophase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit axis of g_mu for 1-dimensional stabilizers of SO(3).
bool one_dim_axis(const LieGroupDescriptor& G, const IsotropyProjector& P, Eigen::Vector3d* axis) {
  if (G.kind != GroupKind::SO3) return false;
  if (P.basis.cols() != 1 || P.basis.rows() != 3) return false;
  *axis = P.basis.col(0).normalized();
  return true;
}

}  // namespace

double PhaseDecomposition::max_factor_residual() const {
  double m = 0;
  for (double r : factor_residual) m = std::max(m, r);
  return m;
}
double PhaseDecomposition::max_stabilizer_residual() const {
  double m = 0;
  for (double r : stabilizer_residual) m = std::max(m, r);
  return m;
}
double PhaseDecomposition::max_horizontality_residual() const {
  double m = 0;
  for (double r : horizontality_residual) m = std::max(m, r);
  return m;
}

IsotropyProjector isotropy_projector(const LieGroupDescriptor& G, const MomentumCovector& mu,
                                     const Mat& inner_product, bool allow_zero_mu, unsigned seed) {
  const int dim = G.dim;
  if (mu.coords.size() != dim) throw std::invalid_argument("isotropy_projector: mu dimension");
  if (inner_product.rows() != dim || inner_product.cols() != dim)
    throw std::invalid_argument("isotropy_projector: inner product dimension");
  if (mu.coords.norm() == 0 && !allow_zero_mu)
    throw std::invalid_argument("isotropy_projector: mu = 0 (pass allow_zero_mu to get P = id)");

  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto rand_vec = [&] {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = dist(rng);
    return v;
  };

  // Ad-invariance of the product, checked on random samples.
  for (int s = 0; s < 32; ++s) {
    const Vec x = rand_vec(), y = rand_vec();
    const GroupElement g = exp(G, AlgebraVector(rand_vec()));
    const Mat Adg = Ad_matrix(G, g);
    const double lhs = (Adg * x).dot(inner_product * (Adg * y));
    const double rhs = x.dot(inner_product * y);
    if (std::fabs(lhs - rhs) > 1e-10 * (1.0 + std::fabs(rhs)))
      throw std::invalid_argument("isotropy_projector: inner product is not Ad-invariant");
  }

  IsotropyProjector out;
  out.mu = mu;
  out.inner = inner_product;

  // g_mu = Ker(X -> coad(X, mu)).
  Mat M(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Vec e = Vec::Zero(dim);
    e(j) = 1.0;
    M.col(j) = coad(G, AlgebraVector(e), mu).coords;
  }
  Mat B = nullspace_basis(M);

  // Orthonormalize w.r.t. the inner product (Gram-Schmidt).
  for (int j = 0; j < B.cols(); ++j) {
    for (int i = 0; i < j; ++i) B.col(j) -= B.col(i).dot(inner_product * B.col(j)) * B.col(i);
    const double n = std::sqrt(B.col(j).dot(inner_product * B.col(j)));
    B.col(j) /= n;
  }
  out.basis = B;
  out.P = B * B.transpose() * inner_product;

  // Compatibility Ad_h o P = P o Ad_h for h in G_mu, on random samples.
  for (int s = 0; s < 32; ++s) {
    Vec z = Vec::Zero(dim);
    for (int j = 0; j < B.cols(); ++j) z += dist(rng) * B.col(j);
    const GroupElement h = exp(G, AlgebraVector(z));
    const Mat Adh = Ad_matrix(G, h);
    if ((Adh * out.P - out.P * Adh).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("isotropy_projector: P does not commute with Ad on G_mu");
  }
  return out;
}

GroupCurve group_curve_of(const Trajectory& traj) {
  GroupCurve c;
  c.group = traj.group;
  c.t1 = traj.t1;
  c.h = traj.h;
  c.t_fine = traj.t_fine;
  c.g_fine = traj.g_fine;
  c.xi_fine = traj.xi_fine;
  return c;
}

std::vector<GroupElement> dynamic_phase(const GroupCurve& curve, const IsotropyProjector& P,
                                        const std::vector<Vec>* Pi_nodes, double conservation_tol) {
  const auto& G = curve.group;
  const int n_nodes = curve.n_nodes();
  if (Pi_nodes != nullptr) {
    if (static_cast<int>(Pi_nodes->size()) != n_nodes)
      throw std::invalid_argument("dynamic_phase: Pi sample count mismatch");
    for (int i = 0; i < n_nodes; ++i) {
      const Vec J = Ad_matrix(G, inverse(G, curve.g_fine[2 * i])).transpose() * (*Pi_nodes)[i];
      if ((J - P.mu.coords).norm() > conservation_tol)
        throw PreconditionError("dynamic_phase: spatial momentum is not conserved along the curve");
    }
  }
  std::vector<GroupElement> h_D(n_nodes);
  h_D[0] = identity(G);

  // Spatial velocity of the curve at fine sample j.
  auto omega = [&](int j) {
    return (Ad_matrix(G, curve.g_fine[j]) * curve.xi_fine[j]).eval();
  };

  for (int i = 0; i + 1 < n_nodes; ++i) {
    const int j = 2 * i;
    auto w = [&](int idx) { return (P.P * omega(idx)).eval(); };
    // h' h^{-1} = w(t): integrate the inverse curve y = h^{-1}, y' = y(-w).
    GroupElement y = inverse(G, h_D[i]);
    const double h = curve.h;
    const Vec a1 = -w(j);
    const Vec a2 = dexpinv(G, 0.5 * h * a1, (-w(j + 1)).eval());
    const Vec a3 = dexpinv(G, 0.5 * h * a2, (-w(j + 1)).eval());
    const Vec a4 = dexpinv(G, h * a3, (-w(j + 2)).eval());
    y = mul(G, y, exp(G, AlgebraVector(((h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)).eval())));
    h_D[i + 1] = inverse(G, y);
  }
  return h_D;
}

PhaseDecomposition reconstruct_phases(const GroupCurve& curve, const IsotropyProjector& P,
                                      const std::vector<Vec>* Pi_nodes, double conservation_tol) {
  const auto& G = curve.group;
  const int n = curve.n_nodes();
  PhaseDecomposition out;
  out.t.resize(n);
  out.g.resize(n);
  out.h_D = dynamic_phase(curve, P, Pi_nodes, conservation_tol);
  out.g_G.resize(n);
  out.theta_dyn.assign(n, 0.0);
  out.factor_residual.resize(n);
  out.stabilizer_residual.resize(n);
  out.horizontality_residual.resize(n);

  Eigen::Vector3d axis;
  const bool has_axis = one_dim_axis(G, P, &axis);

  for (int i = 0; i < n; ++i) {
    out.t[i] = curve.t1 + i * curve.h;
    out.g[i] = curve.g_fine[2 * i];
    out.g_G[i] = mul(G, inverse(G, out.h_D[i]), out.g[i]);
    out.factor_residual[i] =
        group_distance(G, out.g[i], mul(G, out.h_D[i], out.g_G[i]));
    out.stabilizer_residual[i] =
        (coAd(G, out.h_D[i], P.mu).coords - P.mu.coords).norm();
    // g_G' g_G^{-1} = Ad_{h_D^{-1}} (1 - P)(g' g^{-1}) evaluated on samples.
    const Vec omega = Ad_matrix(G, out.g[i]) * curve.xi_fine[2 * i];
    const Vec horiz = Ad_matrix(G, inverse(G, out.h_D[i])) *
                      ((Mat::Identity(G.dim, G.dim) - P.P) * omega);
    out.horizontality_residual[i] = (P.P * horiz).norm();
    if (has_axis && i > 0) {
      const GroupElement step = mul(G, inverse(G, out.h_D[i - 1]), out.h_D[i]);
      out.theta_dyn[i] =
          out.theta_dyn[i - 1] + rotation_angle_about(rotation_matrix(step.quat), axis);
    }
  }
  if (has_axis && n > 0) {
    out.theta_geom = rotation_angle_about(rotation_matrix(out.g_G[n - 1].quat), axis);
  } else if (G.is_abelian() && n > 0) {
    // Abelian stabilizer: report the first coordinate of log(g_G(t2)).
    out.theta_geom = log(G, out.g_G[n - 1]).coords.size() > 0
                         ? log(G, out.g_G[n - 1]).coords(0)
                         : 0.0;
    for (int i = 1; i < n; ++i)
      out.theta_dyn[i] = log(G, out.h_D[i]).coords.size() > 0 ? log(G, out.h_D[i]).coords(0) : 0.0;
  }
  return out;
}

EnergyFormPhase dynamic_phase_energy_form(const ConfigurationSystem& sys, const Trajectory& traj,
                                          const GaugeCurve& gauge, const IsotropyProjector& P) {
  if (gauge.tag != GaugeTag::Mechanical && gauge.tag != GaugeTag::NonHolonomic &&
      gauge.tag != GaugeTag::Trivial)
    throw PreconditionError("dynamic_phase_energy_form needs a mechanical or horizontal NH gauge");
  if (gauge.max_defining_residual() > 1e-6)
    throw PreconditionError("gauge does not satisfy its defining relation");

  const auto& G = sys.group;
  const int n = traj.n_nodes();
  const Vec psi_mu = P.inner.ldlt().solve(P.mu.coords);  // metric-dual of mu
  const double norm_psi = std::sqrt(psi_mu.dot(P.inner * psi_mu));

  EnergyFormPhase out;
  out.t = traj.t;
  out.theta_dyn.assign(n, 0.0);
  out.stabilizer_components.resize(n);

  std::vector<double> rate(n);
  for (int i = 0; i < n; ++i) {
    const int j = gauge.node_to_fine(i);
    const double Kint =
        kinetic_energy(sys, gauge.state(j), gauge.bdot[j], AlgebraVector(gauge.eta0[j])).total;
    const double u1_coeff = (2.0 * traj.K[i] - 2.0 * Kint) / (norm_psi * norm_psi);

    // Locked inertia along the physical motion c(t) = g(t) . d0(t).
    BundleState c_state{gauge.b[j], mul(G, traj.g[i], gauge.g0[j])};
    const Mat Ic = locked_inertia(sys, c_state);
    const Vec Ic_inv_mu = Ic.ldlt().solve(P.mu.coords);

    Vec comp(P.basis.cols());
    comp(0) = u1_coeff * norm_psi;  // coefficient along u1 = psi_mu / |psi_mu|
    for (int b = 1; b < P.basis.cols(); ++b)
      comp(b) = P.basis.col(b).dot(P.inner * Ic_inv_mu);
    out.stabilizer_components[i] = comp;
    rate[i] = comp(0);
  }
  // Cumulative trapezoid with Euler-Maclaurin endpoint correction.
  std::vector<double> dr(n);
  for (int i = 0; i < n; ++i) dr[i] = stencil_derivative(rate, i, traj.h);
  double trapz = 0;
  for (int i = 1; i < n; ++i) {
    trapz += 0.5 * traj.h * (rate[i - 1] + rate[i]);
    out.theta_dyn[i] = trapz - (traj.h * traj.h / 12.0) * (dr[i] - dr[0]);
  }
  return out;
}

double solid_angle(const std::vector<Eigen::Vector3d>& loop, double closure_tol) {
  if (loop.size() < 3) throw std::invalid_argument("solid_angle: degenerate loop");
  double radius = 0;
  for (const auto& p : loop) radius = std::max(radius, p.norm());
  if (radius == 0) throw std::invalid_argument("solid_angle: zero-length loop");
  if ((loop.front() - loop.back()).norm() > closure_tol * radius)
    throw std::invalid_argument("solid_angle: loop is not closed");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : loop) centroid += p.normalized();
  double span = 0;
  for (size_t i = 1; i < loop.size(); ++i)
    span = std::max(span, (loop[i].normalized() - loop[0].normalized()).norm());
  if (span < 1e-14) return 0.0;  // point loop
  if (centroid.norm() < 1e-12) centroid = loop[0].normalized();
  const Eigen::Vector3d c = centroid.normalized();

  double omega = 0;
  const size_t n = loop.size();
  for (size_t i = 0; i + 1 < n; ++i) {
    const Eigen::Vector3d p1 = loop[i].normalized(), p2 = loop[i + 1].normalized();
    const double num = c.dot(p1.cross(p2));
    const double den = 1.0 + c.dot(p1) + p1.dot(p2) + p2.dot(c);
    omega += 2.0 * std::atan2(num, den);
  }
  const double four_pi = 2.0 * kTwoPi;
  double r = std::fmod(omega, four_pi);
  if (r > 0.5 * four_pi) r -= four_pi;
  if (r < -0.5 * four_pi) r += four_pi;
  return r;
}

HolonomyReport nonholonomic_holonomy(const ConfigurationSystem& sys, const ConstraintData& cons,
                                     const BaseCurve& closed_base, const BundleState& q0,
                                     const Grid& grid) {
  const Vec b1 = closed_base.position(grid.t1), b2 = closed_base.position(grid.t2);
  if (sys.base_distance(b1, b2) > 1e-8 * (1.0 + b1.norm()))
    throw PreconditionError("nonholonomic_holonomy: base curve is not closed");
  const GaugeCurve nh = lift_nonholonomic(sys, cons, closed_base, q0, grid);
  const GaugeCurve mech = lift_mechanical(sys, closed_base, q0, grid);
  const auto& G = sys.group;
  HolonomyReport rep;
  rep.g_NH = mul(G, nh.g0.back(), inverse(G, nh.g0.front()));
  rep.g_Mech = mul(G, mech.g0.back(), inverse(G, nh.g0.back()));
  rep.g_MP = mul(G, rep.g_Mech, rep.g_NH);
  return rep;
}

namespace {

// Identify span(H_basis) with a union of product-factor blocks.
std::vector<int> factor_blocks_of(const LieGroupDescriptor& G,
                                  const std::vector<AlgebraVector>& H_basis) {
  std::vector<std::pair<int, int>> blocks;  // offset, dim per factor
  if (G.kind == GroupKind::Product) {
    int off = 0;
    for (const auto& f : G.factors) {
      blocks.push_back({off, f.dim});
      off += f.dim;
    }
  } else {
    blocks.push_back({0, G.dim});
  }
  Mat B(G.dim, H_basis.size());
  for (size_t i = 0; i < H_basis.size(); ++i) B.col(i) = H_basis[i].coords;

  std::vector<int> chosen;
  int covered = 0;
  for (size_t f = 0; f < blocks.size(); ++f) {
    const auto [off, d] = blocks[f];
    const double mass = B.middleRows(off, d).norm();
    if (mass > 1e-12) {
      chosen.push_back(static_cast<int>(f));
      covered += d;
    }
  }
  if (covered != static_cast<int>(H_basis.size()))
    throw PreconditionError(
        "horizontal symmetry subalgebra must span whole product factors of G");
  Eigen::ColPivHouseholderQR<Mat> qr(B);
  qr.setThreshold(1e-10);
  if (qr.rank() != static_cast<int>(H_basis.size()))
    throw PreconditionError("H_basis is rank deficient");
  return chosen;
}

}  // namespace

HorizontalSymmetryPhases horizontal_symmetry_phases(const ConfigurationSystem& sys,
                                                    const ConstraintData& cons,
                                                    const GaugeCurve& gauge, const Trajectory& traj,
                                                    const std::vector<AlgebraVector>& H_basis) {
  const auto& G = sys.group;
  if (H_basis.empty()) throw PreconditionError("empty horizontal symmetry basis");

  // Every h-generator must satisfy the constraints at all sampled states of
  // the physical motion.
  for (int i = 0; i < traj.n_nodes(); i += std::max(1, traj.n_nodes() / 64)) {
    const int j = gauge.node_to_fine(i);
    const GroupElement gc = mul(G, traj.g[i], gauge.g0[j]);
    const ConstraintRows rows = cons.rows(gauge.b[j]);
    const Mat M = rows.W * Ad_matrix(G, inverse(G, gc));
    for (const auto& hvec : H_basis)
      if ((M * hvec.coords).norm() > 1e-8 * (1.0 + hvec.coords.norm()))
        throw PreconditionError("subalgebra is not horizontal: a generator violates D");
  }

  HorizontalSymmetryPhases out;
  out.factor_indices = factor_blocks_of(G, H_basis);

  // Build the subgroup descriptor and the index map into G.
  std::vector<int> idx;
  if (G.kind == GroupKind::Product) {
    std::vector<LieGroupDescriptor> fs;
    int off = 0;
    for (size_t f = 0; f < G.factors.size(); ++f) {
      const int d = G.factors[f].dim;
      if (std::find(out.factor_indices.begin(), out.factor_indices.end(), static_cast<int>(f)) !=
          out.factor_indices.end()) {
        fs.push_back(G.factors[f]);
        for (int k = 0; k < d; ++k) idx.push_back(off + k);
      }
      off += d;
    }
    out.H = fs.size() == 1 ? fs[0] : LieGroupDescriptor::product(fs);
  } else {
    out.H = G;
    for (int k = 0; k < G.dim; ++k) idx.push_back(k);
  }
  const int hd = static_cast<int>(idx.size());

  auto restrict_vec = [&](const Vec& v) {
    Vec r(hd);
    for (int k = 0; k < hd; ++k) r(k) = v(idx[k]);
    return r;
  };
  auto h_component = [&](const GroupElement& g) {
    if (G.kind != GroupKind::Product) return g;
    if (out.factor_indices.size() == 1) return g.comps[out.factor_indices[0]];
    GroupElement r;
    r.kind = GroupKind::Product;
    for (int f : out.factor_indices) r.comps.push_back(g.comps[f]);
    return r;
  };

  // Conserved momentum i*_h J and its drift.
  out.mu_h = restrict_vec(traj.J_spatial[0]);
  for (int i = 0; i < traj.n_nodes(); ++i)
    out.conservation_drift =
        std::max(out.conservation_drift, (restrict_vec(traj.J_spatial[i]) - out.mu_h).norm());

  // Appendix reconstruction of the H-component on the H-coadjoint orbit.
  GroupCurve curve;
  curve.group = out.H;
  curve.t1 = traj.t1;
  curve.h = traj.h;
  curve.t_fine = traj.t_fine;
  curve.g_fine.reserve(traj.g_fine.size());
  curve.xi_fine.reserve(traj.xi_fine.size());
  for (size_t i = 0; i < traj.g_fine.size(); ++i) {
    curve.g_fine.push_back(h_component(traj.g_fine[i]));
    curve.xi_fine.push_back(restrict_vec(traj.xi_fine[i]));
  }
  const IsotropyProjector P = isotropy_projector(
      out.H, MomentumCovector(out.mu_h), Mat::Identity(hd, hd), out.mu_h.norm() == 0);
  out.decomposition = reconstruct_phases(curve, P);

  // Closed-base phase relation: c(t2) = (h_D g_G) . g_NH_eff . c(t1) with
  // g_NH_eff the holonomy of the effective gauge (e, g_nonH(t)) . d0(t).
  const Vec b1 = gauge.b.front(), b2 = gauge.b.back();
  if (sys.base_distance(b1, b2) <= 1e-8 * (1.0 + b1.norm())) {
    auto non_h_part = [&](const GroupElement& g) {
      if (G.kind != GroupKind::Product) return identity(G);
      GroupElement r = g;
      for (int f : out.factor_indices) r.comps[f] = identity(G.factors[f]);
      return r;
    };
    const int last = traj.n_nodes() - 1;
    const GroupElement eff_start = mul(G, non_h_part(traj.g[0]), gauge.g0.front());
    const GroupElement eff_end = mul(G, non_h_part(traj.g[last]), gauge.g0.back());
    out.g_NH_effective = mul(G, eff_end, inverse(G, eff_start));

    GroupElement rec = identity(G);
    const GroupElement hDgG =
        mul(out.H, out.decomposition.h_D[last], out.decomposition.g_G[last]);
    if (G.kind == GroupKind::Product) {
      for (size_t f = 0, hi = 0; f < G.factors.size(); ++f) {
        if (std::find(out.factor_indices.begin(), out.factor_indices.end(),
                      static_cast<int>(f)) != out.factor_indices.end()) {
          rec.comps[f] = out.factor_indices.size() == 1 ? hDgG : hDgG.comps[hi];
          ++hi;
        }
      }
    } else {
      rec = hDgG;
    }
    const GroupElement c_end = mul(G, traj.g[last], gauge.g0.back());
    const GroupElement c_start = mul(G, traj.g[0], gauge.g0.front());
    const GroupElement rhs = mul(G, rec, mul(G, out.g_NH_effective, c_start));
    out.phase_relation_residual = group_distance(G, c_end, rhs);
  }
  return out;
}

DipolePhases dipole_phase_pipeline(const ConfigurationSystem& sys, const BaseCurve& base,
                                   const std::function<Eigen::Vector3d(double)>& B_field,
                                   double gamma_gyro, const MomentumCovector& L0,
                                   const BundleState& q0, const Grid& grid) {
  const auto& G = sys.group;
  if (G.kind != GroupKind::SO3)
    throw std::invalid_argument("dipole pipeline requires G = SO(3)");
  if (L0.coords.norm() == 0)
    throw PreconditionError("degenerate orbit: L0 = 0 makes the phases undefined");

  DipolePhases out;
  out.gauge = lift_mechanical(sys, base, q0, grid);
  const GaugeCurve& gauge = out.gauge;
  const int nf = gauge.n_fine();
  const int n_nodes = gauge.n_nodes();

  // Larmor frame h_M' h_M^{-1} = hat(omega_l), omega_l = -gamma B(t).
  std::vector<GroupElement> hM_fine(nf);
  hM_fine[0] = identity(G);
  auto omega_l = [&](double t) { return Vec(-gamma_gyro * B_field(t)); };
  for (int j = 0; j + 1 < nf; ++j)
    hM_fine[j + 1] = rkmk4_step_right(G, hM_fine[j], gauge.t[j], gauge.fine_h, omega_l);

  // I0 along the mechanical gauge.
  std::vector<Mat> I0(nf), I0inv(nf);
  for (int j = 0; j < nf; ++j) {
    I0[j] = locked_inertia(sys, gauge.state(j));
    I0inv[j] = I0[j].ldlt().solve(Mat::Identity(G.dim, G.dim));
  }

  // Direct simulation of the affine momentum constraint
  //   coAd(g, I0 xi) = coAd(h_M, L0)  =>  xi = I0^{-1} coAd(g^{-1} h_M, L0).
  auto xi_of = [&](int j, const GroupElement& g) {
    const GroupElement rel = mul(G, inverse(G, g), hM_fine[j]);
    return (I0inv[j] * (Ad_matrix(G, inverse(G, rel)).transpose() * L0.coords)).eval();
  };

  Trajectory traj;
  traj.group = G;
  traj.t1 = gauge.t1;
  traj.h = gauge.h;
  traj.t.resize(n_nodes);
  traj.g.resize(n_nodes);
  traj.xi.resize(n_nodes);
  traj.lambda.assign(n_nodes, Vec());
  traj.t_fine = gauge.t;
  traj.g_fine.resize(nf);
  traj.xi_fine.resize(nf);

  GroupElement g = identity(G);
  for (int i = 0;; ++i) {
    const int j = 2 * i;
    traj.t[i] = gauge.t1 + i * gauge.h;
    traj.g[i] = g;
    traj.xi[i] = xi_of(j, g);
    if (i == n_nodes - 1) break;
    const double h = gauge.h;
    auto f = [&](int idx, const GroupElement& gg) { return xi_of(idx, gg); };
    const Vec a1 = f(j, g);
    const GroupElement g2 = mul(G, g, exp(G, AlgebraVector((0.5 * h * a1).eval())));
    const Vec a2 = dexpinv(G, 0.5 * h * a1, f(j + 1, g2));
    const GroupElement g3 = mul(G, g, exp(G, AlgebraVector((0.5 * h * a2).eval())));
    const Vec a3 = dexpinv(G, 0.5 * h * a2, f(j + 1, g3));
    const GroupElement g4 = mul(G, g, exp(G, AlgebraVector((h * a3).eval())));
    const Vec a4 = dexpinv(G, h * a3, f(j + 2, g4));
    g = mul(G, g, exp(G, AlgebraVector(((h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)).eval())));
  }
  for (int i = 0; i < n_nodes; ++i) {
    const int j = 2 * i;
    traj.g_fine[j] = traj.g[i];
    traj.xi_fine[j] = traj.xi[i];
    if (i + 1 < n_nodes) {
      const Vec d = log(G, mul(G, inverse(G, traj.g[i]), traj.g[i + 1])).coords;
      const Vec v1 = dexpinv(G, d, traj.xi[i + 1]);
      const Vec u = 0.5 * d + (gauge.h / 8.0) * (traj.xi[i] - v1);
      traj.g_fine[j + 1] = mul(G, traj.g[i], exp(G, AlgebraVector(u)));
      traj.xi_fine[j + 1] = xi_of(j + 1, traj.g_fine[j + 1]);
    }
  }

  // Trajectory bookkeeping columns.
  traj.Pi.resize(n_nodes);
  traj.J_spatial.resize(n_nodes);
  traj.frame.assign(n_nodes, Mat::Zero(G.dim, 0));
  traj.E.resize(n_nodes);
  traj.K.resize(n_nodes);
  traj.res_constraint.assign(n_nodes, 0.0);
  traj.res_momentum.assign(n_nodes, 0.0);
  out.h_M.resize(n_nodes);
  out.Pi.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const int j = 2 * i;
    traj.Pi[i] = I0[j] * traj.xi[i];
    traj.J_spatial[i] = Ad_matrix(G, inverse(G, traj.g[i])).transpose() * traj.Pi[i];
    const KineticSplit ks = kinetic_energy_gauge_split(
        sys, gauge.state(j), gauge.bdot[j], AlgebraVector(gauge.eta0[j]), AlgebraVector(traj.xi[i]));
    traj.K[i] = ks.total;
    traj.E[i] = -ks.total;  // mechanical gauge: J0 = 0
    out.h_M[i] = hM_fine[j];
    out.Pi[i] = traj.Pi[i];
    const GroupElement RM = mul(G, inverse(G, hM_fine[j]), traj.g[i]);
    const double drift =
        (Ad_matrix(G, inverse(G, RM)).transpose() * traj.Pi[i] - L0.coords).norm();
    out.conservation_drift = std::max(out.conservation_drift, drift);
    traj.res_constraint[i] = drift;
  }

  // Reconstruction of R_M = h_M^{-1} g on the orbit of L0.
  GroupCurve rm;
  rm.group = G;
  rm.t1 = gauge.t1;
  rm.h = gauge.h;
  rm.t_fine = gauge.t;
  rm.g_fine.resize(nf);
  rm.xi_fine.resize(nf);
  for (int j = 0; j < nf; ++j) {
    rm.g_fine[j] = mul(G, inverse(G, hM_fine[j]), traj.g_fine[j]);
    // R_M' R_M^{-1} = Ad_{h_M^{-1}}(g' g^{-1} - omega_l); store body form.
    const Vec spatial = Ad_matrix(G, inverse(G, hM_fine[j])) *
                        (Ad_matrix(G, traj.g_fine[j]) * traj.xi_fine[j] - omega_l(gauge.t[j]));
    rm.xi_fine[j] = Ad_matrix(G, inverse(G, rm.g_fine[j])) * spatial;
  }
  const IsotropyProjector P =
      isotropy_projector(G, L0, Mat::Identity(G.dim, G.dim));
  out.decomposition = reconstruct_phases(rm, P);

  // Dynamic phase in the energy/magnetic-potential form.
  std::vector<double> rate(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const int j = 2 * i;
    const double magnetic = traj.J_spatial[i].dot(omega_l(traj.t[i]));
    rate[i] = (traj.Pi[i].dot(I0inv[j] * traj.Pi[i]) - magnetic) / L0.coords.norm();
  }
  double th = 0;
  for (int i = 1; i < n_nodes; ++i) th += 0.5 * gauge.h * (rate[i - 1] + rate[i]);
  out.theta_dyn_integral = th;

  // Pi loop and the endpoint phase formula.
  std::vector<Eigen::Vector3d> loop(n_nodes);
  for (int i = 0; i < n_nodes; ++i) loop[i] = out.Pi[i].head<3>();
  out.loop_gap = (loop.back() - loop.front()).norm();
  if (out.loop_gap <= 1e-6 * L0.coords.norm()) {
    std::vector<Eigen::Vector3d> closed = loop;
    closed.back() = closed.front();
    out.solid_angle_value = solid_angle(closed);
  }
  const Eigen::Vector3d mu_hat = L0.coords.head<3>().normalized();
  const GroupElement formula = mul(
      G, out.h_M.back(),
      mul(G,
          exp(G, AlgebraVector((out.decomposition.theta_dyn.back() * mu_hat).eval())),
          exp(G, AlgebraVector((out.decomposition.theta_geom * mu_hat).eval()))));
  out.phase_formula_residual = group_distance(G, traj.g.back(), formula);
  out.traj = std::move(traj);
  return out;
}

void write_phase_report_json(const PhaseReport& rep, const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& header) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : header) j["header"][k] = v;
  j["mu"] = std::vector<double>(rep.mu.data(), rep.mu.data() + rep.mu.size());
  j["theta_dyn"] = rep.theta_dyn;
  j["theta_geom"] = rep.theta_geom;
  j["solid_angle"] = rep.solid_angle;
  j["g_NH"] = std::vector<double>(rep.g_NH.data(), rep.g_NH.data() + rep.g_NH.size());
  j["g_MP"] = std::vector<double>(rep.g_MP.data(), rep.g_MP.data() + rep.g_MP.size());
  j["factor_residual_max"] = rep.factor_residual_max;
  for (const auto& [k, v] : rep.extras) j["extras"][k] = v;
  std::ofstream f(path);
  if (!f) throw GeophaseError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

}  // namespace geophase
