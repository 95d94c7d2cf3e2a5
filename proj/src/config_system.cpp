#include "geophase/config_system.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace geophase {

namespace {

void require_spd(const Mat& M, double tol, const std::string& what) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(what + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument(what + " is not positive definite");
}

}  // namespace

void validate_metric(const ConfigurationSystem& sys, const std::vector<Vec>& sample_points,
                     double tol) {
  const int n = sys.base_dim, m = sys.group.dim;
  for (const auto& b : sample_points) {
    const MetricBlocks k = sys.metric(b);
    if (k.k_BB.rows() != n || k.k_BB.cols() != n || k.k_Bg.rows() != n || k.k_Bg.cols() != m ||
        k.k_gg.rows() != m || k.k_gg.cols() != m)
      throw std::invalid_argument("metric block dimensions do not match system");
    if (n > 0) require_spd(k.k_BB, tol, "k_BB(" + sys.name + ")");
    require_spd(k.k_gg, tol, "k_gg(" + sys.name + ")");
    Mat full(n + m, n + m);
    full.topLeftCorner(n, n) = k.k_BB;
    full.topRightCorner(n, m) = k.k_Bg;
    full.bottomLeftCorner(m, n) = k.k_Bg.transpose();
    full.bottomRightCorner(m, m) = k.k_gg;
    require_spd(full, tol, "block metric(" + sys.name + ")");
  }
}

BaseCurve BaseCurve::analytic(std::function<Vec(double)> pos, std::function<Vec(double)> vel) {
  BaseCurve c;
  c.pos_ = std::move(pos);
  c.vel_ = std::move(vel);
  return c;
}

BaseCurve BaseCurve::from_position(std::function<Vec(double)> pos) {
  BaseCurve c;
  c.pos_ = pos;
  c.vel_ = [pos](double t) {
    const double h = 1e-6;
    return ((pos(t + h) - pos(t - h)) / (2 * h)).eval();
  };
  return c;
}

BaseCurve BaseCurve::from_samples(const std::vector<double>& t, const std::vector<Vec>& b) {
  if (t.size() != b.size() || t.size() < 2)
    throw std::invalid_argument("sample table needs >= 2 rows with matching lengths");
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] <= t[i - 1]) throw std::invalid_argument("sample times must be strictly increasing");

  // Finite-difference slopes, one-sided at the ends.
  const size_t n = t.size();
  std::vector<Vec> m(n);
  m[0] = (b[1] - b[0]) / (t[1] - t[0]);
  m[n - 1] = (b[n - 1] - b[n - 2]) / (t[n - 1] - t[n - 2]);
  for (size_t i = 1; i + 1 < n; ++i) m[i] = (b[i + 1] - b[i - 1]) / (t[i + 1] - t[i - 1]);

  auto locate = [t](double x) {
    size_t lo = 0, hi = t.size() - 1;
    if (x <= t.front()) return size_t(0);
    if (x >= t.back()) return t.size() - 2;
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      (t[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  };

  BaseCurve c;
  c.pos_ = [t, b, m, locate](double x) {
    const size_t i = locate(x);
    const double h = t[i + 1] - t[i], s = (x - t[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return (h00 * b[i] + h10 * h * m[i] + h01 * b[i + 1] + h11 * h * m[i + 1]).eval();
  };
  c.vel_ = [t, b, m, locate](double x) {
    const size_t i = locate(x);
    const double h = t[i + 1] - t[i], s = (x - t[i]) / h;
    const double d00 = 6 * s * (s - 1) / h, d10 = (1 - s) * (1 - 3 * s);
    const double d01 = -6 * s * (s - 1) / h, d11 = s * (3 * s - 2);
    return (d00 * b[i] + d10 * m[i] + d01 * b[i + 1] + d11 * m[i + 1]).eval();
  };
  return c;
}

MomentumCovector momentum(const ConfigurationSystem& sys, const BundleState& state, const Vec& bdot,
                          const AlgebraVector& eta) {
  if (bdot.size() != sys.base_dim || eta.coords.size() != sys.group.dim)
    throw std::invalid_argument("momentum: velocity dimensions do not match system");
  const MetricBlocks k = sys.metric(state.b);
  Vec body = k.k_gg * eta.coords;
  if (sys.base_dim > 0) body += k.k_Bg.transpose() * bdot;
  return coAd(sys.group, state.g, MomentumCovector(body));
}

Mat locked_inertia(const ConfigurationSystem& sys, const BundleState& state) {
  const MetricBlocks k = sys.metric(state.b);
  const Mat Adg_inv = Ad_matrix(sys.group, inverse(sys.group, state.g));
  return Adg_inv.transpose() * k.k_gg * Adg_inv;
}

Mat restricted_inertia(const ConfigurationSystem& sys, const BundleState& state,
                       const std::vector<AlgebraVector>& subspace_basis) {
  if (subspace_basis.empty()) throw std::invalid_argument("restricted_inertia: empty basis");
  Mat U(sys.group.dim, subspace_basis.size());
  for (size_t i = 0; i < subspace_basis.size(); ++i) U.col(i) = subspace_basis[i].coords;
  Eigen::ColPivHouseholderQR<Mat> qr(U);
  qr.setThreshold(1e-10);
  if (qr.rank() < U.cols())
    throw std::invalid_argument("restricted_inertia: basis is rank deficient");
  return U.transpose() * locked_inertia(sys, state) * U;
}

KineticSplit kinetic_energy(const ConfigurationSystem& sys, const BundleState& state, const Vec& bdot,
                            const AlgebraVector& eta) {
  const MetricBlocks k = sys.metric(state.b);
  KineticSplit out;
  out.internal = sys.base_dim > 0 ? 0.5 * bdot.dot(k.k_BB * bdot) : 0.0;
  out.vertical = 0.5 * eta.coords.dot(k.k_gg * eta.coords);
  out.coupling = sys.base_dim > 0 ? bdot.dot(k.k_Bg * eta.coords) : 0.0;
  out.total = out.internal + out.vertical + out.coupling;
  return out;
}

KineticSplit kinetic_energy_gauge_split(const ConfigurationSystem& sys, const BundleState& d0,
                                        const Vec& bdot, const AlgebraVector& eta0,
                                        const AlgebraVector& xi) {
  const MetricBlocks k = sys.metric(d0.b);
  KineticSplit out;
  double kint = 0.5 * eta0.coords.dot(k.k_gg * eta0.coords);
  if (sys.base_dim > 0)
    kint += 0.5 * bdot.dot(k.k_BB * bdot) + bdot.dot(k.k_Bg * eta0.coords);
  out.internal = kint;

  const Mat I0 = locked_inertia(sys, d0);
  Vec body = k.k_gg * eta0.coords;
  if (sys.base_dim > 0) body += k.k_Bg.transpose() * bdot;
  const Vec J0 = Ad_matrix(sys.group, inverse(sys.group, d0.g)).transpose() * body;

  out.vertical = 0.5 * xi.coords.dot(I0 * xi.coords);
  out.coupling = J0.dot(xi.coords);
  out.total = out.internal + out.vertical + out.coupling;
  return out;
}

}  // namespace geophase
