#include "geophase/lie.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geophase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_torus(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // guard against fmod rounding up
  return r;
}

Eigen::Vector4d quat_mul(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  Eigen::Vector4d q;
  q(0) = a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
  q(1) = a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2);
  q(2) = a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1);
  q(3) = a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0);
  return q.normalized();
}

void check_dim(const LieGroupDescriptor& G, const Vec& v, const char* what) {
  if (v.size() != G.dim)
    throw std::invalid_argument(std::string(what) + ": coordinate length " +
                                std::to_string(v.size()) + " does not match group dimension " +
                                std::to_string(G.dim));
}

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite coordinates");
}

}  // namespace

LieGroupDescriptor LieGroupDescriptor::so3() {
  LieGroupDescriptor G;
  G.kind = GroupKind::SO3;
  G.dim = 3;
  G.basis_labels = {"wx", "wy", "wz"};
  return G;
}

LieGroupDescriptor LieGroupDescriptor::abelian(int p, int q) {
  if (p < 0 || q < 0 || p + q == 0) throw std::invalid_argument("abelian descriptor needs p+q >= 1");
  LieGroupDescriptor G;
  G.kind = GroupKind::Abelian;
  G.dim = p + q;
  G.abelian_free = p;
  G.abelian_torus = q;
  for (int i = 0; i < p; ++i) G.basis_labels.push_back("v" + std::to_string(i));
  for (int i = 0; i < q; ++i) G.basis_labels.push_back("phi" + std::to_string(i));
  return G;
}

LieGroupDescriptor LieGroupDescriptor::product(std::vector<LieGroupDescriptor> fs) {
  if (fs.empty()) throw std::invalid_argument("product descriptor needs at least one factor");
  LieGroupDescriptor G;
  G.kind = GroupKind::Product;
  G.factors = std::move(fs);
  G.dim = 0;
  for (size_t f = 0; f < G.factors.size(); ++f) {
    for (const auto& l : G.factors[f].basis_labels)
      G.basis_labels.push_back("f" + std::to_string(f) + "." + l);
    G.dim += G.factors[f].dim;
  }
  return G;
}

double LieGroupDescriptor::structure_constant(int i, int j, int k) const {
  switch (kind) {
    case GroupKind::Abelian:
      return 0.0;
    case GroupKind::SO3: {
      // C^k_{ij} = epsilon_{ijk}
      if (i == j || j == k || i == k) return 0.0;
      return j == (i + 1) % 3 ? 1.0 : -1.0;
    }
    case GroupKind::Product: {
      int off = 0;
      for (const auto& f : factors) {
        const int d = f.dim;
        const bool in_i = i >= off && i < off + d;
        const bool in_j = j >= off && j < off + d;
        const bool in_k = k >= off && k < off + d;
        if (in_i || in_j || in_k) {
          if (in_i && in_j && in_k) return f.structure_constant(i - off, j - off, k - off);
          return 0.0;
        }
        off += d;
      }
      return 0.0;
    }
  }
  return 0.0;
}

bool LieGroupDescriptor::is_abelian() const {
  if (kind == GroupKind::Abelian) return true;
  if (kind == GroupKind::SO3) return false;
  for (const auto& f : factors)
    if (!f.is_abelian()) return false;
  return true;
}

AlgebraVector AlgebraVector::zero(const LieGroupDescriptor& G) {
  return AlgebraVector(Vec::Zero(G.dim));
}

MomentumCovector MomentumCovector::zero(const LieGroupDescriptor& G) {
  return MomentumCovector(Vec::Zero(G.dim));
}

GroupElement identity(const LieGroupDescriptor& G) {
  GroupElement g;
  g.kind = G.kind;
  switch (G.kind) {
    case GroupKind::SO3:
      g.quat = Eigen::Vector4d(1, 0, 0, 0);
      break;
    case GroupKind::Abelian:
      g.coords = Vec::Zero(G.dim);
      break;
    case GroupKind::Product:
      for (const auto& f : G.factors) g.comps.push_back(identity(f));
      break;
  }
  return g;
}

GroupElement mul(const LieGroupDescriptor& G, const GroupElement& a, const GroupElement& b) {
  GroupElement g;
  g.kind = G.kind;
  switch (G.kind) {
    case GroupKind::SO3:
      g.quat = quat_mul(a.quat, b.quat);
      break;
    case GroupKind::Abelian: {
      g.coords = a.coords + b.coords;
      for (int i = G.abelian_free; i < G.dim; ++i) g.coords(i) = reduce_torus(g.coords(i));
      break;
    }
    case GroupKind::Product:
      for (size_t f = 0; f < G.factors.size(); ++f)
        g.comps.push_back(mul(G.factors[f], a.comps[f], b.comps[f]));
      break;
  }
  return g;
}

GroupElement inverse(const LieGroupDescriptor& G, const GroupElement& g) {
  GroupElement r;
  r.kind = G.kind;
  switch (G.kind) {
    case GroupKind::SO3:
      r.quat = Eigen::Vector4d(g.quat(0), -g.quat(1), -g.quat(2), -g.quat(3));
      break;
    case GroupKind::Abelian: {
      r.coords = -g.coords;
      for (int i = G.abelian_free; i < G.dim; ++i) r.coords(i) = reduce_torus(r.coords(i));
      break;
    }
    case GroupKind::Product:
      for (size_t f = 0; f < G.factors.size(); ++f) r.comps.push_back(inverse(G.factors[f], g.comps[f]));
      break;
  }
  return r;
}

AlgebraVector bracket(const LieGroupDescriptor& G, const AlgebraVector& X, const AlgebraVector& Y) {
  check_dim(G, X.coords, "bracket X");
  check_dim(G, Y.coords, "bracket Y");
  switch (G.kind) {
    case GroupKind::Abelian:
      return AlgebraVector::zero(G);
    case GroupKind::SO3: {
      Eigen::Vector3d x = X.coords.head<3>(), y = Y.coords.head<3>();
      return AlgebraVector(x.cross(y));
    }
    case GroupKind::Product: {
      Vec out(G.dim);
      int off = 0;
      for (const auto& f : G.factors) {
        out.segment(off, f.dim) =
            bracket(f, AlgebraVector(X.coords.segment(off, f.dim)),
                    AlgebraVector(Y.coords.segment(off, f.dim)))
                .coords;
        off += f.dim;
      }
      return AlgebraVector(out);
    }
  }
  return AlgebraVector::zero(G);
}

GroupElement exp(const LieGroupDescriptor& G, const AlgebraVector& X) {
  check_dim(G, X.coords, "exp");
  check_finite(X.coords, "exp");
  GroupElement g;
  g.kind = G.kind;
  switch (G.kind) {
    case GroupKind::SO3: {
      const Eigen::Vector3d v = X.coords.head<3>();
      const double th = v.norm();
      double s;  // sin(th/2)/th
      if (th < 1e-8) {
        s = 0.5 - th * th / 48.0;
      } else {
        s = std::sin(0.5 * th) / th;
      }
      g.quat << std::cos(0.5 * th), s * v(0), s * v(1), s * v(2);
      g.quat.normalize();
      break;
    }
    case GroupKind::Abelian: {
      g.coords = X.coords;
      for (int i = G.abelian_free; i < G.dim; ++i) g.coords(i) = reduce_torus(g.coords(i));
      break;
    }
    case GroupKind::Product: {
      int off = 0;
      for (const auto& f : G.factors) {
        g.comps.push_back(exp(f, AlgebraVector(X.coords.segment(off, f.dim))));
        off += f.dim;
      }
      break;
    }
  }
  return g;
}

AlgebraVector log(const LieGroupDescriptor& G, const GroupElement& g) {
  switch (G.kind) {
    case GroupKind::SO3: {
      Eigen::Vector4d q = g.quat;
      if (q(0) < 0) q = -q;  // principal branch
      const double vn = q.tail<3>().norm();
      const double th = 2.0 * std::atan2(vn, q(0));
      Vec out(3);
      if (vn < 1e-12) {
        out = 2.0 * q.tail<3>();  // th/sin(th/2) -> 2
      } else {
        out = (th / vn) * q.tail<3>();
      }
      return AlgebraVector(out);
    }
    case GroupKind::Abelian:
      return AlgebraVector(g.coords);
    case GroupKind::Product: {
      Vec out(G.dim);
      int off = 0;
      for (size_t f = 0; f < G.factors.size(); ++f) {
        out.segment(off, G.factors[f].dim) = log(G.factors[f], g.comps[f]).coords;
        off += G.factors[f].dim;
      }
      return AlgebraVector(out);
    }
  }
  return AlgebraVector::zero(G);
}

Mat ad_matrix(const LieGroupDescriptor& G, const AlgebraVector& X) {
  check_dim(G, X.coords, "ad_matrix");
  switch (G.kind) {
    case GroupKind::Abelian:
      return Mat::Zero(G.dim, G.dim);
    case GroupKind::SO3:
      return hat(X.coords.head<3>());
    case GroupKind::Product: {
      Mat out = Mat::Zero(G.dim, G.dim);
      int off = 0;
      for (const auto& f : G.factors) {
        out.block(off, off, f.dim, f.dim) = ad_matrix(f, AlgebraVector(X.coords.segment(off, f.dim)));
        off += f.dim;
      }
      return out;
    }
  }
  return Mat::Zero(G.dim, G.dim);
}

Mat Ad_matrix(const LieGroupDescriptor& G, const GroupElement& g) {
  switch (G.kind) {
    case GroupKind::SO3:
      return rotation_matrix(g.quat);
    case GroupKind::Abelian:
      return Mat::Identity(G.dim, G.dim);
    case GroupKind::Product: {
      Mat out = Mat::Zero(G.dim, G.dim);
      int off = 0;
      for (size_t f = 0; f < G.factors.size(); ++f) {
        out.block(off, off, G.factors[f].dim, G.factors[f].dim) = Ad_matrix(G.factors[f], g.comps[f]);
        off += G.factors[f].dim;
      }
      return out;
    }
  }
  return Mat::Identity(G.dim, G.dim);
}

AlgebraVector Ad(const LieGroupDescriptor& G, const GroupElement& g, const AlgebraVector& X) {
  check_dim(G, X.coords, "Ad");
  return AlgebraVector(Ad_matrix(G, g) * X.coords);
}

MomentumCovector coAd(const LieGroupDescriptor& G, const GroupElement& g, const MomentumCovector& mu) {
  check_dim(G, mu.coords, "coAd");
  return MomentumCovector(Ad_matrix(G, inverse(G, g)).transpose() * mu.coords);
}

MomentumCovector coad(const LieGroupDescriptor& G, const AlgebraVector& X, const MomentumCovector& mu) {
  check_dim(G, X.coords, "coad X");
  check_dim(G, mu.coords, "coad mu");
  return MomentumCovector(-ad_matrix(G, X).transpose() * mu.coords);
}

double group_distance(const LieGroupDescriptor& G, const GroupElement& a, const GroupElement& b) {
  switch (G.kind) {
    case GroupKind::SO3: {
      const Eigen::Vector4d d1 = a.quat - b.quat, d2 = a.quat + b.quat;
      return std::min(d1.norm(), d2.norm());
    }
    case GroupKind::Abelian: {
      double s = 0;
      for (int i = 0; i < G.dim; ++i) {
        double d = a.coords(i) - b.coords(i);
        if (i >= G.abelian_free) {
          d = std::fabs(reduce_torus(d));
          d = std::min(d, kTwoPi - d);
        }
        s += d * d;
      }
      return std::sqrt(s);
    }
    case GroupKind::Product: {
      double s = 0;
      for (size_t f = 0; f < G.factors.size(); ++f) {
        const double d = group_distance(G.factors[f], a.comps[f], b.comps[f]);
        s += d * d;
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

Vec serialize(const LieGroupDescriptor& G, const GroupElement& g) {
  switch (G.kind) {
    case GroupKind::SO3: {
      Eigen::Vector4d q = g.quat;
      if (q(0) < 0) q = -q;
      return q;
    }
    case GroupKind::Abelian:
      return g.coords;
    case GroupKind::Product: {
      Vec out(serialized_size(G));
      int off = 0;
      for (size_t f = 0; f < G.factors.size(); ++f) {
        const Vec s = serialize(G.factors[f], g.comps[f]);
        out.segment(off, s.size()) = s;
        off += static_cast<int>(s.size());
      }
      return out;
    }
  }
  return Vec();
}

GroupElement deserialize(const LieGroupDescriptor& G, const Vec& data) {
  if (data.size() != serialized_size(G))
    throw std::invalid_argument("deserialize: wrong data length for group");
  GroupElement g;
  g.kind = G.kind;
  switch (G.kind) {
    case GroupKind::SO3:
      g.quat = data.head<4>().normalized();
      if (g.quat(0) < 0) g.quat = -g.quat;
      break;
    case GroupKind::Abelian:
      g.coords = data;
      for (int i = G.abelian_free; i < G.dim; ++i) g.coords(i) = reduce_torus(g.coords(i));
      break;
    case GroupKind::Product: {
      int off = 0;
      for (const auto& f : G.factors) {
        const int n = serialized_size(f);
        g.comps.push_back(deserialize(f, data.segment(off, n)));
        off += n;
      }
      break;
    }
  }
  return g;
}

int serialized_size(const LieGroupDescriptor& G) {
  switch (G.kind) {
    case GroupKind::SO3:
      return 4;
    case GroupKind::Abelian:
      return G.dim;
    case GroupKind::Product: {
      int n = 0;
      for (const auto& f : G.factors) n += serialized_size(f);
      return n;
    }
  }
  return 0;
}

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return Eigen::Vector3d(m(2, 1), m(0, 2), m(1, 0));
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& q) {
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Eigen::Vector4d quat_from_rotation(const Eigen::Matrix3d& R) {
  Eigen::Vector4d q;
  const double tr = R.trace();
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    q << 0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2;
    q << (R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2;
    q << (R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2;
    q << (R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s;
  }
  return q.normalized();
}

double rotation_angle_about(const Eigen::Matrix3d& R, const Eigen::Vector3d& axis) {
  const Eigen::Vector3d u = axis.normalized();
  const Eigen::Vector3d s = vee(0.5 * (R - R.transpose()));
  const double sin_th = u.dot(s);
  const double cos_th = 0.5 * (R.trace() - 1.0);
  return std::atan2(sin_th, cos_th);
}

}  // namespace geophase
