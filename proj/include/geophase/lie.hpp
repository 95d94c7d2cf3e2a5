#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace geophase {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Lie group/algebra kernel for SO(3), abelian R^p x T^q and finite direct
// products of those.  Algebra and coalgebra elements are coordinate vectors
// in a fixed ordered basis; product groups flatten basis indices in
// declaration order.

enum class GroupKind { SO3, Abelian, Product };

struct LieGroupDescriptor {
  GroupKind kind = GroupKind::Abelian;
  int dim = 0;
  int abelian_free = 0;   // p
  int abelian_torus = 0;  // q
  std::vector<LieGroupDescriptor> factors;
  std::vector<std::string> basis_labels;

  static LieGroupDescriptor so3();
  static LieGroupDescriptor abelian(int p, int q);
  static LieGroupDescriptor product(std::vector<LieGroupDescriptor> fs);

  // C^k_{ij}; antisymmetric in (i,j) and satisfying Jacobi.
  // structure_constant(i,j,k) = coefficient of e_k in [e_i, e_j].
  double structure_constant(int i, int j, int k) const;
  bool is_abelian() const;
};

struct AlgebraVector {
  Vec coords;
  AlgebraVector() = default;
  explicit AlgebraVector(Vec c) : coords(std::move(c)) {}
  static AlgebraVector zero(const LieGroupDescriptor& G);
};

struct MomentumCovector {
  Vec coords;
  MomentumCovector() = default;
  explicit MomentumCovector(Vec c) : coords(std::move(c)) {}
  static MomentumCovector zero(const LieGroupDescriptor& G);
};

// SO3 elements are unit quaternions (w,x,y,z), renormalized after every
// multiplication; torus coordinates are kept in [0, 2*pi).
struct GroupElement {
  GroupKind kind = GroupKind::Abelian;
  Eigen::Vector4d quat{1, 0, 0, 0};
  Vec coords;
  std::vector<GroupElement> comps;
};

GroupElement identity(const LieGroupDescriptor& G);
GroupElement mul(const LieGroupDescriptor& G, const GroupElement& a, const GroupElement& b);
GroupElement inverse(const LieGroupDescriptor& G, const GroupElement& g);

AlgebraVector bracket(const LieGroupDescriptor& G, const AlgebraVector& X, const AlgebraVector& Y);
GroupElement exp(const LieGroupDescriptor& G, const AlgebraVector& X);
// Inverse of exp on the identity component; SO(3) branch with angle in [0, pi].
AlgebraVector log(const LieGroupDescriptor& G, const GroupElement& g);

// Matrix of ad_X on algebra coordinates: (ad_X)Y = [X, Y].
Mat ad_matrix(const LieGroupDescriptor& G, const AlgebraVector& X);
// Matrix of Ad_g on algebra coordinates.
Mat Ad_matrix(const LieGroupDescriptor& G, const GroupElement& g);

AlgebraVector Ad(const LieGroupDescriptor& G, const GroupElement& g, const AlgebraVector& X);
// Ad*_g = (Ad_{g^-1})^t, the left coadjoint action.
MomentumCovector coAd(const LieGroupDescriptor& G, const GroupElement& g, const MomentumCovector& mu);
// ad*_X = -(ad_X)^t:  <coad(X,mu), Y> = -<mu, [X,Y]>.
MomentumCovector coad(const LieGroupDescriptor& G, const AlgebraVector& X, const MomentumCovector& mu);

// Distance between group elements measured through the flat serialization;
// zero iff equal (up to quaternion double cover).
double group_distance(const LieGroupDescriptor& G, const GroupElement& a, const GroupElement& b);

// Serialization: SO3 as quaternion (w,x,y,z) with w >= 0, abelian as raw
// coordinates, product as concatenation.  Used verbatim in CSV/JSON outputs.
Vec serialize(const LieGroupDescriptor& G, const GroupElement& g);
GroupElement deserialize(const LieGroupDescriptor& G, const Vec& data);
int serialized_size(const LieGroupDescriptor& G);

// so(3) <-> R^3 isomorphism (hat / vee) and quaternion <-> rotation matrix.
Eigen::Matrix3d hat(const Eigen::Vector3d& v);
Eigen::Vector3d vee(const Eigen::Matrix3d& m);
Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& quat);
Eigen::Vector4d quat_from_rotation(const Eigen::Matrix3d& R);

// Rotation angle of g about a fixed unit axis, in (-pi, pi].  Meaningful when
// g is (close to) a rotation about that axis; computed from the matrix.
double rotation_angle_about(const Eigen::Matrix3d& R, const Eigen::Vector3d& axis);

}  // namespace geophase
