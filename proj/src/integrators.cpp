#include "geophase/integrators.hpp"

#include <stdexcept>

namespace geophase {

Vec dexpinv(const LieGroupDescriptor& G, const Vec& u, const Vec& a) {
  // Inverse of the left-trivialized differential of exp: for g(t) = g0 exp(u)
  // with g' = g xi-hat, u' = u/(1 - e^{-ad_u}) applied to xi, i.e.
  // a + [u,a]/2 + [u,[u,a]]/12 + O(u^4).
  if (G.is_abelian()) return a;
  const Vec c1 = bracket(G, AlgebraVector(u), AlgebraVector(a)).coords;
  const Vec c2 = bracket(G, AlgebraVector(u), AlgebraVector(c1)).coords;
  return a + 0.5 * c1 + c2 / 12.0;
}

GroupElement rkmk4_step_left(const LieGroupDescriptor& G, const GroupElement& g, double t, double h,
                             const std::function<Vec(double, const GroupElement&)>& f) {
  auto at = [&](const Vec& u) { return mul(G, g, exp(G, AlgebraVector(u))); };
  const Vec k1 = f(t, g);
  const Vec u2 = 0.5 * h * k1;
  const Vec k2 = dexpinv(G, u2, f(t + 0.5 * h, at(u2)));
  const Vec u3 = 0.5 * h * k2;
  const Vec k3 = dexpinv(G, u3, f(t + 0.5 * h, at(u3)));
  const Vec u4 = h * k3;
  const Vec k4 = dexpinv(G, u4, f(t + h, at(u4)));
  const Vec u = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  return at(u);
}

GroupElement rkmk4_step_right(const LieGroupDescriptor& G, const GroupElement& h, double t,
                              double hstep, const std::function<Vec(double)>& omega) {
  const GroupElement y = inverse(G, h);
  const GroupElement y1 = rkmk4_step_left(
      G, y, t, hstep, [&](double s, const GroupElement&) { return (-omega(s)).eval(); });
  return inverse(G, y1);
}

std::vector<double> simpson_weights(int n, double h) {
  if (n < 2) throw std::invalid_argument("simpson_weights: need at least 2 samples");
  std::vector<double> w(n, 0.0);
  int last = n - 1;
  bool trapezoid_tail = false;
  if ((n - 1) % 2 != 0) {  // odd interval count: Simpson up to n-2, trapezoid on the last
    last = n - 2;
    trapezoid_tail = true;
  }
  if (last >= 2) {
    w[0] += h / 3.0;
    w[last] += h / 3.0;
    for (int i = 1; i < last; ++i) w[i] += (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  } else if (last == 1) {
    w[0] += h / 2.0;
    w[1] += h / 2.0;
  }
  if (trapezoid_tail) {
    w[n - 2] += h / 2.0;
    w[n - 1] += h / 2.0;
  }
  return w;
}

namespace {
template <typename T>
T stencil_impl(const std::vector<T>& v, int i, double h) {
  const int n = static_cast<int>(v.size());
  if (n < 5) throw std::invalid_argument("stencil_derivative: need at least 5 samples");
  auto c = [&](int j) -> const T& { return v[j]; };
  if (i >= 2 && i <= n - 3)
    return (c(i - 2) - 8.0 * c(i - 1) + 8.0 * c(i + 1) - c(i + 2)) / (12.0 * h);
  if (i == 0)
    return (-25.0 * c(0) + 48.0 * c(1) - 36.0 * c(2) + 16.0 * c(3) - 3.0 * c(4)) / (12.0 * h);
  if (i == 1)
    return (-3.0 * c(0) - 10.0 * c(1) + 18.0 * c(2) - 6.0 * c(3) + c(4)) / (12.0 * h);
  if (i == n - 2)
    return (3.0 * c(n - 1) + 10.0 * c(n - 2) - 18.0 * c(n - 3) + 6.0 * c(n - 4) - c(n - 5)) /
           (12.0 * h);
  return (25.0 * c(n - 1) - 48.0 * c(n - 2) + 36.0 * c(n - 3) - 16.0 * c(n - 4) + 3.0 * c(n - 5)) /
         (12.0 * h);
}
}  // namespace

Vec stencil_derivative(const std::vector<Vec>& values, int i, double h) {
  return stencil_impl(values, i, h);
}

double stencil_derivative(const std::vector<double>& values, int i, double h) {
  return stencil_impl(values, i, h);
}

}  // namespace geophase
