#pragma once

#include <functional>

#include "geophase/lie.hpp"

namespace geophase {

// 4th-order Munthe-Kaas step for gdot = g * hat(xi(t, g)).
// f returns algebra coordinates of the body velocity.
GroupElement rkmk4_step_left(const LieGroupDescriptor& G, const GroupElement& g, double t, double h,
                             const std::function<Vec(double, const GroupElement&)>& f);

// 4th-order step for hdot = hat(omega(t)) * h (spatial velocity, g-free),
// realized through the inverse curve: y = h^-1 satisfies ydot = y*(-omega).
GroupElement rkmk4_step_right(const LieGroupDescriptor& G, const GroupElement& h, double t, double hstep,
                              const std::function<Vec(double)>& omega);

// dexp^{-1}_u applied to a, truncated to the order needed by the MK4 scheme.
Vec dexpinv(const LieGroupDescriptor& G, const Vec& u, const Vec& a);

// Composite Simpson weights for a uniform grid with n samples (n >= 2);
// falls back to trapezoid on the last interval when n is even.
std::vector<double> simpson_weights(int n, double h);

// 4th-order finite-difference derivative of a sampled curve at index i
// (5-point central stencil, one-sided at the ends). values.size() >= 5.
Vec stencil_derivative(const std::vector<Vec>& values, int i, double h);
double stencil_derivative(const std::vector<double>& values, int i, double h);

}  // namespace geophase
