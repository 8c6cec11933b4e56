#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spisim/types.hpp"

namespace spisim::quad {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // absolute error estimate
    long evaluations = 0;
};

// Adaptive bisection with a nested Gauss 7/15 pair.  Suited to the smooth,
// mildly oscillatory integrands that show up here (damped Rabi products).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, int max_depth = 48);

cplx integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                       double abs_tol = 1e-10, double* err = nullptr);

// Integral of f over the ordered simplex 0 <= t1 <= ... <= tn <= tau.
// n <= 3 uses nested adaptive quadrature, larger n a fixed Halton sequence
// (deterministic; `seed` offsets the start index).
QuadResult simplex_integrate(const std::function<double(std::span<const double>)>& f,
                             int n, double tau, double abs_tol = 1e-7,
                             std::uint64_t seed = 0, std::size_t qmc_points = 100000);

cplx simplex_integrate_complex(const std::function<cplx(std::span<const double>)>& f,
                               int n, double tau, double abs_tol = 1e-7,
                               std::uint64_t seed = 0, double* err = nullptr);

// Cumulative integral on a uniform grid (composite Simpson with a
// third-order rule at odd points).  Returns C with C[i] = int_{x0}^{x_i} f.
std::vector<double> cumulative_uniform(std::span<const double> f, double h);
std::vector<cplx> cumulative_uniform(std::span<const cplx> f, double h);

// Halton low-discrepancy point in [0,1)^dim, dim <= 6.
void halton_point(std::uint64_t index, int dim, double* out);

} // namespace spisim::quad
