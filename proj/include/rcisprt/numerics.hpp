#ifndef RCISPRT_NUMERICS_HPP
#define RCISPRT_NUMERICS_HPP

#include <cstdint>
#include <functional>
#include <random>

namespace rcisprt {

/// Random stream used throughout the library. Every run owns one.
using Rng = std::mt19937_64;

/// Deterministic child seed for stream `index` of a master seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Uniform draw on [0, 1) from the top 53 bits of one engine output.
double uniform01(Rng& rng);

/// Standard normal draw (Box-Muller, two engine outputs per call).
double standard_normal(Rng& rng);

/// Standard normal CDF.
double normal_cdf(double x);

/// Gaussian tail probability Q(x) = 1 - Phi(x), accurate in the far tail.
double q_function(double x);

double normal_log_pdf(double x, double mean, double variance);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

/// Bisection for a root of a function that changes sign on [lo, hi].
/// `increasing` states the direction of monotonicity.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              bool increasing, double x_tol, int max_iter = 200);

}  // namespace rcisprt

#endif  // RCISPRT_NUMERICS_HPP
