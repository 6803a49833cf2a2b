#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace epduct {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm_sq(const Vec3& a) { return dot(a, a); }

/// Density argument would be non-positive (gamma > 1 branch).
struct VacuumError : std::domain_error {
    using std::domain_error::domain_error;
};

/// |c^2 - q1^2| fell below the degeneracy threshold. The iteration set is
/// supposed to keep the flow uniformly supersonic, so this signals a broken
/// invariant rather than a recoverable state.
struct SonicError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, int max_depth = 40);

/// Least-squares slope of log(y) against log(x); used for observed-order fits.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Run fn(i) for i in [0, n) on up to `threads` workers (0 = hardware count).
/// Work items must write to disjoint locations.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

int default_thread_count();

}  // namespace epduct
