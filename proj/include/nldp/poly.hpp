#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "nldp/error.hpp"

namespace nldp::poly {

// ---------------------------------------------------------------------------
// Smoothed hinge
// ---------------------------------------------------------------------------

// f_beta(x) = (1/R - x + sqrt((1/R - x)^2 + beta^2)) / 2, a smooth upper
// bound on max(0, 1/R - x) with uniform gap at most beta/2.
inline double smoothed_hinge(double x, double beta, double R) {
  require(beta > 0.0, ErrorKind::kConfig, "smoothed_hinge: beta must be positive");
  require(R > 0.0, ErrorKind::kConfig, "smoothed_hinge: R must be positive");
  double t = 1.0 / R - x;
  return 0.5 * (t + std::sqrt(t * t + beta * beta));
}

// d/dx f_beta(x) = ((x - 1/R)/sqrt((1/R - x)^2 + beta^2) - 1) / 2, which maps
// the reals into (-1, 0) and increases monotonically.
inline double smoothed_hinge_derivative(double x, double beta, double R) {
  require(beta > 0.0, ErrorKind::kConfig, "smoothed_hinge_derivative: beta must be positive");
  double t = 1.0 / R - x;
  return 0.5 * (-1.0 + (x - 1.0 / R) / std::sqrt(t * t + beta * beta));
}

// The degree the theory would ask for, p = 2/(beta^2 * alpha) with
// beta = alpha/4. Astronomical for any practical alpha; exposed so callers
// can log it next to the degree they actually use.
inline double theoretical_bernstein_degree(double alpha) {
  double beta = alpha / 4.0;
  return 2.0 / (beta * beta * alpha);
}

// ---------------------------------------------------------------------------
// Bernstein approximation of the smoothed hinge derivative
// ---------------------------------------------------------------------------

// C(n, k) in double arithmetic. Exact while the result stays within the
// integer-exact range of double; overflow is diagnosed by the caller.
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r *= static_cast<double>(n - k + i);
    r /= static_cast<double>(i);
  }
  return r;
}

struct BernsteinApprox {
  std::size_t degree = 0;            // p
  std::vector<double> coefficients;  // c_i = f'_beta(i/p), i = 0..p
  double beta = 0.0;
  double radius = 0.0;  // R
};

// Coefficients of the degree-p Bernstein polynomial of an arbitrary function
// on [0,1]: c_i = f(i/p).
template <typename Fn>
BernsteinApprox bernstein_build_custom(Fn&& f, std::size_t p) {
  require(p >= 1, ErrorKind::kConfig, "bernstein degree must be >= 1");
  require(std::isfinite(binomial(p, p / 2)), ErrorKind::kConfig,
          "bernstein degree " + std::to_string(p) +
              " overflows binomial weights in double precision; use a log-space "
              "evaluation mode");
  BernsteinApprox a;
  a.degree = p;
  a.coefficients.resize(p + 1);
  for (std::size_t i = 0; i <= p; ++i) {
    a.coefficients[i] = f(static_cast<double>(i) / static_cast<double>(p));
  }
  return a;
}

inline BernsteinApprox bernstein_build(double beta, double R, std::size_t p) {
  BernsteinApprox a = bernstein_build_custom(
      [&](double x) { return smoothed_hinge_derivative(x, beta, R); }, p);
  a.beta = beta;
  a.radius = R;
  return a;
}

// Counts evaluations at arguments outside [0,1]. Noisy inner products land
// there routinely; the tally is diagnostic only.
inline std::atomic<std::uint64_t>& bernstein_out_of_range_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

// De Casteljau evaluation. Valid (and used) for arguments outside [0,1] too,
// where it still evaluates the same polynomial.
inline double bernstein_eval(const BernsteinApprox& a, double x) {
  if (x < 0.0 || x > 1.0) {
    bernstein_out_of_range_count().fetch_add(1, std::memory_order_relaxed);
  }
  std::vector<double> b = a.coefficients;
  for (std::size_t r = 1; r <= a.degree; ++r) {
    for (std::size_t i = 0; i + r <= a.degree; ++i) {
      b[i] = (1.0 - x) * b[i] + x * b[i + 1];
    }
  }
  return b[0];
}

// ---------------------------------------------------------------------------
// Logistic decomposition
// ---------------------------------------------------------------------------

// log(1 + e^{-yz}) = -y*h1(z) + h2(z) for y in {-1,+1}, with h1(z) = z/2 and
// h2(z) = z/2 + log(1+e^{-z}). h2 uses the log1p branch that never
// exponentiates a large positive argument.
struct LogisticSplit {
  double h1 = 0.0;
  double h2 = 0.0;
};

inline LogisticSplit logistic_split(double z) {
  LogisticSplit s;
  s.h1 = 0.5 * z;
  if (z >= 0.0) {
    s.h2 = 0.5 * z + std::log1p(std::exp(-z));
  } else {
    s.h2 = -0.5 * z + std::log1p(std::exp(z));
  }
  return s;
}

// h2'(z) = sigmoid(z) - 1/2, odd in z.
inline double h2_derivative(double z) {
  // 1/(1+e^{-z}) - 1/2, computed from the side that avoids overflow.
  if (z >= 0.0) return 0.5 - 1.0 / (1.0 + std::exp(z));
  return 1.0 / (1.0 + std::exp(-z)) - 0.5;
}

// ---------------------------------------------------------------------------
// Chebyshev approximation of the logistic pieces
// ---------------------------------------------------------------------------

// Horner evaluation of sum_k coeffs[k] * x^k.
inline double poly_eval_monomial(std::span<const double> coeffs, double x) {
  double r = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) r = r * x + coeffs[i];
  return r;
}

// Monomial coefficients for h1' and h2' scaled so that
//     h_i'(z) ~= sum_k c_k z^k   for |z| <= R*rho.
// The fit is the degree-p Chebyshev interpolant of x -> h2'(R*rho*x) on
// [-1,1], converted to the monomial basis and rescaled by (R*rho)^{-k} per
// power. The server-side gradient formula multiplies the power estimates by
// (R*rho)^{k+1}, which under this convention reconstructs the analytic
// gradient factor R*rho * (h2' - y*h1')(R*rho*u).
//
// h1' is the constant 1/2, so c1 = (1/2, 0, ..., 0) exactly.
struct ChebyshevApprox {
  std::size_t degree = 0;   // p
  std::vector<double> c1;   // p+1 coefficients for h1'
  std::vector<double> c2;   // p+1 coefficients for h2'
  double scale = 0.0;       // R*rho
};

namespace detail {

// Monomial coefficients of the degree-p Chebyshev interpolant of f on
// [-1,1], built at Chebyshev nodes of the first kind and expanded through the
// T_{k+1} = 2x T_k - T_{k-1} recurrence. The expansion coefficients grow like
// 2^p, which caps usable degrees; chebyshev_build enforces the cap.
template <typename Fn>
std::vector<double> chebyshev_monomial_fit(Fn&& f, std::size_t p) {
  const std::size_t m = p + 1;  // number of nodes / coefficients
  std::vector<double> fx(m);
  for (std::size_t j = 0; j < m; ++j) {
    double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    fx[j] = f(std::cos(theta));
  }
  // Chebyshev-series coefficients a_k.
  std::vector<double> a(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double theta = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
      s += fx[j] * std::cos(static_cast<double>(k) * theta);
    }
    a[k] = s * ((k == 0 ? 1.0 : 2.0) / static_cast<double>(m));
  }
  // Expand sum a_k T_k(x) into powers of x.
  std::vector<double> mono(m, 0.0);
  std::vector<double> t_prev(m, 0.0), t_cur(m, 0.0), t_next(m, 0.0);
  t_prev[0] = 1.0;  // T_0
  if (m > 1) t_cur[1] = 1.0;  // T_1
  mono[0] += a[0] * t_prev[0];
  if (m > 1) {
    for (std::size_t i = 0; i < m; ++i) mono[i] += a[1] * t_cur[i];
  }
  for (std::size_t k = 2; k < m; ++k) {
    for (std::size_t i = 0; i < m; ++i) t_next[i] = -t_prev[i];
    for (std::size_t i = 0; i + 1 < m; ++i) t_next[i + 1] += 2.0 * t_cur[i];
    for (std::size_t i = 0; i < m; ++i) mono[i] += a[k] * t_next[i];
    t_prev = t_cur;
    t_cur = t_next;
  }
  return mono;
}

}  // namespace detail

constexpr std::size_t kChebyshevDegreeCap = 30;

inline ChebyshevApprox chebyshev_build(double R, double rho, std::size_t p) {
  require(p >= 1, ErrorKind::kConfig, "chebyshev degree must be >= 1");
  require(p <= kChebyshevDegreeCap, ErrorKind::kConfig,
          "chebyshev degree " + std::to_string(p) +
              " exceeds the monomial-conversion conditioning cap of " +
              std::to_string(kChebyshevDegreeCap));
  require(R > 0.0 && rho > 0.0, ErrorKind::kConfig, "chebyshev_build: R*rho must be positive");
  ChebyshevApprox a;
  a.degree = p;
  a.scale = R * rho;
  a.c1.assign(p + 1, 0.0);
  a.c1[0] = 0.5;  // h1' is identically 1/2
  std::vector<double> mono =
      detail::chebyshev_monomial_fit([&](double x) { return h2_derivative(a.scale * x); }, p);
  // Rescale from powers of x on [-1,1] to powers of z = scale * x.
  a.c2.resize(p + 1);
  double zk = 1.0;
  for (std::size_t k = 0; k <= p; ++k) {
    a.c2[k] = mono[k] / zk;
    zk *= a.scale;
  }
  return a;
}

// The fitted approximation of h2'(z), valid for |z| <= scale. Feeding
// z = scale * x reproduces the interpolant on [-1,1]; used by the quality
// checks and the `poly inspect` CLI.
inline double chebyshev_eval_h2(const ChebyshevApprox& a, double z) {
  return poly_eval_monomial(a.c2, z);
}

inline double chebyshev_eval_h1(const ChebyshevApprox& a, double z) {
  return poly_eval_monomial(a.c1, z);
}

// Largest |fit - target| for h2' over a uniform grid of z = scale*x,
// x in [-1,1].
inline double chebyshev_supgrid_error(const ChebyshevApprox& a, std::size_t grid_points = 10000) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    double z = a.scale * x;
    worst = std::max(worst, std::abs(chebyshev_eval_h2(a, z) - h2_derivative(z)));
  }
  return worst;
}

// Largest |P_p - f'_beta| over a uniform grid on [0,1].
inline double bernstein_supgrid_error(const BernsteinApprox& a, std::size_t grid_points = 10000) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    double err = std::abs(bernstein_eval(a, x) - smoothed_hinge_derivative(x, a.beta, a.radius));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace nldp::poly
