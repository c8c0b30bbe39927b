#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/ldp_client.hpp"
#include "nldp/poly.hpp"
#include "nldp/rng.hpp"
#include "nldp/vec.hpp"

namespace nldp::server {

// A stochastic gradient reconstructed from one user's report.
struct GradientSample {
  std::vector<double> g;
  std::size_t source = 0;            // user index
  std::vector<double> w_query;       // hypothesis it was evaluated at
};

// ---------------------------------------------------------------------------
// Fresh-copy index maps
// ---------------------------------------------------------------------------
// Which noisy copies feed which product factors. Kept as pure functions so
// the disjointness that makes the product estimators unbiased is a testable
// property of the map, not an accident of loop bounds. Indices are 1-based
// (copy k lives at array slot k-1), matching the j*p+1 ... arithmetic.

struct HingeBlockIndices {
  std::size_t j = 0;
  std::vector<std::size_t> t_copies;  // factors y_k * <w, x_k>
  std::vector<std::size_t> s_copies;  // factors (1 - y_k * <w, x_k>)
};

inline std::vector<HingeBlockIndices> hinge_index_map(std::size_t p) {
  std::vector<HingeBlockIndices> blocks(p + 1);
  for (std::size_t j = 0; j <= p; ++j) {
    blocks[j].j = j;
    for (std::size_t k = j * p + 1; k <= j * p + j; ++k) blocks[j].t_copies.push_back(k);
    for (std::size_t k = j * p + j + 1; k <= j * p + p; ++k) blocks[j].s_copies.push_back(k);
  }
  return blocks;
}

// Triangular map: monomial of degree j uses copies j(j-1)/2+1 .. j(j+1)/2,
// so degrees 0..p consume the first p(p+1)/2 of the p(p+1) copies sent (the
// surplus is kept for fidelity of the client message and ignored here).
inline std::vector<std::vector<std::size_t>> logistic_index_map(std::size_t p) {
  std::vector<std::vector<std::size_t>> map(p + 1);
  for (std::size_t j = 1; j <= p; ++j) {
    for (std::size_t k = j * (j - 1) / 2 + 1; k <= j * (j + 1) / 2; ++k) map[j].push_back(k);
  }
  return map;
}

// ---------------------------------------------------------------------------
// Gradient reconstruction
// ---------------------------------------------------------------------------

// G(w; i) = (sum_j c_j * C(p,j) * t_j * s_j) * y_0 * x_0 with
//   t_j = prod over its copies of y_k <w, x_k>     (t_0 = 1)
//   s_j = prod over its copies of 1 - y_k <w, x_k> (s_p = 1)
// Every copy feeds at most one factor, so the noises multiply out and the
// expectation collapses to P_p(y<w,x>) * y * x.
inline GradientSample hinge_gradient(const Hypothesis& w, const client::HingeReport& report,
                                     const poly::BernsteinApprox& approx,
                                     std::size_t source = 0) {
  require(report.p == approx.degree, ErrorKind::kMalformedReport,
          "report degree does not match approximation degree");
  report.validate();
  require(w.dimension() == report.dimension(), ErrorKind::kInvalidInput,
          "hinge_gradient: dimension mismatch");
  require(norm2(w.w) <= 1.0 + 1e-9, ErrorKind::kPrecondition,
          "hinge_gradient expects ||w|| <= 1");

  const std::size_t p = report.p;
  double scalar = 0.0;
  for (std::size_t j = 0; j <= p; ++j) {
    double t = 1.0;
    for (std::size_t k = j * p + 1; k <= j * p + j; ++k) {
      t *= report.y_copies[k - 1] * dot(w.w, report.x_copies[k - 1]);
    }
    double s = 1.0;
    for (std::size_t k = j * p + j + 1; k <= j * p + p; ++k) {
      s *= 1.0 - report.y_copies[k - 1] * dot(w.w, report.x_copies[k - 1]);
    }
    scalar += approx.coefficients[j] * poly::binomial(p, j) * t * s;
  }

  GradientSample out;
  out.g = scaled(report.x0, scalar * report.y0);
  out.source = source;
  out.w_query = w.w;
  return out;
}

// G~(w; i) = (sum_k (c2_k - c1_k * y_p) * t_k * (R*rho)^{k+1}) * x_0 with
// t_k the product of k fresh copies <w, x_copy>. With coefficients stored in
// powers of z (poly::ChebyshevApprox), the mean recovers the analytic
// gradient factor of log(1 + e^{-R rho y <w, x'>}).
inline GradientSample logistic_gradient(const Hypothesis& w,
                                        const client::LogisticReport& report,
                                        const poly::ChebyshevApprox& approx,
                                        std::size_t source = 0) {
  require(report.p == approx.degree, ErrorKind::kMalformedReport,
          "report degree does not match approximation degree");
  report.validate();
  require(w.dimension() == report.dimension(), ErrorKind::kInvalidInput,
          "logistic_gradient: dimension mismatch");
  require(norm2(w.w) <= 1.0 + 1e-9, ErrorKind::kPrecondition,
          "logistic_gradient expects ||w|| <= 1");

  const std::size_t p = report.p;
  double scalar = 0.0;
  double scale_pow = approx.scale;  // (R*rho)^{k+1}
  double t = 1.0;                   // t_0 = 1
  for (std::size_t k = 0; k <= p; ++k) {
    if (k > 0) {
      // degree-k monomial: multiply in the k fresh copies of this band
      t = 1.0;
      for (std::size_t c = k * (k - 1) / 2 + 1; c <= k * (k + 1) / 2; ++c) {
        t *= dot(w.w, report.x_copies[c - 1]);
      }
    }
    scalar += (approx.c2[k] - approx.c1[k] * report.y_p) * t * scale_pow;
    scale_pow *= approx.scale;
  }

  GradientSample out;
  out.g = scaled(report.x0, scalar);
  out.source = source;
  out.w_query = w.w;
  return out;
}

// ---------------------------------------------------------------------------
// Constrained stochastic optimizers
// ---------------------------------------------------------------------------

enum class OptimizerMethod { kSigm, kPsgd };

inline const char* to_string(OptimizerMethod m) {
  return m == OptimizerMethod::kSigm ? "sigm" : "psgd";
}

inline OptimizerMethod optimizer_method_from_string(const std::string& s) {
  if (s == "sigm") return OptimizerMethod::kSigm;
  if (s == "psgd") return OptimizerMethod::kPsgd;
  fail(ErrorKind::kConfig, "unknown optimizer method '" + s + "' (valid: sigm, psgd)");
}

// Per-step observer for logging and tests: (step, iterate, gradient norm,
// clipped).
using StepObserver =
    std::function<void(std::size_t, std::span<const double>, double, bool)>;

struct OptimizerConfig {
  std::size_t horizon = 0;    // number of gradient samples consumed (T)
  std::size_t dimension = 0;  // ambient dimension
  double radius = 1.0;        // constraint-ball radius
  OptimizerMethod method = OptimizerMethod::kSigm;

  // SIGM sequences: alpha_i = (i+1)/2, A_k = sum alpha_i, B_k = A_k,
  // eta_k = alpha_{k+1}/A_{k+1}, beta_k = smoothness + noise_scale*(k+1)^1.5.
  // The growth term damps the dual-averaging step against gradient noise.
  double smoothness = 1.0;
  double noise_scale = 0.0;

  // PSGD step size; 0 selects radius / (noise_hint * sqrt(T)).
  double psgd_eta = 0.0;
  double noise_hint = 1.0;  // caller's estimate of E||G||

  double clip = 1e6;  // gradient clip radius; <=0 disables
  StepObserver observer;

  void validate() const {
    require(horizon >= 1, ErrorKind::kConfig, "optimizer horizon must be >= 1");
    require(dimension >= 1, ErrorKind::kConfig, "optimizer dimension must be >= 1");
    require(radius > 0.0, ErrorKind::kConfig, "optimizer radius must be positive");
  }
};

struct OptimizerStats {
  std::size_t steps = 0;
  std::size_t clip_events = 0;
};

using GradientOracle = std::function<GradientSample(const Hypothesis&)>;

namespace detail {

inline std::vector<double> fetch_clip(const GradientOracle& oracle, const Hypothesis& at,
                                      const OptimizerConfig& config, std::size_t step,
                                      OptimizerStats* stats) {
  GradientSample s = oracle(at);
  require(all_finite(s.g), ErrorKind::kInvalidInput,
          "non-finite gradient at step " + std::to_string(step));
  double n = norm2(s.g);
  bool clipped = false;
  if (config.clip > 0.0 && n > config.clip) {
    scale_in_place(s.g, config.clip / n);
    clipped = true;
    if (stats) ++stats->clip_events;
  }
  if (config.observer) config.observer(step, at.w, n, clipped);
  return std::move(s.g);
}

}  // namespace detail

// Stochastic intermediate gradient method over the centered ball, with
// d(x) = ||x||^2/2 so every argmin is a closed-form Euclidean projection.
// Consumes exactly `horizon` gradient samples and returns the final y
// iterate.
inline Hypothesis sigm_run(const GradientOracle& oracle, const OptimizerConfig& config,
                           OptimizerStats* stats = nullptr) {
  config.validate();
  auto alpha = [](std::size_t i) { return 0.5 * (static_cast<double>(i) + 1.0); };
  auto beta = [&](std::size_t k) {
    return config.smoothness +
           config.noise_scale * std::pow(static_cast<double>(k) + 1.0, 1.5);
  };
  auto proj = [&](std::vector<double> v) {
    project_ball_in_place(v, config.radius);
    return v;
  };

  // x_0 = argmin d = origin.
  Hypothesis x0;
  x0.w.assign(config.dimension, 0.0);
  std::vector<double> g0 = detail::fetch_clip(oracle, x0, config, 0, stats);

  std::vector<double> dual = scaled(g0, -alpha(0));  // -sum alpha_i G_i
  double a_sum = alpha(0);
  std::vector<double> y = proj(scaled(dual, 1.0 / beta(0)));
  if (stats) stats->steps = 1;

  for (std::size_t k = 0; k + 1 < config.horizon; ++k) {
    double beta_k = beta(k);
    std::vector<double> z = proj(scaled(dual, 1.0 / beta_k));
    double alpha_next = alpha(k + 1);
    double a_next = a_sum + alpha_next;
    double eta_k = alpha_next / a_next;

    Hypothesis x_next;
    x_next.w = scaled(z, eta_k);
    axpy(x_next.w, 1.0 - eta_k, y);

    std::vector<double> g = detail::fetch_clip(oracle, x_next, config, k + 1, stats);

    std::vector<double> x_hat = z;
    axpy(x_hat, -alpha_next / beta_k, g);
    x_hat = proj(std::move(x_hat));

    // B_k = A_k, so the y-update collapses to w_{k+1}.
    std::vector<double> w_next = scaled(x_hat, eta_k);
    axpy(w_next, 1.0 - eta_k, y);
    y = std::move(w_next);

    axpy(dual, -alpha_next, g);
    a_sum = a_next;
    if (stats) stats->steps = k + 2;
  }

  Hypothesis out;
  out.w = std::move(y);
  return out;
}

// Projected SGD with uniform averaging of the pre-update iterates.
inline Hypothesis psgd_run(const GradientOracle& oracle, const OptimizerConfig& config,
                           OptimizerStats* stats = nullptr) {
  config.validate();
  double eta = config.psgd_eta;
  if (eta <= 0.0) {
    double hint = config.noise_hint > 0.0 ? config.noise_hint : 1.0;
    eta = config.radius / (hint * std::sqrt(static_cast<double>(config.horizon)));
  }

  Hypothesis w;  // starts at the origin
  w.w.assign(config.dimension, 0.0);
  std::vector<double> avg(config.dimension, 0.0);
  for (std::size_t t = 0; t < config.horizon; ++t) {
    std::vector<double> g = detail::fetch_clip(oracle, w, config, t, stats);
    axpy(avg, 1.0, w.w);
    axpy(w.w, -eta, g);
    project_ball_in_place(w.w, config.radius);
    if (stats) stats->steps = t + 1;
  }
  scale_in_place(avg, 1.0 / static_cast<double>(config.horizon));
  Hypothesis out;
  out.w = std::move(avg);
  return out;
}

inline Hypothesis run_optimizer(const GradientOracle& oracle, const OptimizerConfig& config,
                                OptimizerStats* stats = nullptr) {
  return config.method == OptimizerMethod::kSigm ? sigm_run(oracle, config, stats)
                                                 : psgd_run(oracle, config, stats);
}

// ---------------------------------------------------------------------------
// One-round training loops (H_priv and T_priv)
// ---------------------------------------------------------------------------

// Reports are produced on demand so a training run never has to hold all
// n messages in memory; each user index is requested exactly once.
using HingeReportProvider = std::function<client::HingeReport(std::size_t)>;
using LogisticReportProvider = std::function<client::LogisticReport(std::size_t)>;

// Analytic estimate of E||G|| for the hinge estimator, used to scale
// optimizer step sizes. Treats every factor as an independent noisy scalar
// with second moment (1 + sigma^2)(u^2 + sigma^2) around |u| ~ 1/2.
inline double hinge_gradient_scale_estimate(const poly::BernsteinApprox& approx,
                                            double sigma_base, double sigma_copy,
                                            std::size_t dimension) {
  const std::size_t p = approx.degree;
  double factor_sq = (1.0 + sigma_copy * sigma_copy) * (0.25 + sigma_copy * sigma_copy);
  double sum = 0.0;
  for (std::size_t j = 0; j <= p; ++j) {
    double c = approx.coefficients[j] * poly::binomial(p, j);
    sum += c * c * std::pow(factor_sq, static_cast<double>(p));
  }
  double base_sq = (1.0 + sigma_base * sigma_base) *
                   (1.0 + static_cast<double>(dimension) * sigma_base * sigma_base);
  return std::sqrt(sum * base_sq);
}

inline double logistic_gradient_scale_estimate(const poly::ChebyshevApprox& approx,
                                               double sigma_base, double sigma_copy,
                                               std::size_t dimension) {
  const std::size_t p = approx.degree;
  double factor_sq = 0.25 + sigma_copy * sigma_copy;
  double sum = 0.0;
  double scale_pow = approx.scale;
  for (std::size_t k = 0; k <= p; ++k) {
    double c = (std::abs(approx.c2[k]) + std::abs(approx.c1[k])) * scale_pow;
    sum += c * c * std::pow(factor_sq, static_cast<double>(k));
    scale_pow *= approx.scale;
  }
  double base_sq = 1.0 + static_cast<double>(dimension) * sigma_base * sigma_base;
  return std::sqrt(sum * base_sq);
}

struct TrainDiagnostics {
  OptimizerStats optimizer;
  std::size_t users_consumed = 0;
};

namespace detail {

template <typename GradFn>
Hypothesis one_round_train(std::size_t n_users, const GradFn& grad_fn,
                           const OptimizerConfig& config, std::uint64_t seed,
                           TrainDiagnostics* diag) {
  require(n_users >= 1, ErrorKind::kInvalidInput, "one-round training needs at least one report");
  OptimizerConfig cfg = config;
  if (cfg.horizon == 0) cfg.horizon = n_users;
  require(cfg.horizon <= n_users, ErrorKind::kInvalidInput,
          "optimizer horizon exceeds the number of users; reports are single-use");

  // Without-replacement order: a seeded permutation consumed front to back.
  std::vector<std::size_t> order = RngStream::root(seed).sub("user_order").permutation(n_users);
  std::size_t cursor = 0;
  GradientOracle oracle = [&](const Hypothesis& w) {
    require(cursor < cfg.horizon, ErrorKind::kInvalidInput, "gradient oracle exhausted");
    std::size_t user = order[cursor++];
    return grad_fn(w, user);
  };

  OptimizerStats stats;
  Hypothesis out = run_optimizer(oracle, cfg, &stats);
  project_ball_in_place(out.w, cfg.radius);
  if (diag) {
    diag->optimizer = stats;
    diag->users_consumed = cursor;
  }
  return out;
}

}  // namespace detail

// H_priv: run the optimizer over hinge-mechanism gradients, constrained to
// the unit ball. Consumes each report at most once.
inline Hypothesis hinge_nldp_train(std::size_t n_users, const HingeReportProvider& provider,
                                   const poly::BernsteinApprox& approx,
                                   OptimizerConfig config, std::uint64_t seed,
                                   TrainDiagnostics* diag = nullptr) {
  config.radius = 1.0;
  return detail::one_round_train(
      n_users,
      [&](const Hypothesis& w, std::size_t user) {
        return hinge_gradient(w, provider(user), approx, user);
      },
      config, seed, diag);
}

inline Hypothesis hinge_nldp_train(std::span<const client::HingeReport> reports,
                                   const poly::BernsteinApprox& approx,
                                   const OptimizerConfig& config, std::uint64_t seed,
                                   TrainDiagnostics* diag = nullptr) {
  return hinge_nldp_train(
      reports.size(), [&](std::size_t i) { return reports[i]; }, approx, config, seed, diag);
}

// T_priv: the logistic counterpart. Optimization runs over the unit ball in
// the normalized variable w~ = w/rho (the products <w~, x'> are what the
// approximation expects); the returned hypothesis is scaled back to the
// rho-ball. The induced classifier is scale-invariant.
inline Hypothesis logistic_nldp_train(std::size_t n_users,
                                      const LogisticReportProvider& provider,
                                      const poly::ChebyshevApprox& approx, double rho,
                                      OptimizerConfig config, std::uint64_t seed,
                                      TrainDiagnostics* diag = nullptr) {
  require(rho > 0.0, ErrorKind::kConfig, "logistic_nldp_train: rho must be positive");
  config.radius = 1.0;
  Hypothesis unit = detail::one_round_train(
      n_users,
      [&](const Hypothesis& w, std::size_t user) {
        return logistic_gradient(w, provider(user), approx, user);
      },
      config, seed, diag);
  scale_in_place(unit.w, rho);
  return unit;
}

inline Hypothesis logistic_nldp_train(std::span<const client::LogisticReport> reports,
                                      const poly::ChebyshevApprox& approx, double rho,
                                      const OptimizerConfig& config, std::uint64_t seed,
                                      TrainDiagnostics* diag = nullptr) {
  return logistic_nldp_train(
      reports.size(), [&](std::size_t i) { return reports[i]; }, approx, rho, config, seed,
      diag);
}

}  // namespace nldp::server
