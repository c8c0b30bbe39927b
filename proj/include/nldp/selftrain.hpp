#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/ldp_client.hpp"
#include "nldp/ldp_server.hpp"
#include "nldp/poly.hpp"
#include "nldp/rng.hpp"
#include "nldp/vec.hpp"

namespace nldp::selftrain {

// ---------------------------------------------------------------------------
// Well-behaved surrogate losses
// ---------------------------------------------------------------------------

enum class SurrogateLoss { kLogistic, kExponential };

inline const char* to_string(SurrogateLoss l) {
  return l == SurrogateLoss::kLogistic ? "logistic" : "exponential";
}

inline SurrogateLoss surrogate_loss_from_string(const std::string& s) {
  if (s == "logistic") return SurrogateLoss::kLogistic;
  if (s == "exponential") return SurrogateLoss::kExponential;
  fail(ErrorKind::kConfig, "unknown surrogate loss '" + s + "' (valid: logistic, exponential)");
}

inline double surrogate_value(SurrogateLoss loss, double z) {
  if (loss == SurrogateLoss::kLogistic) {
    return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return std::exp(-z);
}

inline double surrogate_derivative(SurrogateLoss loss, double z) {
  if (loss == SurrogateLoss::kLogistic) {
    // -1/(1+e^z), from the overflow-free side
    return z >= 0.0 ? -std::exp(-z) / (1.0 + std::exp(-z)) : -1.0 / (1.0 + std::exp(z));
  }
  return -std::exp(-z);
}

inline double declared_well_behaved_constant(SurrogateLoss loss) {
  return loss == SurrogateLoss::kLogistic ? 2.0 : 1.0;
}

struct WellBehavedReport {
  bool lipschitz_ok = true;
  bool decreasing_ok = true;
  bool lower_bound_ok = true;
  double worst_lower_bound_ratio = std::numeric_limits<double>::infinity();
  double worst_z = 0.0;

  bool ok() const { return lipschitz_ok && decreasing_ok && lower_bound_ok; }
};

// Grid verification on z in [0, 30] that |l'| <= 1, l is decreasing, and
// -l'(z) >= e^{-z}/C. Throws a config error on failure; the report carries
// the worst margin either way.
template <typename ValueFn, typename DerivFn>
std::pair<double, WellBehavedReport> well_behaved_check_custom(const ValueFn& value,
                                                               const DerivFn& deriv,
                                                               double c_ell,
                                                               bool throw_on_failure = true) {
  require(c_ell >= 1.0, ErrorKind::kConfig, "well-behaved constant must be >= 1");
  WellBehavedReport rep;
  const std::size_t grid = 3001;
  double prev_value = value(0.0);
  for (std::size_t i = 0; i < grid; ++i) {
    double z = 30.0 * static_cast<double>(i) / static_cast<double>(grid - 1);
    double v = value(z);
    double dv = deriv(z);
    if (std::abs(dv) > 1.0 + 1e-12) rep.lipschitz_ok = false;
    if (i > 0 && v > prev_value + 1e-12) rep.decreasing_ok = false;
    prev_value = v;
    double needed = std::exp(-z) / c_ell;
    double ratio = -dv / needed;
    if (ratio < rep.worst_lower_bound_ratio) {
      rep.worst_lower_bound_ratio = ratio;
      rep.worst_z = z;
    }
    if (-dv < needed * (1.0 - 1e-12)) rep.lower_bound_ok = false;
  }
  if (throw_on_failure && !rep.ok()) {
    fail(ErrorKind::kConfig,
         "loss fails the well-behaved conditions (worst -l'/e^{-z}*C ratio " +
             std::to_string(rep.worst_lower_bound_ratio) + " at z = " +
             std::to_string(rep.worst_z) + ")");
  }
  return {c_ell, rep};
}

inline std::pair<double, WellBehavedReport> well_behaved_check(SurrogateLoss loss) {
  double c = declared_well_behaved_constant(loss);
  return well_behaved_check_custom([&](double z) { return surrogate_value(loss, z); },
                                   [&](double z) { return surrogate_derivative(loss, z); }, c);
}

// d/dw l~(yhat <q,w>/sigma) = l~'(yhat <q,w>/sigma) * (yhat/sigma) * q.
inline std::vector<double> surrogate_grad(const Hypothesis& w, std::span<const double> q,
                                          int yhat, double sigma, SurrogateLoss loss) {
  require(sigma > 0.0, ErrorKind::kConfig, "surrogate_grad: sigma must be positive");
  double z = static_cast<double>(yhat) * dot(w.w, q) / sigma;
  double coeff = surrogate_derivative(loss, z) * static_cast<double>(yhat) / sigma;
  return scaled(q, coeff);
}

// ---------------------------------------------------------------------------
// STWN: self-training with weight normalization
// ---------------------------------------------------------------------------

struct StwnConfig {
  double sigma = 0.0;   // temperature; 0 -> max(R, rho)
  std::size_t B = 0;    // batch size; 0 -> formula
  std::size_t T = 0;    // iterations; 0 -> formula
  double eta = 0.0;     // step size; 0 -> formula
  SurrogateLoss loss = SurrogateLoss::kLogistic;
  double alpha = 0.05;
  double beta = 0.05;
  double rho = 1.0;  // known bound on ||mu||
  // Theta-tilde constants for the formula defaults.
  double c_B = 1.0;
  double c_T = 1.0;
  double c_eta = 1.0;

  double effective_sigma(double data_radius) const {
    if (sigma > 0.0) return sigma;
    return std::max(data_radius, rho);
  }

  std::size_t effective_B() const {
    if (B > 0) return B;
    return static_cast<std::size_t>(std::ceil(c_B * std::log(1.0 / beta) / alpha));
  }

  std::size_t effective_T(std::size_t dimension) const {
    if (T > 0) return T;
    double lb = std::log(1.0 / beta);
    return static_cast<std::size_t>(
        std::ceil(c_T * static_cast<double>(dimension) * lb * lb / alpha));
  }

  double effective_eta(std::size_t dimension) const {
    if (eta > 0.0) return eta;
    double lb = std::log(1.0 / beta);
    return c_eta * alpha / (static_cast<double>(dimension) * lb * lb);
  }

  void validate() const {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::kConfig, "stwn alpha must lie in (0,1)");
    require(beta > 0.0 && beta < 1.0, ErrorKind::kConfig, "stwn beta must lie in (0,1)");
    require(rho > 0.0, ErrorKind::kConfig, "stwn rho must be positive");
  }
};

// The T+1 unit-norm iterates (w^(0) included).
struct Trajectory {
  std::vector<Hypothesis> iterates;

  std::size_t size() const { return iterates.size(); }
};

struct StwnDiagnostics {
  std::size_t T = 0;
  std::size_t B = 0;
  double sigma = 0.0;
  double eta = 0.0;
  std::size_t examples_consumed = 0;
  std::size_t degenerate_resets = 0;
};

// Each iteration pseudo-labels its own fresh batch with the current iterate
// (self-labeling), takes the averaged surrogate step, and renormalizes.
// Batches are consumed disjointly in storage order: iteration t owns indices
// [t*B, (t+1)*B).
inline Trajectory stwn(const Dataset& public_data, const Hypothesis& w_pl,
                       const StwnConfig& config, StwnDiagnostics* diag = nullptr) {
  config.validate();
  require(public_data.kind == DatasetKind::kPublicUnlabeled, ErrorKind::kContractViolation,
          "stwn consumes public_unlabeled data");
  double npl = norm2(w_pl.w);
  require(npl >= 1e-12, ErrorKind::kDegenerateVector, "stwn: pseudo-labeler is near zero");

  const std::size_t d = public_data.dimension;
  const std::size_t B = config.effective_B();
  const std::size_t T = config.effective_T(d);
  require(B >= 1 && T >= 1, ErrorKind::kConfig, "stwn B and T must be >= 1");
  require(public_data.size() >= T * B, ErrorKind::kInvalidInput,
          "stwn needs at least T*B = " + std::to_string(T * B) + " public examples, got " +
              std::to_string(public_data.size()));
  const double sigma = config.effective_sigma(public_data.radius);
  const double eta = config.effective_eta(d);

  Trajectory traj;
  traj.iterates.reserve(T + 1);
  Hypothesis w;
  w.w = scaled(w_pl.w, 1.0 / npl);
  traj.iterates.push_back(w);

  std::size_t resets = 0;
  std::size_t consumed = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> step(d, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
      std::span<const double> q = public_data.point(t * B + i);
      int yhat = classify(w, q);  // fresh pseudo-label from the current iterate
      double z = static_cast<double>(yhat) * dot(w.w, q) / sigma;
      double coeff = surrogate_derivative(config.loss, z) * static_cast<double>(yhat) / sigma;
      axpy(step, coeff, q);
      ++consumed;
    }
    axpy(w.w, -eta / static_cast<double>(B), step);
    double n = norm2(w.w);
    if (n < 1e-12) {
      w.w = unit_vector(d, 0);
      ++resets;
    } else {
      scale_in_place(w.w, 1.0 / n);
    }
    traj.iterates.push_back(w);
  }

  if (diag) {
    diag->T = T;
    diag->B = B;
    diag->sigma = sigma;
    diag->eta = eta;
    diag->examples_consumed = consumed;
    diag->degenerate_resets = resets;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Pseudo-labeler from the logistic mechanism
// ---------------------------------------------------------------------------

struct PseudoLabelerConfig {
  PrivacyParams privacy;
  double rho = 1.0;        // constraint radius = known bound on ||mu||
  std::size_t degree_p = 8;
  double U = 1.0;
  double r = 1.0;
  server::OptimizerConfig optimizer;
};

struct PseudoLabelerDiagnostics {
  double c_err = 0.0;
  double target_excess_risk = 0.0;
  double gradient_scale_estimate = 0.0;
  std::size_t clip_events = 0;
};

inline double c_err_constant(double U, double r) { return r * r / (144.0 * U); }

// T_priv(C_err log2 / 2, R, rho, eps, delta, D): one-round logistic-loss
// training. The target excess risk only parameterizes the guarantee; it is
// recorded in the diagnostics next to the degree actually used.
inline Hypothesis pseudo_labeler_train(const Dataset& private_data,
                                       const PseudoLabelerConfig& config, std::uint64_t seed,
                                       PseudoLabelerDiagnostics* diag = nullptr) {
  require(private_data.kind == DatasetKind::kPrivate, ErrorKind::kContractViolation,
          "pseudo_labeler_train consumes private data");
  config.privacy.validate();
  require(!private_data.empty(), ErrorKind::kInvalidInput, "pseudo_labeler_train: empty data");

  const double R = private_data.radius;
  poly::ChebyshevApprox approx = poly::chebyshev_build(R, config.rho, config.degree_p);

  double sigma_base = client::hinge_sigma_base(config.privacy);
  double sigma_copy = client::hinge_sigma_copy(config.privacy, config.degree_p);
  double scale_est = server::logistic_gradient_scale_estimate(approx, sigma_base, sigma_copy,
                                                              private_data.dimension);
  if (config.optimizer.clip > 0.0) scale_est = std::min(scale_est, config.optimizer.clip);

  RngStream encode_root = RngStream::root(seed).sub("encode");
  server::LogisticReportProvider provider = [&](std::size_t i) {
    return client::logistic_encode(private_data.examples[i], config.privacy, config.degree_p,
                                   R, encode_root.sub(i));
  };

  server::OptimizerConfig opt = config.optimizer;
  opt.dimension = private_data.dimension;
  if (opt.horizon == 0) opt.horizon = private_data.size();
  if (opt.noise_hint <= 1.0) opt.noise_hint = scale_est;
  if (opt.method == server::OptimizerMethod::kSigm && opt.noise_scale <= 0.0) {
    opt.noise_scale = scale_est / opt.radius;
  }

  server::TrainDiagnostics train_diag;
  Hypothesis w = server::logistic_nldp_train(private_data.size(), provider, approx, config.rho,
                                             opt, seed ^ 0x54505256ULL, &train_diag);
  if (diag) {
    diag->c_err = c_err_constant(config.U, config.r);
    diag->target_excess_risk = diag->c_err * std::log(2.0) / 2.0;
    diag->gradient_scale_estimate = scale_est;
    diag->clip_events = train_diag.optimizer.clip_events;
  }
  return w;
}

// ---------------------------------------------------------------------------
// The self-training pipeline end to end
// ---------------------------------------------------------------------------

struct SelftrainPipelineConfig {
  PseudoLabelerConfig labeler;
  StwnConfig stwn;
  double K = 1.0;  // sub-exponential parameter, for the mean-norm condition
  std::optional<double> mu_norm;  // known ||mu||, when the harness has it
  std::uint64_t seed = 1;
  std::optional<Hypothesis> injected_pseudo_labeler;  // test hook
};

struct SelftrainRunReport {
  double c_err = 0.0;
  double target_excess_risk = 0.0;
  bool mean_norm_condition_checked = false;
  bool mean_norm_condition_ok = false;
  double mean_norm_required = 0.0;
  std::size_t stwn_T = 0;
  std::size_t stwn_B = 0;
  double stwn_sigma = 0.0;
  double stwn_eta = 0.0;
  std::size_t clip_events = 0;
  double pseudo_labeler_error_estimate = std::numeric_limits<double>::quiet_NaN();
  double min_trajectory_error = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_iterate = 0;
  std::vector<double> error_curve;  // per-iterate error on the eval sample (T+1 entries)
};

struct SelftrainPipelineResult {
  Trajectory trajectory;
  Hypothesis pseudo_labeler;
  SelftrainRunReport report;
};

// pseudo_labeler_train -> stwn. The mean-separation condition that backs
// the trajectory guarantee,
// ||mu|| >= 3K max(log(8/C_err), 22K) is checked when ||mu|| is known; a
// violation is recorded as a warning, not an error.
inline SelftrainPipelineResult run_selftrain_pipeline(const Dataset& private_data,
                                                      const Dataset& public_data,
                                                      const SelftrainPipelineConfig& config,
                                                      const Dataset* truth_eval = nullptr) {
  SelftrainPipelineResult result;
  double c_err = c_err_constant(config.labeler.U, config.labeler.r);
  result.report.c_err = c_err;
  result.report.target_excess_risk = c_err * std::log(2.0) / 2.0;
  if (config.mu_norm.has_value()) {
    double required =
        3.0 * config.K * std::max(std::log(8.0 / c_err), 22.0 * config.K);
    result.report.mean_norm_condition_checked = true;
    result.report.mean_norm_required = required;
    result.report.mean_norm_condition_ok = *config.mu_norm >= required;
  }

  PseudoLabelerDiagnostics labeler_diag;
  if (config.injected_pseudo_labeler.has_value()) {
    result.pseudo_labeler = *config.injected_pseudo_labeler;
  } else {
    result.pseudo_labeler =
        pseudo_labeler_train(private_data, config.labeler, config.seed, &labeler_diag);
    result.report.clip_events = labeler_diag.clip_events;
  }

  StwnDiagnostics stwn_diag;
  result.trajectory = stwn(public_data, result.pseudo_labeler, config.stwn, &stwn_diag);
  result.report.stwn_T = stwn_diag.T;
  result.report.stwn_B = stwn_diag.B;
  result.report.stwn_sigma = stwn_diag.sigma;
  result.report.stwn_eta = stwn_diag.eta;

  if (truth_eval != nullptr && truth_eval->labeled() && !truth_eval->empty()) {
    result.report.pseudo_labeler_error_estimate =
        classification_error(result.pseudo_labeler, *truth_eval);
    result.report.error_curve.reserve(result.trajectory.size());
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < result.trajectory.size(); ++t) {
      double err = classification_error(result.trajectory.iterates[t], *truth_eval);
      result.report.error_curve.push_back(err);
      if (err < best) {
        best = err;
        best_t = t;
      }
    }
    result.report.min_trajectory_error = best;
    result.report.best_iterate = best_t;
  }
  return result;
}

// Evaluation-only iterate selection (outside the privacy model; a private
// selection would need one more round). Ties go to the lowest t.
inline Hypothesis pick_best_iterate(const Trajectory& traj, const Dataset& eval) {
  require(!traj.iterates.empty(), ErrorKind::kInvalidInput, "empty trajectory");
  require(eval.labeled(), ErrorKind::kContractViolation,
          "pick_best_iterate requires labeled evaluation data");
  require(!eval.empty(), ErrorKind::kInvalidInput, "empty evaluation dataset");
  std::size_t best_t = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    double err = classification_error(traj.iterates[t], eval);
    if (err < best_err) {
      best_err = err;
      best_t = t;
    }
  }
  return traj.iterates[best_t];
}

}  // namespace nldp::selftrain
