#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/dataset_io.hpp"
#include "nldp/distributions.hpp"
#include "nldp/error.hpp"
#include "nldp/json_io.hpp"
#include "nldp/ldp_client.hpp"
#include "nldp/ldp_server.hpp"
#include "nldp/massart.hpp"
#include "nldp/parallel.hpp"
#include "nldp/poly.hpp"
#include "nldp/rng.hpp"
#include "nldp/selftrain.hpp"
#include "nldp/toml.hpp"

namespace nldp::harness {

// ---------------------------------------------------------------------------
// Monte-Carlo error estimation
// ---------------------------------------------------------------------------

// How fresh ground-truth samples are drawn for evaluation.
struct EvalModel {
  enum class Kind { kRealizable, kMixture } kind = Kind::kRealizable;
  MarginalSpec marginal;  // realizable
  Hypothesis w_star;      // realizable
  MixtureSpec mixture;    // mixture

  static EvalModel realizable(MarginalSpec spec, Hypothesis w_star) {
    EvalModel m;
    m.kind = Kind::kRealizable;
    m.marginal = std::move(spec);
    m.w_star = std::move(w_star);
    return m;
  }

  static EvalModel mixture_model(MixtureSpec spec) {
    EvalModel m;
    m.kind = Kind::kMixture;
    m.mixture = std::move(spec);
    return m;
  }

  Dataset sample(std::size_t n, std::uint64_t seed) const {
    if (kind == Kind::kRealizable) return sample_realizable(marginal, w_star, n, seed);
    return sample_mixture(mixture, n, seed);
  }
};

struct ErrorEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t trials = 0;
};

// 95% normal-approximation interval; zero (or full) counts fall back to the
// rule-of-three bound so the interval is never degenerate.
inline ErrorEstimate error_estimate_from_counts(std::size_t wrong, std::size_t trials) {
  ErrorEstimate e;
  e.trials = trials;
  e.estimate = static_cast<double>(wrong) / static_cast<double>(trials);
  if (wrong == 0 || wrong == trials) {
    e.ci_halfwidth = 3.0 / static_cast<double>(trials);
  } else {
    e.ci_halfwidth =
        1.96 * std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
  }
  return e;
}

inline ErrorEstimate monte_carlo_error(const Hypothesis& w, const EvalModel& model,
                                       std::size_t trials, std::uint64_t seed) {
  require(trials >= 100, ErrorKind::kInvalidInput, "monte_carlo_error needs trials >= 100");
  Dataset sample = model.sample(trials, seed);
  std::size_t workers = std::min(worker_count(), trials);
  std::vector<std::size_t> wrong(workers == 0 ? 1 : workers, 0);
  parallel_chunks(trials, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (classify(w, sample.point(i)) != sample.label(i)) ++local;
    }
    wrong[chunk % wrong.size()] += local;
  });
  std::size_t total = 0;
  for (std::size_t c : wrong) total += c;
  return error_estimate_from_counts(total, trials);
}

inline ErrorEstimate committee_error(const massart::Committee& committee, const Dataset& eval) {
  require(eval.labeled() && !eval.empty(), ErrorKind::kInvalidInput,
          "committee_error needs a labeled nonempty sample");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (massart::vote(committee, eval.point(i)) != eval.label(i)) ++wrong;
  }
  return error_estimate_from_counts(wrong, eval.size());
}

// ---------------------------------------------------------------------------
// Unbiasedness audit
// ---------------------------------------------------------------------------

enum class AuditMechanism { kHinge, kLogistic };
enum class AuditMode { kStandard, kReuseCopy };

struct AuditReport {
  std::vector<double> z_scores;
  double max_abs_z = 0.0;
  bool pass = false;
  std::vector<double> mc_mean;
  std::vector<double> target;
  std::size_t trials = 0;
};

// Analytic mean of the hinge estimator: P_p(y <w,x>) * y * x, with the
// polynomial evaluated through the explicit binomial sum (not the
// de Casteljau path the implementation uses).
inline std::vector<double> hinge_gradient_target(const Hypothesis& w, const Example& point,
                                                 const poly::BernsteinApprox& approx) {
  double u = static_cast<double>(point.y) * dot(w.w, point.x);
  double value = 0.0;
  for (std::size_t j = 0; j <= approx.degree; ++j) {
    value += approx.coefficients[j] * poly::binomial(approx.degree, j) *
             std::pow(u, static_cast<double>(j)) *
             std::pow(1.0 - u, static_cast<double>(approx.degree - j));
  }
  return scaled(point.x, value * static_cast<double>(point.y));
}

// Analytic mean of the logistic estimator at the normalized point x' = x/R.
inline std::vector<double> logistic_gradient_target(const Hypothesis& w, const Example& point,
                                                    const poly::ChebyshevApprox& approx,
                                                    double R) {
  std::vector<double> xn = scaled(point.x, 1.0 / R);
  double u = dot(w.w, xn);
  double value = 0.0;
  double scale_pow = approx.scale;
  for (std::size_t k = 0; k <= approx.degree; ++k) {
    value += (approx.c2[k] - approx.c1[k] * static_cast<double>(point.y)) *
             std::pow(u, static_cast<double>(k)) * scale_pow;
    scale_pow *= approx.scale;
  }
  return scaled(xn, value);
}

struct AuditInput {
  Hypothesis w;
  Example point;
  std::size_t p = 4;
  PrivacyParams privacy;
  double R = 1.0;    // logistic normalization radius
  double rho = 1.0;  // logistic constraint radius
};

// Monte-Carlo mean of the estimator vs its analytic target, reported as
// componentwise z-scores. kReuseCopy deliberately duplicates one noisy copy
// into a second slot of the same product factor, which breaks the fresh-copy
// independence and must drive the audit to failure (the negative control).
inline AuditReport audit_unbiasedness(AuditMechanism mechanism, const AuditInput& input,
                                      std::size_t trials, std::uint64_t seed,
                                      AuditMode mode = AuditMode::kStandard) {
  require(trials >= 10000, ErrorKind::kInvalidInput,
          "audit_unbiasedness needs trials >= 10000");
  require(mechanism == AuditMechanism::kHinge || mode == AuditMode::kStandard || input.p >= 3,
          ErrorKind::kInvalidInput, "logistic reuse audit needs p >= 3");
  const std::size_t d = input.point.x.size();

  poly::BernsteinApprox bern;
  poly::ChebyshevApprox cheb;
  std::vector<double> target;
  if (mechanism == AuditMechanism::kHinge) {
    double alpha_t = 1.0 / (32.0 * input.R);
    bern = poly::bernstein_build(alpha_t / 4.0, input.R, input.p);
    target = hinge_gradient_target(input.w, input.point, bern);
  } else {
    cheb = poly::chebyshev_build(input.R, input.rho, input.p);
    target = logistic_gradient_target(input.w, input.point, cheb, input.R);
  }

  std::size_t workers = std::max<std::size_t>(1, std::min(worker_count(), trials));
  std::vector<std::vector<double>> sums(workers, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> sq_sums(workers, std::vector<double>(d, 0.0));
  RngStream root = RngStream::root(seed).sub("audit");

  parallel_chunks(trials, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<double>& sum = sums[chunk % workers];
    std::vector<double>& sq = sq_sums[chunk % workers];
    for (std::size_t t = begin; t < end; ++t) {
      RngStream sub = root.sub(t);
      std::vector<double> g;
      if (mechanism == AuditMechanism::kHinge) {
        client::HingeReport rep =
            client::hinge_encode(input.point, input.privacy, input.p, sub);
        if (mode == AuditMode::kReuseCopy) {
          // Both slots sit inside block j=0's s-product.
          rep.x_copies[1] = rep.x_copies[0];
          rep.y_copies[1] = rep.y_copies[0];
        }
        g = server::hinge_gradient(input.w, rep, bern).g;
      } else {
        client::LogisticReport rep =
            client::logistic_encode(input.point, input.privacy, input.p, input.R, sub);
        if (mode == AuditMode::kReuseCopy) {
          // Copies 4 and 5 are two factors of the degree-3 monomial; the
          // even-degree bands have near-zero coefficients (odd target), so
          // the duplication must land in an odd band to have any effect.
          rep.x_copies[4] = rep.x_copies[3];
        }
        g = server::logistic_gradient(input.w, rep, cheb).g;
      }
      for (std::size_t c = 0; c < d; ++c) {
        sum[c] += g[c];
        sq[c] += g[c] * g[c];
      }
    }
  });

  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t wkr = 0; wkr < workers; ++wkr) {
      s += sums[wkr][c];
      s2 += sq_sums[wkr][c];
    }
    mean[c] = s / static_cast<double>(trials);
    var[c] = s2 / static_cast<double>(trials) - mean[c] * mean[c];
    if (var[c] < 1e-300) var[c] = 1e-300;
  }

  AuditReport rep;
  rep.trials = trials;
  rep.mc_mean = mean;
  rep.target = target;
  rep.z_scores.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    double sem = std::sqrt(var[c] / static_cast<double>(trials));
    rep.z_scores[c] = (mean[c] - target[c]) / sem;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(rep.z_scores[c]));
  }
  rep.pass = rep.max_abs_z <= 4.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string pipeline = "massart";  // massart | selftrain | lhmn | hinge | logistic
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::string out_dir = "out";

  MarginalSpec marginal;
  std::vector<double> mu;  // explicit mixture mean; overrides mu_norm
  double mu_norm = 0.0;    // mean mu_norm * e_1 when mu is empty
  double massart_lambda = 0.0;
  double margin = 0.0;

  std::size_t n_private = 0;
  std::size_t m_public = 0;
  std::vector<double> w_star;  // empty -> seeded random unit vector

  PrivacyParams privacy;
  AccuracyParams accuracy;

  std::size_t degree_p = 8;
  double rho = 0.0;  // 0 -> ||mu|| (selftrain) or 1

  server::OptimizerConfig optimizer;
  std::size_t committee_k = 0;

  massart::LhmnConfig lhmn;
  selftrain::StwnConfig stwn;

  std::size_t eval_trials = 100000;

  bool needs_public() const { return pipeline == "massart" || pipeline == "selftrain"; }
  bool is_mixture_pipeline() const {
    return pipeline == "selftrain" || pipeline == "logistic";
  }
};

inline const std::vector<std::string>& valid_pipelines() {
  static const std::vector<std::string> kTags = {"massart", "selftrain", "lhmn", "hinge",
                                                 "logistic"};
  return kTags;
}

// Collects every violation instead of stopping at the first.
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  bool pipeline_known = false;
  for (const auto& tag : valid_pipelines()) pipeline_known |= (tag == c.pipeline);
  if (!pipeline_known) {
    std::string tags;
    for (const auto& t : valid_pipelines()) tags += t + " ";
    bad.push_back("pipeline: unknown tag '" + c.pipeline + "' (valid: " + tags + ")");
  }
  if (c.marginal.dimension == 0) bad.push_back("marginal.d: must be >= 1");
  if (c.privacy.epsilon <= 0.0) bad.push_back("privacy.epsilon: must be positive");
  if (c.privacy.delta <= 0.0 || c.privacy.delta >= 1.0)
    bad.push_back("privacy.delta: must lie in (0,1)");
  if (c.accuracy.alpha <= 0.0 || c.accuracy.alpha >= 1.0)
    bad.push_back("accuracy.alpha: must lie in (0,1)");
  if (c.accuracy.beta <= 0.0 || c.accuracy.beta >= 1.0)
    bad.push_back("accuracy.beta: must lie in (0,1)");
  if (c.trials < 1) bad.push_back("trials: must be >= 1");
  if (c.eval_trials < 100) bad.push_back("evaluate.trials: must be >= 100");
  bool uses_private = c.pipeline != "lhmn";
  if (uses_private && c.n_private == 0) bad.push_back("data.n_private: must be >= 1");
  if (c.needs_public() && c.m_public == 0)
    bad.push_back("data.m_public: required by pipeline '" + c.pipeline + "'");
  if (c.pipeline == "lhmn" && c.m_public == 0)
    bad.push_back("data.m_public: required by pipeline 'lhmn'");
  if (c.is_mixture_pipeline() && c.mu.empty() && c.mu_norm <= 0.0)
    bad.push_back("mixture.mu or mixture.mu_norm: required by pipeline '" + c.pipeline + "'");
  if (c.massart_lambda < 0.0 || c.massart_lambda >= 0.5)
    bad.push_back("massart.lambda: must lie in [0, 1/2)");
  if (!c.w_star.empty() && c.w_star.size() != c.marginal.dimension)
    bad.push_back("data.w_star: dimension does not match marginal.d");
  if (!c.mu.empty() && c.mu.size() != c.marginal.dimension)
    bad.push_back("mixture.mu: dimension does not match marginal.d");
  if (c.committee_k != 0 && c.committee_k % 2 == 0)
    bad.push_back("committee.k: must be odd");
  return bad;
}

inline ExperimentConfig config_from_toml(const toml::Table& t) {
  ExperimentConfig c;
  c.pipeline = t.get_string("pipeline", c.pipeline);
  c.seed = static_cast<std::uint64_t>(t.get_integer("seed", 1));
  c.trials = static_cast<std::size_t>(t.get_integer("trials", 1));
  c.out_dir = t.get_string("out_dir", c.out_dir);

  std::string family = t.get_string("marginal.family", "gaussian_isotropic_truncated");
  c.marginal.family = marginal_family_from_string(family);
  c.marginal.dimension = static_cast<std::size_t>(t.get_integer("marginal.d", 2));
  c.marginal.radius = t.get_number("marginal.R", 0.0);
  c.marginal.U = t.get_number("marginal.U", 1.0);
  c.marginal.r = t.get_number("marginal.r", 1.0);
  c.marginal.K = t.get_number("marginal.K", 1.0);
  c.margin = t.get_number("marginal.margin", 0.0);

  c.mu = t.get_array("mixture.mu", {});
  c.mu_norm = t.get_number("mixture.mu_norm", 0.0);
  c.massart_lambda = t.get_number("massart.lambda", 0.0);

  c.n_private = static_cast<std::size_t>(t.get_integer("data.n_private", 0));
  c.m_public = static_cast<std::size_t>(t.get_integer("data.m_public", 0));
  c.w_star = t.get_array("data.w_star", {});

  c.privacy.epsilon = t.get_number("privacy.epsilon", 1.0);
  c.privacy.delta = t.get_number("privacy.delta", 1e-5);
  c.accuracy.alpha = t.get_number("accuracy.alpha", 0.1);
  c.accuracy.beta = t.get_number("accuracy.beta", 0.05);

  c.degree_p = static_cast<std::size_t>(t.get_integer("encode.p", 8));
  c.rho = t.get_number("encode.rho", 0.0);

  c.optimizer.method =
      server::optimizer_method_from_string(t.get_string("optimizer.method", "sigm"));
  c.optimizer.horizon = static_cast<std::size_t>(t.get_integer("optimizer.T", 0));
  c.optimizer.psgd_eta = t.get_number("optimizer.eta", 0.0);
  c.optimizer.smoothness = t.get_number("optimizer.smoothness", 1.0);
  c.optimizer.noise_scale = t.get_number("optimizer.noise_scale", 0.0);
  c.optimizer.clip = t.get_number("optimizer.clip", 1e6);

  c.committee_k = static_cast<std::size_t>(t.get_integer("committee.k", 0));

  c.lhmn.c1 = t.get_number("lhmn.c1", 1.0);
  c.lhmn.c2 = t.get_number("lhmn.c2", 1.0);
  c.lhmn.c_T = t.get_number("lhmn.c_T", 1.0);
  c.lhmn.c_N = t.get_number("lhmn.c_N", 1.0);
  c.lhmn.T_override = static_cast<std::size_t>(t.get_integer("lhmn.T", 0));
  c.lhmn.N_override = static_cast<std::size_t>(t.get_integer("lhmn.N", 0));
  c.lhmn.eta_override = t.get_number("lhmn.eta", 0.0);

  c.stwn.sigma = t.get_number("stwn.sigma", 0.0);
  c.stwn.B = static_cast<std::size_t>(t.get_integer("stwn.B", 0));
  c.stwn.T = static_cast<std::size_t>(t.get_integer("stwn.T", 0));
  c.stwn.eta = t.get_number("stwn.eta", 0.0);
  c.stwn.loss = selftrain::surrogate_loss_from_string(t.get_string("stwn.loss", "logistic"));
  c.stwn.c_B = t.get_number("stwn.c_B", 1.0);
  c.stwn.c_T = t.get_number("stwn.c_T", 1.0);
  c.stwn.c_eta = t.get_number("stwn.c_eta", 1.0);

  c.eval_trials = static_cast<std::size_t>(t.get_integer("evaluate.trials", 100000));
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig c = config_from_toml(toml::parse_file(path));
  std::vector<std::string> bad = validate_config(c);
  if (!bad.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& b : bad) msg += "\n  - " + b;
    fail(ErrorKind::kConfig, msg);
  }
  return c;
}

// Canonical echo of every field that affects the run (used for the content
// hash, so it must not contain timing).
inline Json config_echo(const ExperimentConfig& c) {
  Json j;
  j["schema"] = 1;
  j["pipeline"] = c.pipeline;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["marginal"] = {{"family", to_string(c.marginal.family)},
                   {"d", c.marginal.dimension},
                   {"R", c.marginal.effective_radius()},
                   {"U", c.marginal.U},
                   {"r", c.marginal.r},
                   {"K", c.marginal.K},
                   {"margin", c.margin}};
  j["mixture"] = {{"mu", c.mu}, {"mu_norm", c.mu_norm}};
  j["massart"] = {{"lambda", c.massart_lambda}};
  j["data"] = {{"n_private", c.n_private}, {"m_public", c.m_public}, {"w_star", c.w_star}};
  j["privacy"] = {{"epsilon", c.privacy.epsilon}, {"delta", c.privacy.delta}};
  j["accuracy"] = {{"alpha", c.accuracy.alpha}, {"beta", c.accuracy.beta}};
  j["encode"] = {{"p", c.degree_p}, {"rho", c.rho}};
  j["optimizer"] = {{"method", to_string(c.optimizer.method)},
                    {"T", c.optimizer.horizon},
                    {"eta", c.optimizer.psgd_eta},
                    {"smoothness", c.optimizer.smoothness},
                    {"noise_scale", c.optimizer.noise_scale},
                    {"clip", c.optimizer.clip}};
  j["committee"] = {{"k", c.committee_k}};
  j["lhmn"] = {{"c1", c.lhmn.c1},       {"c2", c.lhmn.c2},
               {"c_T", c.lhmn.c_T},     {"c_N", c.lhmn.c_N},
               {"T", c.lhmn.T_override}, {"N", c.lhmn.N_override},
               {"eta", c.lhmn.eta_override}};
  j["stwn"] = {{"sigma", c.stwn.sigma}, {"B", c.stwn.B},
               {"T", c.stwn.T},         {"eta", c.stwn.eta},
               {"loss", to_string(c.stwn.loss)}, {"c_B", c.stwn.c_B},
               {"c_T", c.stwn.c_T},     {"c_eta", c.stwn.c_eta}};
  j["evaluate"] = {{"trials", c.eval_trials}};
  return j;
}

// ---------------------------------------------------------------------------
// Single-trial execution
// ---------------------------------------------------------------------------

struct TrialResult {
  Hypothesis final_hypothesis;
  ErrorEstimate final_error;
  // The private-only intermediate model (committee vote / w^priv), measured
  // on the same evaluation sample as the final model.
  std::optional<ErrorEstimate> intermediate_error;
  std::optional<double> min_trajectory_error;
  std::vector<double> error_curve;
  selftrain::Trajectory trajectory;  // self-training runs only
  client::BudgetLedger budget;       // one representative user's ledger
  Json details;
};

namespace detail {

inline Hypothesis resolve_w_star(const ExperimentConfig& c, RngStream data_stream) {
  if (!c.w_star.empty()) {
    return project_unit_sphere(c.w_star);
  }
  RngStream s = data_stream.sub("w_star");
  std::vector<double> v = s.gaussian_vector(c.marginal.dimension);
  return project_unit_sphere(v);
}

inline std::vector<double> resolve_mu(const ExperimentConfig& c) {
  if (!c.mu.empty()) return c.mu;
  std::vector<double> mu = unit_vector(c.marginal.dimension, 0);
  scale_in_place(mu, c.mu_norm);
  return mu;
}

inline std::uint64_t stream_seed(RngStream s) { return s.next_u64(); }

}  // namespace detail

// Runs one trial of the configured pipeline. Substreams are derived as
// (master, name, trial), so trial i's data never depends on how many trials
// run in total.
inline TrialResult run_trial(const ExperimentConfig& config, std::size_t trial) {
  RngStream master = RngStream::root(config.seed);
  RngStream data_stream = master.sub("data").sub(trial);
  RngStream encode_stream = master.sub("encode").sub(trial);
  RngStream optimize_stream = master.sub("optimize").sub(trial);
  RngStream evaluate_stream = master.sub("evaluate").sub(trial);

  TrialResult result;
  const std::size_t d = config.marginal.dimension;

  if (config.pipeline == "massart" || config.pipeline == "hinge" ||
      config.pipeline == "lhmn") {
    Hypothesis w_star = detail::resolve_w_star(config, data_stream);
    EvalModel eval = EvalModel::realizable(config.marginal, w_star);

    if (config.pipeline == "lhmn") {
      Dataset pseudo = sample_realizable(config.marginal, w_star, config.m_public,
                                         detail::stream_seed(data_stream.sub("public")),
                                         config.margin);
      if (config.massart_lambda > 0.0) {
        pseudo = corrupt_massart(pseudo, MassartSpec::constant(config.massart_lambda),
                                 detail::stream_seed(data_stream.sub("massart")));
      }
      massart::LhmnConfig lhmn = config.lhmn;
      lhmn.alpha = config.accuracy.alpha;
      lhmn.beta = config.accuracy.beta;
      lhmn.U = config.marginal.U;
      lhmn.r = config.marginal.r;
      lhmn.R = config.marginal.effective_radius();
      if (lhmn.T_override == 0) {
        std::size_t n_sel = lhmn.N_override > 0 ? lhmn.N_override
                                                : lhmn.N(std::max<std::size_t>(pseudo.size(), 2));
        require(pseudo.size() > n_sel, ErrorKind::kInvalidInput,
                "public dataset smaller than the selection block N");
        lhmn.T_override = pseudo.size() - n_sel;
      }
      massart::LhmnDiagnostics diag;
      result.final_hypothesis =
          massart::lhmn_train(pseudo, lhmn, detail::stream_seed(optimize_stream), &diag);
      result.final_error = monte_carlo_error(result.final_hypothesis, eval,
                                             config.eval_trials,
                                             detail::stream_seed(evaluate_stream));
      result.details = {{"lhmn_T", diag.T},
                        {"lhmn_N", diag.N},
                        {"lhmn_sigma", diag.sigma},
                        {"lhmn_eta", diag.eta},
                        {"degenerate_resets", diag.degenerate_resets}};
      return result;
    }

    Dataset private_data =
        sample_realizable(config.marginal, w_star, config.n_private,
                          detail::stream_seed(data_stream.sub("private")), config.margin);
    if (config.massart_lambda > 0.0) {
      private_data =
          corrupt_massart(private_data, MassartSpec::constant(config.massart_lambda),
                          detail::stream_seed(data_stream.sub("massart")));
    }

    if (config.pipeline == "hinge") {
      massart::BuildOracleConfig oracle_cfg;
      oracle_cfg.privacy = config.privacy;
      oracle_cfg.committee_k = 1;
      oracle_cfg.beta = config.accuracy.beta;
      oracle_cfg.degree_p = config.degree_p;
      oracle_cfg.optimizer = config.optimizer;
      massart::Committee committee = massart::build_oracle(
          private_data, oracle_cfg, detail::stream_seed(encode_stream));
      result.final_hypothesis = committee.members.front();
      result.final_error = monte_carlo_error(result.final_hypothesis, eval,
                                             config.eval_trials,
                                             detail::stream_seed(evaluate_stream));
      Example probe = private_data.examples.front();
      probe.x = scaled(probe.x, 1.0 / private_data.radius);
      result.budget = client::budget_report(
          client::hinge_encode(probe, config.privacy, config.degree_p,
                               encode_stream.sub("budget_probe")),
          config.privacy.delta);
      return result;
    }

    // Full Massart pipeline.
    Dataset public_data = strip_labels(
        sample_realizable(config.marginal, w_star, config.m_public,
                          detail::stream_seed(data_stream.sub("public")), config.margin));
    Dataset truth_eval = eval.sample(config.eval_trials,
                                     detail::stream_seed(evaluate_stream.sub("holdout")));

    massart::MassartPipelineConfig pipe;
    pipe.oracle.privacy = config.privacy;
    pipe.oracle.committee_k = config.committee_k;
    pipe.oracle.beta = config.accuracy.beta;
    pipe.oracle.degree_p = config.degree_p;
    pipe.oracle.optimizer = config.optimizer;
    pipe.lhmn = config.lhmn;
    pipe.lhmn.alpha = config.accuracy.alpha;
    pipe.lhmn.beta = config.accuracy.beta;
    pipe.lhmn.U = config.marginal.U;
    pipe.lhmn.r = config.marginal.r;
    pipe.lhmn.R = config.marginal.effective_radius();
    pipe.seed = detail::stream_seed(optimize_stream);

    massart::MassartPipelineResult pr =
        massart::run_massart_pipeline(private_data, public_data, pipe, &truth_eval);
    result.final_hypothesis = pr.hypothesis;
    result.final_error = monte_carlo_error(pr.hypothesis, eval, config.eval_trials,
                                           detail::stream_seed(evaluate_stream));
    result.intermediate_error =
        error_estimate_from_counts(static_cast<std::size_t>(std::llround(
                                       pr.report.committee_error_estimate *
                                       static_cast<double>(truth_eval.size()))),
                                   truth_eval.size());
    Example probe = private_data.examples.front();
    probe.x = scaled(probe.x, 1.0 / private_data.radius);
    result.budget = client::budget_report(
        client::hinge_encode(probe, config.privacy, config.degree_p,
                             encode_stream.sub("budget_probe")),
        config.privacy.delta);
    result.details = {{"committee_k", pr.report.committee_k},
                      {"group_size", pr.report.group_size},
                      {"lhmn_T", pr.report.lhmn_T},
                      {"lhmn_N", pr.report.lhmn_N},
                      {"lhmn_sigma", pr.report.lhmn_sigma},
                      {"lhmn_eta", pr.report.lhmn_eta},
                      {"clip_events", pr.report.clip_events},
                      {"committee_error", pr.report.committee_error_estimate},
                      {"final_error_holdout", pr.report.final_error_estimate}};
    return result;
  }

  // Mixture pipelines.
  std::vector<double> mu = detail::resolve_mu(config);
  MixtureSpec mixture;
  mixture.mu = mu;
  mixture.base = config.marginal;
  EvalModel eval = EvalModel::mixture_model(mixture);
  double rho = config.rho > 0.0 ? config.rho : std::max(norm2(mu), 1e-6);

  Dataset private_data = sample_mixture(mixture, config.n_private,
                                        detail::stream_seed(data_stream.sub("private")));

  selftrain::PseudoLabelerConfig labeler;
  labeler.privacy = config.privacy;
  labeler.rho = rho;
  labeler.degree_p = config.degree_p;
  labeler.U = config.marginal.U;
  labeler.r = config.marginal.r;
  labeler.optimizer = config.optimizer;

  if (config.pipeline == "logistic") {
    selftrain::PseudoLabelerDiagnostics diag;
    result.final_hypothesis = selftrain::pseudo_labeler_train(
        private_data, labeler, detail::stream_seed(encode_stream), &diag);
    result.final_error = monte_carlo_error(result.final_hypothesis, eval,
                                           config.eval_trials,
                                           detail::stream_seed(evaluate_stream));
    result.budget = client::budget_report(
        client::logistic_encode(private_data.examples.front(), config.privacy,
                                config.degree_p, private_data.radius,
                                encode_stream.sub("budget_probe")),
        config.privacy.delta);
    result.details = {{"c_err", diag.c_err},
                      {"target_excess_risk", diag.target_excess_risk},
                      {"clip_events", diag.clip_events}};
    return result;
  }

  // Full self-training pipeline.
  Dataset public_data = strip_labels(sample_mixture(
      mixture, config.m_public, detail::stream_seed(data_stream.sub("public"))));
  Dataset truth_eval = eval.sample(config.eval_trials,
                                   detail::stream_seed(evaluate_stream.sub("holdout")));

  selftrain::SelftrainPipelineConfig pipe;
  pipe.labeler = labeler;
  pipe.stwn = config.stwn;
  pipe.stwn.alpha = config.accuracy.alpha;
  pipe.stwn.beta = config.accuracy.beta;
  pipe.stwn.rho = rho;
  pipe.K = config.marginal.K;
  pipe.mu_norm = norm2(mu);
  pipe.seed = detail::stream_seed(optimize_stream);

  selftrain::SelftrainPipelineResult pr =
      selftrain::run_selftrain_pipeline(private_data, public_data, pipe, &truth_eval);
  result.trajectory = pr.trajectory;

  result.final_hypothesis = selftrain::pick_best_iterate(pr.trajectory, truth_eval);
  result.final_error = monte_carlo_error(result.final_hypothesis, eval, config.eval_trials,
                                         detail::stream_seed(evaluate_stream));
  result.intermediate_error = monte_carlo_error(pr.pseudo_labeler, eval, config.eval_trials,
                                                detail::stream_seed(evaluate_stream));
  result.min_trajectory_error = pr.report.min_trajectory_error;
  result.error_curve = pr.report.error_curve;
  result.budget = client::budget_report(
      client::logistic_encode(private_data.examples.front(), config.privacy, config.degree_p,
                              private_data.radius, encode_stream.sub("budget_probe")),
      config.privacy.delta);
  result.details = {{"c_err", pr.report.c_err},
                    {"stwn_T", pr.report.stwn_T},
                    {"stwn_B", pr.report.stwn_B},
                    {"stwn_sigma", pr.report.stwn_sigma},
                    {"stwn_eta", pr.report.stwn_eta},
                    {"mean_norm_condition_checked", pr.report.mean_norm_condition_checked},
                    {"mean_norm_condition_ok", pr.report.mean_norm_condition_ok},
                    {"mean_norm_required", pr.report.mean_norm_required},
                    {"pseudo_labeler_error", pr.report.pseudo_labeler_error_estimate},
                    {"best_iterate", pr.report.best_iterate}};
  return result;
}

// ---------------------------------------------------------------------------
// run(): full experiment with trials, persisted RunReport
// ---------------------------------------------------------------------------

struct RunOutput {
  Json report;
  std::vector<TrialResult> trial_results;
};

inline Json error_to_json(const ErrorEstimate& e) {
  return Json{{"estimate", e.estimate}, {"ci_halfwidth", e.ci_halfwidth}, {"trials", e.trials}};
}

inline RunOutput run(const ExperimentConfig& config) {
  std::vector<std::string> bad = validate_config(config);
  if (!bad.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& b : bad) msg += "\n  - " + b;
    fail(ErrorKind::kConfig, msg);
  }

  auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  Json trials_json = Json::array();
  double error_sum = 0.0;
  double worst_ci = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    TrialResult tr = run_trial(config, t);
    Json tj;
    tj["trial"] = t;
    tj["final_error"] = error_to_json(tr.final_error);
    if (tr.intermediate_error.has_value())
      tj["intermediate_error"] = error_to_json(*tr.intermediate_error);
    if (tr.min_trajectory_error.has_value())
      tj["min_trajectory_error"] = *tr.min_trajectory_error;
    tj["details"] = tr.details;
    trials_json.push_back(tj);
    error_sum += tr.final_error.estimate;
    worst_ci = std::max(worst_ci, tr.final_error.ci_halfwidth);
    out.trial_results.push_back(std::move(tr));
  }
  auto t1 = std::chrono::steady_clock::now();

  Json report;
  report["schema"] = 1;
  report["config"] = config_echo(config);
  report["trials"] = trials_json;
  report["final_error"] = {
      {"estimate", error_sum / static_cast<double>(config.trials)},
      {"ci_halfwidth", worst_ci}};
  const client::BudgetLedger& ledger = out.trial_results.front().budget;
  report["budget"] = {{"releases", ledger.releases.size()},
                      {"total_epsilon", ledger.total_epsilon()},
                      {"total_delta", ledger.total_delta()}};
  report["content_hash"] = sha1_hex(report.dump());
  // Timing is attached after hashing: identical runs produce identical
  // hashes and identical reports up to this one field.
  report["wall_clock_seconds"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
  out.report = std::move(report);
  return out;
}

inline void persist_run(const RunOutput& out, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  write_text_file(config.out_dir + "/run_report.json", out.report.dump(2) + "\n");
  const TrialResult& first = out.trial_results.front();
  write_text_file(config.out_dir + "/hypothesis.json",
                  hypothesis_to_json(first.final_hypothesis,
                                     Json{{"pipeline", config.pipeline}, {"trial", 0}})
                          .dump(2) +
                      "\n");
  if (!first.error_curve.empty()) {
    std::string csv = "schema,iterate,error\n";
    for (std::size_t i = 0; i < first.error_curve.size(); ++i) {
      csv += "1," + std::to_string(i) + "," + format_double(first.error_curve[i]) + "\n";
    }
    write_text_file(config.out_dir + "/error_curve.csv", csv);
  }
  if (!first.trajectory.iterates.empty()) {
    write_text_file(config.out_dir + "/trajectory.jsonl",
                    trajectory_to_jsonl(first.trajectory));
  }
  // Per-stage diagnostics as a flat key/value learning log.
  std::string log = "schema,trial,key,value\n";
  for (std::size_t t = 0; t < out.trial_results.size(); ++t) {
    const TrialResult& tr = out.trial_results[t];
    log += "1," + std::to_string(t) + ",final_error," + format_double(tr.final_error.estimate) +
           "\n";
    if (tr.intermediate_error.has_value()) {
      log += "1," + std::to_string(t) + ",intermediate_error," +
             format_double(tr.intermediate_error->estimate) + "\n";
    }
    for (const auto& [key, value] : tr.details.items()) {
      log += "1," + std::to_string(t) + "," + key + "," +
             (value.is_number() ? format_double(value.get<double>()) : value.dump()) + "\n";
    }
  }
  write_text_file(config.out_dir + "/learning_log.csv", log);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& valid_sweep_axes() {
  static const std::vector<std::string> kAxes = {"n", "m", "epsilon", "d", "mu_norm"};
  return kAxes;
}

inline ExperimentConfig apply_axis(ExperimentConfig config, const std::string& axis,
                                   double value) {
  if (axis == "n") {
    config.n_private = static_cast<std::size_t>(value);
  } else if (axis == "m") {
    config.m_public = static_cast<std::size_t>(value);
  } else if (axis == "epsilon") {
    config.privacy.epsilon = value;
  } else if (axis == "d") {
    config.marginal.dimension = static_cast<std::size_t>(value);
    config.w_star.clear();  // redrawn at the new dimension
    config.mu.clear();
  } else if (axis == "mu_norm") {
    config.mu_norm = value;
    config.mu.clear();
  } else {
    std::string axes;
    for (const auto& a : valid_sweep_axes()) axes += a + " ";
    fail(ErrorKind::kConfig, "unknown sweep axis '" + axis + "' (valid: " + axes + ")");
  }
  return config;
}

struct SweepRow {
  double value = 0.0;
  std::size_t trial = 0;
  std::string status;  // "ok" or the error kind
  double error = 0.0;
  double ci = 0.0;
  double runtime_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string csv;
};

// One row per (grid point, trial); failed runs become rows tagged with the
// error kind and the sweep keeps going. A summary row per grid point
// aggregates the successful trials.
inline SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                         const std::vector<double>& grid) {
  require(!grid.empty(), ErrorKind::kInvalidInput, "sweep grid must be nonempty");
  SweepResult result;
  std::string csv =
      "schema,axis,value,trial,status,error,ci_halfwidth,runtime_seconds\n";
  for (double value : grid) {
    ExperimentConfig config = apply_axis(base, axis, value);
    double sum = 0.0, worst_ci = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < base.trials; ++t) {
      SweepRow row;
      row.value = value;
      row.trial = t;
      auto s0 = std::chrono::steady_clock::now();
      try {
        std::vector<std::string> bad = validate_config(config);
        if (!bad.empty()) fail(ErrorKind::kConfig, bad.front());
        TrialResult tr = run_trial(config, t);
        row.status = "ok";
        row.error = tr.final_error.estimate;
        row.ci = tr.final_error.ci_halfwidth;
        sum += row.error;
        worst_ci = std::max(worst_ci, row.ci);
        ++ok;
      } catch (const Error& e) {
        row.status = to_string(e.kind());
      }
      auto s1 = std::chrono::steady_clock::now();
      row.runtime_seconds =
          std::chrono::duration_cast<std::chrono::milliseconds>(s1 - s0).count() / 1000.0;
      csv += "1," + axis + "," + format_double(value) + "," + std::to_string(t) + "," +
             row.status + "," + format_double(row.error) + "," + format_double(row.ci) +
             "," + format_double(row.runtime_seconds) + "\n";
      result.rows.push_back(row);
    }
    double mean = ok > 0 ? sum / static_cast<double>(ok) : 0.0;
    csv += "1," + axis + "," + format_double(value) + ",summary,ok=" + std::to_string(ok) +
           "," + format_double(mean) + "," + format_double(worst_ci) + ",0\n";
  }
  result.csv = std::move(csv);
  return result;
}

}  // namespace nldp::harness
