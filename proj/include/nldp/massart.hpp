#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/ldp_client.hpp"
#include "nldp/ldp_server.hpp"
#include "nldp/parallel.hpp"
#include "nldp/poly.hpp"
#include "nldp/rng.hpp"
#include "nldp/vec.hpp"

namespace nldp::massart {

// ---------------------------------------------------------------------------
// Committee / majority vote
// ---------------------------------------------------------------------------

struct Committee {
  std::vector<Hypothesis> members;

  std::size_t size() const { return members.size(); }

  void validate() const {
    require(!members.empty() && members.size() % 2 == 1, ErrorKind::kInvalidInput,
            "committee size must be odd");
    for (const Hypothesis& m : members)
      require(norm2(m.w) <= 1.0 + 1e-9, ErrorKind::kInvalidInput,
              "committee members must lie in the unit ball");
  }
};

// Smallest odd k with 2*exp(-k/32) <= beta/2, i.e. k >= 32*ln(4/beta).
inline std::size_t default_committee_size(double beta) {
  require(beta > 0.0 && beta < 1.0, ErrorKind::kConfig, "beta must lie in (0,1)");
  double k = 32.0 * std::log(4.0 / beta);
  auto n = static_cast<std::size_t>(std::ceil(k));
  if (n % 2 == 0) ++n;
  if (n < 1) n = 1;
  return n;
}

// Majority label among member predictions; k odd makes ties impossible.
inline int vote(const Committee& committee, std::span<const double> x) {
  require(!committee.members.empty() && committee.members.size() % 2 == 1,
          ErrorKind::kInvalidInput, "committee size must be odd");
  int sum = 0;
  for (const Hypothesis& m : committee.members) sum += classify(m, x);
  return sum > 0 ? +1 : -1;
}

// Disjoint random groups of size floor(n/k); leftovers are discarded.
inline std::vector<Dataset> split_groups(const Dataset& data, std::size_t k,
                                         std::uint64_t seed) {
  require(k >= 1 && k % 2 == 1, ErrorKind::kInvalidInput, "group count must be odd");
  require(data.size() >= k, ErrorKind::kInvalidInput,
          "need at least k examples to form k groups");
  std::size_t group_size = data.size() / k;
  std::vector<std::size_t> order = RngStream::root(seed).sub("split_groups").permutation(data.size());
  std::vector<Dataset> groups(k);
  for (std::size_t g = 0; g < k; ++g) {
    groups[g].dimension = data.dimension;
    groups[g].radius = data.radius;
    groups[g].kind = data.kind;
    groups[g].examples.reserve(group_size);
    for (std::size_t i = 0; i < group_size; ++i) {
      groups[g].examples.push_back(data.examples[order[g * group_size + i]]);
    }
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Private stage: committee of H_priv learners
// ---------------------------------------------------------------------------

struct BuildOracleConfig {
  PrivacyParams privacy;
  std::size_t committee_k = 0;  // 0 -> default_committee_size(beta)
  double beta = 0.05;
  std::size_t degree_p = 8;
  server::OptimizerConfig optimizer;  // horizon/dimension are filled per group
};

struct BuildOracleDiagnostics {
  std::size_t group_size = 0;
  std::size_t clip_events = 0;
  double gradient_scale_estimate = 0.0;
};

// Normalize each group by R, encode every example once with the hinge
// mechanism, and train one committee member per group. Encoding happens
// lazily inside the training loop, so a report exists only while its single
// consumer needs it.
inline Committee build_oracle(const Dataset& private_data, const BuildOracleConfig& config,
                              std::uint64_t seed, BuildOracleDiagnostics* diag = nullptr) {
  require(private_data.kind == DatasetKind::kPrivate, ErrorKind::kContractViolation,
          "build_oracle consumes private data");
  config.privacy.validate();
  std::size_t k = config.committee_k == 0 ? default_committee_size(config.beta)
                                          : config.committee_k;
  std::vector<Dataset> groups = split_groups(private_data, k, seed);
  require(!groups.front().empty(), ErrorKind::kInvalidInput,
          "group size is zero; need n >= k");

  // The mechanism's target excess hinge risk for each member is 1/(32R);
  // beta = alpha/4 smooths the hinge the Bernstein polynomial approximates.
  double alpha_t = 1.0 / (32.0 * private_data.radius);
  poly::BernsteinApprox approx =
      poly::bernstein_build(alpha_t / 4.0, private_data.radius, config.degree_p);

  double sigma_base = client::hinge_sigma_base(config.privacy);
  double sigma_copy = client::hinge_sigma_copy(config.privacy, config.degree_p);
  double scale_est = server::hinge_gradient_scale_estimate(approx, sigma_base, sigma_copy,
                                                           private_data.dimension);
  if (config.optimizer.clip > 0.0) scale_est = std::min(scale_est, config.optimizer.clip);

  RngStream encode_root = RngStream::root(seed).sub("encode");
  Committee committee;
  committee.members.resize(k);
  for (std::size_t g = 0; g < k; ++g) {
    const Dataset& group = groups[g];
    RngStream group_stream = encode_root.sub(g);
    server::HingeReportProvider provider = [&](std::size_t i) {
      Example normalized;
      normalized.x = scaled(group.examples[i].x, 1.0 / private_data.radius);
      normalized.y = group.examples[i].y;
      return client::hinge_encode(normalized, config.privacy, config.degree_p,
                                  group_stream.sub(i));
    };
    server::OptimizerConfig opt = config.optimizer;
    opt.dimension = private_data.dimension;
    if (opt.horizon == 0) opt.horizon = group.size();
    if (opt.noise_hint <= 1.0) opt.noise_hint = scale_est;
    if (opt.method == server::OptimizerMethod::kSigm && opt.noise_scale <= 0.0) {
      opt.noise_scale = scale_est / opt.radius;
    }
    server::TrainDiagnostics train_diag;
    committee.members[g] = server::hinge_nldp_train(group.size(), provider, approx, opt,
                                                    seed ^ (0x9e37u + g), &train_diag);
    if (diag) diag->clip_events += train_diag.optimizer.clip_events;
  }
  if (diag) {
    diag->group_size = groups.front().size();
    diag->gradient_scale_estimate = scale_est;
  }
  return committee;
}

// D-hat: public points labeled by the committee vote.
inline Dataset label_public(const Committee& committee, const Dataset& public_data) {
  require(public_data.kind == DatasetKind::kPublicUnlabeled, ErrorKind::kContractViolation,
          "label_public consumes public_unlabeled data");
  committee.validate();
  Dataset out = public_data;
  out.kind = DatasetKind::kPseudoLabeled;
  for (Example& e : out.examples) e.y = vote(committee, e.x);
  return out;
}

// ---------------------------------------------------------------------------
// LHMN: normalized SGD on the sigmoid loss, then 0-1 selection
// ---------------------------------------------------------------------------

// g(w; (x,y)) = S_sigma(-y <w,x>/||w||) with S_sigma(t) = 1/(1+e^{-t/sigma}).
inline double sigmoid_loss(const Hypothesis& w, std::span<const double> x, int y,
                           double sigma) {
  double nw = norm2(w.w);
  require(nw >= 1e-12, ErrorKind::kDegenerateVector, "sigmoid_loss: ||w|| is near zero");
  double u = -static_cast<double>(y) * dot(w.w, x) / nw;
  double t = u / sigma;
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// Closed-form gradient; tangent to the sphere through w because g is
// scale-invariant in w.
inline std::vector<double> sigmoid_loss_grad(const Hypothesis& w, std::span<const double> x,
                                             int y, double sigma) {
  double nw = norm2(w.w);
  require(nw >= 1e-12, ErrorKind::kDegenerateVector, "sigmoid_loss_grad: ||w|| is near zero");
  double wx = dot(w.w, x);
  double u = -static_cast<double>(y) * wx / nw;
  double t = u / sigma;
  double s = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  double sprime = s * (1.0 - s) / sigma;  // S'_sigma(u), computed stably
  // d/dw u = -y (x/||w|| - <w,x> w/||w||^3)
  std::vector<double> grad = scaled(x, 1.0 / nw);
  axpy(grad, -wx / (nw * nw * nw), w.w);
  scale_in_place(grad, -static_cast<double>(y) * sprime);
  return grad;
}

struct LhmnConfig {
  double alpha = 0.1;
  double beta = 0.05;
  double U = 1.0;
  double r = 1.0;
  double R = 1.0;
  // Theta constants; the derived values below recompute from these.
  double c1 = 1.0;
  double c2 = 1.0;
  double c_T = 1.0;
  double c_N = 1.0;
  // Direct overrides for the sample budget (0 -> formula value).
  std::size_t T_override = 0;
  std::size_t N_override = 0;
  // The formula step grows with d and collapses for desk-scale T; an
  // override is exposed because the formula value freezes the iterate at
  // practical sizes.
  double eta_override = 0.0;

  double C1() const { return c1 * std::pow(U, 12) / std::pow(r, 12); }
  double C2() const { return c2 * r / (U * U); }
  double sigma() const { return C2() * alpha / (std::sqrt(2.0) * R * R); }

  std::size_t T(std::size_t dimension) const {
    if (T_override > 0) return T_override;
    double t = c_T * C1() * static_cast<double>(dimension) * std::pow(R, 8) *
               std::log(1.0 / beta) / std::pow(alpha, 4);
    return static_cast<std::size_t>(std::ceil(t));
  }

  std::size_t N(std::size_t T_steps) const {
    if (N_override > 0) return N_override;
    double n = c_N * std::log(static_cast<double>(T_steps) / beta) / (alpha * alpha);
    return static_cast<std::size_t>(std::ceil(n));
  }

  double eta(std::size_t dimension, std::size_t T_steps) const {
    if (eta_override > 0.0) return eta_override;
    return C2() * C2() * static_cast<double>(dimension) * alpha * alpha /
           (8.0 * std::pow(R, 4) * std::sqrt(static_cast<double>(T_steps)));
  }

  void validate() const {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::kConfig, "lhmn alpha must lie in (0,1)");
    require(beta > 0.0 && beta < 1.0, ErrorKind::kConfig, "lhmn beta must lie in (0,1)");
    require(U >= 1.0 && r > 0.0 && R > 0.0, ErrorKind::kConfig, "lhmn U, r, R must be positive");
  }
};

struct LhmnDiagnostics {
  std::size_t T = 0;
  std::size_t N = 0;
  double sigma = 0.0;
  double eta = 0.0;
  std::size_t degenerate_resets = 0;
  std::size_t best_candidate_index = 0;  // tie-broken argmin over L
  std::size_t best_validation_mistakes = 0;
};

// One pass of normalized SGD over the first T examples (after a seeded
// shuffle), then empirical 0-1 selection over the candidate list
// L = (+w^(1), -w^(1), +w^(2), -w^(2), ...) on the next N examples. The
// shuffle keeps the "fresh samples" of the selection step disjoint from the
// SGD stream.
inline Hypothesis lhmn_train(const Dataset& pseudo, const LhmnConfig& config,
                             std::uint64_t seed, LhmnDiagnostics* diag = nullptr) {
  config.validate();
  require(pseudo.labeled(), ErrorKind::kContractViolation,
          "lhmn_train requires labeled (pseudo-labeled) data");
  const std::size_t d = pseudo.dimension;
  const std::size_t T = config.T(d);
  const std::size_t N = config.N(T);
  require(pseudo.size() >= T + N, ErrorKind::kInvalidInput,
          "lhmn_train needs at least T+N = " + std::to_string(T + N) + " examples, got " +
              std::to_string(pseudo.size()));
  const double sigma = config.sigma();
  const double eta = config.eta(d, T);

  std::vector<std::size_t> order = RngStream::root(seed).sub("lhmn_shuffle").permutation(pseudo.size());

  Hypothesis w;
  w.w = unit_vector(d, 0);  // e_1
  std::size_t resets = 0;
  std::vector<std::vector<double>> iterates;
  iterates.reserve(T);
  for (std::size_t i = 0; i < T; ++i) {
    const Example& e = pseudo.examples[order[i]];
    std::vector<double> grad = sigmoid_loss_grad(w, e.x, e.y, sigma);
    axpy(w.w, -eta, grad);
    double n = norm2(w.w);
    if (n < 1e-12) {
      w.w = unit_vector(d, 0);
      ++resets;
    } else {
      scale_in_place(w.w, 1.0 / n);
    }
    iterates.push_back(w.w);
  }

  // Selection: candidate 2i is +w^(i+1), candidate 2i+1 is -w^(i+1); ties go
  // to the lowest index. err(-w) is derived from the same inner products.
  // The validation block is flattened once; candidates are scanned in
  // parallel chunks whose partial winners are merged in chunk order, so the
  // tie rule holds regardless of the worker count.
  std::vector<double> vx(N * d);
  std::vector<int> vy(N);
  for (std::size_t j = 0; j < N; ++j) {
    const Example& e = pseudo.examples[order[T + j]];
    std::copy(e.x.begin(), e.x.end(), vx.begin() + j * d);
    vy[j] = e.y;
  }
  struct Best {
    std::size_t mistakes = std::numeric_limits<std::size_t>::max();
    std::size_t index = 0;
  };
  std::size_t workers = std::max<std::size_t>(1, std::min(worker_count(), T));
  std::vector<Best> chunk_best(workers);
  parallel_chunks(T, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Best local;
    for (std::size_t i = begin; i < end; ++i) {
      const double* w_i = iterates[i].data();
      std::size_t plus = 0, minus = 0;
      const double* row = vx.data();
      for (std::size_t j = 0; j < N; ++j, row += d) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += w_i[c] * row[c];
        if (sign_pm1(s) != vy[j]) ++plus;
        if (sign_pm1(-s) != vy[j]) ++minus;
      }
      if (plus < local.mistakes) local = {plus, 2 * i};
      if (minus < local.mistakes) local = {minus, 2 * i + 1};
    }
    chunk_best[chunk % workers] = local;
  });
  std::size_t best_index = 0;
  std::size_t best_mistakes = std::numeric_limits<std::size_t>::max();
  for (const Best& b : chunk_best) {
    if (b.mistakes < best_mistakes ||
        (b.mistakes == best_mistakes && b.index < best_index)) {
      best_mistakes = b.mistakes;
      best_index = b.index;
    }
  }

  Hypothesis out;
  out.w = iterates[best_index / 2];
  if (best_index % 2 == 1) scale_in_place(out.w, -1.0);
  if (diag) {
    diag->T = T;
    diag->N = N;
    diag->sigma = sigma;
    diag->eta = eta;
    diag->degenerate_resets = resets;
    diag->best_candidate_index = best_index;
    diag->best_validation_mistakes = best_mistakes;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The Massart-oracle pipeline end to end
// ---------------------------------------------------------------------------

struct MassartPipelineConfig {
  BuildOracleConfig oracle;
  LhmnConfig lhmn;
  std::uint64_t seed = 1;
  // Test hook: skip the private stage and label with this committee instead.
  std::optional<Committee> injected_committee;
};

struct MassartRunReport {
  std::size_t committee_k = 0;
  std::size_t group_size = 0;
  std::size_t lhmn_T = 0;
  std::size_t lhmn_N = 0;
  double lhmn_sigma = 0.0;
  double lhmn_eta = 0.0;
  std::size_t clip_events = 0;
  std::size_t degenerate_resets = 0;
  // Estimates against a held-out labeled sample, when one is supplied.
  double committee_error_estimate = std::numeric_limits<double>::quiet_NaN();
  double pseudo_label_noise_estimate = std::numeric_limits<double>::quiet_NaN();
  double final_error_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct MassartPipelineResult {
  Hypothesis hypothesis;
  MassartRunReport report;
};

// build_oracle -> label_public -> lhmn_train. `truth_eval`, when given, is a
// fresh labeled sample used only for the report's error estimates.
inline MassartPipelineResult run_massart_pipeline(const Dataset& private_data,
                                                  const Dataset& public_data,
                                                  const MassartPipelineConfig& config,
                                                  const Dataset* truth_eval = nullptr) {
  MassartPipelineResult result;
  Committee committee;
  BuildOracleDiagnostics oracle_diag;
  if (config.injected_committee.has_value()) {
    committee = *config.injected_committee;
    committee.validate();
  } else {
    committee = build_oracle(private_data, config.oracle, config.seed, &oracle_diag);
  }
  result.report.committee_k = committee.size();
  result.report.group_size = oracle_diag.group_size;
  result.report.clip_events = oracle_diag.clip_events;

  Dataset pseudo = label_public(committee, public_data);

  // The pipeline hands the whole labeled public set to LHMN, so when no
  // explicit step budget is configured the pipeline fills it: T = m - N.
  LhmnConfig lhmn = config.lhmn;
  if (lhmn.T_override == 0) {
    std::size_t n_sel = lhmn.N_override > 0
                            ? lhmn.N_override
                            : lhmn.N(std::max<std::size_t>(pseudo.size(), 2));
    require(pseudo.size() > n_sel, ErrorKind::kInvalidInput,
            "public dataset smaller than the selection block N");
    lhmn.T_override = pseudo.size() - n_sel;
  }

  LhmnDiagnostics lhmn_diag;
  result.hypothesis = lhmn_train(pseudo, lhmn, config.seed ^ 0x4c484d4eULL, &lhmn_diag);
  result.report.lhmn_T = lhmn_diag.T;
  result.report.lhmn_N = lhmn_diag.N;
  result.report.lhmn_sigma = lhmn_diag.sigma;
  result.report.lhmn_eta = lhmn_diag.eta;
  result.report.degenerate_resets = lhmn_diag.degenerate_resets;

  if (truth_eval != nullptr && truth_eval->labeled() && !truth_eval->empty()) {
    std::size_t vote_wrong = 0;
    for (std::size_t i = 0; i < truth_eval->size(); ++i) {
      if (vote(committee, truth_eval->point(i)) != truth_eval->label(i)) ++vote_wrong;
    }
    double vote_err = static_cast<double>(vote_wrong) / static_cast<double>(truth_eval->size());
    result.report.committee_error_estimate = vote_err;
    result.report.pseudo_label_noise_estimate = vote_err;
    result.report.final_error_estimate = classification_error(result.hypothesis, *truth_eval);
  }
  return result;
}

}  // namespace nldp::massart
