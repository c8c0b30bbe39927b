#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/rng.hpp"
#include "nldp/vec.hpp"

namespace nldp {

enum class MarginalFamily {
  kGaussianIsotropicTruncated,
  kUniformBallIsotropic,
  kLaplaceProductIsotropic,
};

inline const char* to_string(MarginalFamily f) {
  switch (f) {
    case MarginalFamily::kGaussianIsotropicTruncated: return "gaussian_isotropic_truncated";
    case MarginalFamily::kUniformBallIsotropic: return "uniform_ball_isotropic";
    case MarginalFamily::kLaplaceProductIsotropic: return "laplace_product_isotropic";
  }
  return "unknown";
}

inline MarginalFamily marginal_family_from_string(const std::string& s) {
  if (s == "gaussian_isotropic_truncated") return MarginalFamily::kGaussianIsotropicTruncated;
  if (s == "uniform_ball_isotropic") return MarginalFamily::kUniformBallIsotropic;
  if (s == "laplace_product_isotropic") return MarginalFamily::kLaplaceProductIsotropic;
  fail(ErrorKind::kConfig, "unknown marginal family '" + s + "'");
}

// An isotropic structured marginal over B(R) in R^d. U, r, K are the
// anti-concentration / anti-anti-concentration / sub-exponential parameters
// the downstream learners consume. For the built-in families these are
// recorded as the conventional Theta(1) defaults (U = r = K = 1), not
// verified constants.
struct MarginalSpec {
  MarginalFamily family = MarginalFamily::kGaussianIsotropicTruncated;
  std::size_t dimension = 2;
  double radius = 0.0;  // 0 -> family default
  double U = 1.0;
  double r = 1.0;
  double K = 1.0;

  // Default radii keep the marginals near-isotropic: the Gaussian and
  // Laplace tails essentially never reach 2*sqrt(d), and the uniform ball is
  // exactly isotropic at sqrt(d+2).
  double effective_radius() const {
    if (radius > 0.0) return radius;
    double d = static_cast<double>(dimension);
    if (family == MarginalFamily::kUniformBallIsotropic) return std::sqrt(d + 2.0);
    return 2.0 * std::sqrt(d);
  }

  void validate() const {
    require(dimension > 0, ErrorKind::kConfig, "marginal dimension must be positive");
    require(U >= 1.0, ErrorKind::kConfig, "marginal U must be >= 1");
    require(r > 0.0, ErrorKind::kConfig, "marginal r must be positive");
    require(K > 0.0, ErrorKind::kConfig, "marginal K must be positive");
    require(effective_radius() > 0.0, ErrorKind::kConfig, "marginal radius must be positive");
  }
};

// x = z + y*mu with balanced labels y and isotropic base z.
struct MixtureSpec {
  std::vector<double> mu;
  MarginalSpec base;

  void validate() const {
    base.validate();
    require(mu.size() == base.dimension, ErrorKind::kConfig,
            "mixture mean dimension does not match base dimension");
  }
};

// Per-point label-flip model: each label flips independently with
// probability lambda(x) <= lambda_max < 1/2.
struct MassartSpec {
  std::function<double(std::span<const double>)> lambda_fn;
  double lambda_max = 0.0;

  static MassartSpec constant(double lambda) {
    MassartSpec s;
    s.lambda_fn = [lambda](std::span<const double>) { return lambda; };
    s.lambda_max = lambda;
    return s;
  }

  void validate() const {
    require(static_cast<bool>(lambda_fn), ErrorKind::kConfig, "massart lambda_fn not set");
    require(lambda_max >= 0.0 && lambda_max < 0.5, ErrorKind::kConfig,
            "massart lambda_max must lie in [0, 1/2)");
  }
};

// Diagnostics from a sampler run, e.g. how often the truncation loop had to
// retry.
struct SampleStats {
  std::uint64_t draws = 0;
  std::uint64_t rejected = 0;

  double rejection_rate() const {
    return draws == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(draws);
  }
};

namespace detail {

// One draw from the base marginal, resampled (not clipped) into B(R) so the
// shape stays near-isotropic.
inline std::vector<double> draw_marginal(const MarginalSpec& spec, RngStream& rng,
                                         SampleStats* stats) {
  const std::size_t d = spec.dimension;
  const double R = spec.effective_radius();
  for (;;) {
    if (stats) ++stats->draws;
    std::vector<double> x(d);
    switch (spec.family) {
      case MarginalFamily::kGaussianIsotropicTruncated:
        for (auto& c : x) c = rng.next_gaussian();
        break;
      case MarginalFamily::kUniformBallIsotropic: {
        // Gaussian direction, radius from the d-th-root law, scaled so the
        // covariance is the identity (ball radius sqrt(d+2)).
        for (auto& c : x) c = rng.next_gaussian();
        double n = norm2(x);
        if (n < 1e-300) continue;
        double u = rng.next_uniform();
        double target = std::sqrt(static_cast<double>(d) + 2.0) *
                        std::pow(u, 1.0 / static_cast<double>(d));
        scale_in_place(x, target / n);
        break;
      }
      case MarginalFamily::kLaplaceProductIsotropic:
        // Unit-variance Laplace coordinates: scale 1/sqrt(2).
        for (auto& c : x) {
          double u = rng.next_uniform() - 0.5;
          double l = -std::copysign(std::log1p(-2.0 * std::abs(u)), u);
          c = l / std::sqrt(2.0);
        }
        break;
    }
    if (norm2(x) <= R) return x;
    if (stats) ++stats->rejected;
  }
}

}  // namespace detail

// n i.i.d. draws labeled by sign(<w_star, x>). An optional margin rejects
// points with normalized distance to the separator below `margin`,
// reproducing the large-margin regime for baselines.
inline Dataset sample_realizable(const MarginalSpec& spec, const Hypothesis& w_star,
                                 std::size_t n, std::uint64_t seed, double margin = 0.0,
                                 SampleStats* stats = nullptr) {
  spec.validate();
  require(n >= 1, ErrorKind::kInvalidInput, "sample_realizable: n must be >= 1");
  require(w_star.dimension() == spec.dimension, ErrorKind::kInvalidInput,
          "sample_realizable: w_star dimension mismatch");
  require(std::abs(norm2(w_star.w) - 1.0) <= 1e-9, ErrorKind::kPrecondition,
          "sample_realizable: w_star must be unit norm");

  Dataset data;
  data.dimension = spec.dimension;
  data.radius = spec.effective_radius();
  data.kind = DatasetKind::kPrivate;
  data.examples.resize(n);

  RngStream root = RngStream::root(seed).sub("sample_realizable");
  for (std::size_t i = 0; i < n; ++i) {
    RngStream sub = root.sub(i);
    for (;;) {
      std::vector<double> x = detail::draw_marginal(spec, sub, stats);
      if (margin > 0.0) {
        double nx = norm2(x);
        if (nx < 1e-300 || std::abs(dot(w_star.w, x)) / nx < margin) {
          if (stats) ++stats->rejected;
          continue;
        }
      }
      data.examples[i].y = sign_pm1(dot(w_star.w, x));
      data.examples[i].x = std::move(x);
      break;
    }
  }
  return data;
}

// Balanced labels, x = z + y*mu. The dataset radius accounts for the mean
// shift: R_base + ||mu||.
inline Dataset sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed,
                              SampleStats* stats = nullptr) {
  spec.validate();
  require(n >= 1, ErrorKind::kInvalidInput, "sample_mixture: n must be >= 1");

  Dataset data;
  data.dimension = spec.base.dimension;
  data.radius = spec.base.effective_radius() + norm2(spec.mu);
  data.kind = DatasetKind::kPrivate;
  data.examples.resize(n);

  RngStream root = RngStream::root(seed).sub("sample_mixture");
  for (std::size_t i = 0; i < n; ++i) {
    RngStream sub = root.sub(i);
    int y = sub.next_uniform() < 0.5 ? +1 : -1;
    std::vector<double> x = detail::draw_marginal(spec.base, sub, stats);
    axpy(x, static_cast<double>(y), spec.mu);
    data.examples[i].x = std::move(x);
    data.examples[i].y = y;
  }
  return data;
}

// Independent per-point label flips; feature vectors are untouched.
inline Dataset corrupt_massart(const Dataset& data, const MassartSpec& spec,
                               std::uint64_t seed) {
  spec.validate();
  require(data.labeled(), ErrorKind::kContractViolation,
          "corrupt_massart requires labeled data");

  Dataset out = data;
  RngStream root = RngStream::root(seed).sub("corrupt_massart");
  for (std::size_t i = 0; i < out.size(); ++i) {
    double lambda = spec.lambda_fn(out.examples[i].x);
    require(lambda >= 0.0 && lambda <= spec.lambda_max, ErrorKind::kConfig,
            "massart lambda(x) outside [0, lambda_max]");
    RngStream sub = root.sub(i);
    if (sub.next_uniform() < lambda) out.examples[i].y = -out.examples[i].y;
  }
  return out;
}

// Replace labels with the 0 sentinel and mark the dataset public_unlabeled.
// Idempotent.
inline Dataset strip_labels(const Dataset& data) {
  Dataset out = data;
  out.kind = DatasetKind::kPublicUnlabeled;
  for (Example& e : out.examples) e.y = 0;
  return out;
}

}  // namespace nldp
