#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/rng.hpp"
#include "nldp/vec.hpp"

namespace nldp::client {

// Noise scales for the two one-round mechanisms. "log" is the natural
// logarithm throughout (the standard Gaussian-mechanism calibration); the
// test suite pins these expressions bit for bit.

// Base copy (both mechanisms): variance 32*log(1.25/delta)/eps^2.
inline double hinge_sigma_base(const PrivacyParams& params) {
  params.validate();
  return std::sqrt(32.0 * std::log(1.25 / params.delta)) / params.epsilon;
}

// Product copies: variance 8*log(1.25/delta)*p^2*(p+1)^2/eps^2.
inline double hinge_sigma_copy(const PrivacyParams& params, std::size_t p) {
  params.validate();
  double pd = static_cast<double>(p);
  return std::sqrt(8.0 * std::log(1.25 / params.delta)) * pd * (pd + 1.0) / params.epsilon;
}

// The logistic mechanism's single extra label copy: variance
// 8*log(1.25/delta)*p^2/eps^2.
inline double logistic_sigma_label(const PrivacyParams& params, std::size_t p) {
  params.validate();
  return std::sqrt(8.0 * std::log(1.25 / params.delta)) * static_cast<double>(p) /
         params.epsilon;
}

// v + N(0, sigma^2 I). The generic Gaussian-mechanism primitive; callers
// pass the calibrated sigma.
inline std::vector<double> gaussian_release(std::span<const double> v, double sigma,
                                            RngStream& rng) {
  require(sigma > 0.0, ErrorKind::kConfig, "gaussian_release: sigma must be positive");
  std::vector<double> out(v.begin(), v.end());
  for (double& c : out) c += sigma * rng.next_gaussian();
  return out;
}

// One user's full message for the hinge mechanism: a base noisy copy of
// (x, y) plus p(p+1) fresh noisy copies of each, all noises independent.
// The sigmas actually used are stored so downstream audits never re-derive
// them.
struct HingeReport {
  std::vector<double> x0;
  double y0 = 0.0;
  std::vector<std::vector<double>> x_copies;  // p(p+1) vectors
  std::vector<double> y_copies;               // p(p+1) scalars
  std::size_t p = 0;
  double sigma_base = 0.0;
  double sigma_copy = 0.0;

  std::size_t dimension() const { return x0.size(); }

  void validate() const {
    std::size_t want = p * (p + 1);
    require(x_copies.size() == want && y_copies.size() == want, ErrorKind::kMalformedReport,
            "hinge report must carry exactly p(p+1) copies");
    for (const auto& c : x_copies)
      require(c.size() == x0.size(), ErrorKind::kMalformedReport,
              "hinge report copy dimension mismatch");
  }
};

// The logistic mechanism's message: base copy, p(p+1) x-copies, and exactly
// one extra noisy label.
struct LogisticReport {
  std::vector<double> x0;
  double y0 = 0.0;
  std::vector<std::vector<double>> x_copies;  // p(p+1) vectors
  double y_p = 0.0;                           // single label copy
  std::size_t p = 0;
  double sigma_base = 0.0;
  double sigma_copy = 0.0;
  double sigma_label = 0.0;

  std::size_t dimension() const { return x0.size(); }

  void validate() const {
    require(x_copies.size() == p * (p + 1), ErrorKind::kMalformedReport,
            "logistic report must carry exactly p(p+1) x-copies");
    for (const auto& c : x_copies)
      require(c.size() == x0.size(), ErrorKind::kMalformedReport,
              "logistic report copy dimension mismatch");
  }
};

// Encode one example whose features already live in the unit ball (the
// pipeline normalizes whole groups by R before encoding). Consumes nothing
// but the example and the caller-supplied randomness: one round, no server
// state.
inline HingeReport hinge_encode(const Example& example, const PrivacyParams& params,
                                std::size_t p, RngStream rng) {
  require(norm2(example.x) <= 1.0 + 1e-12, ErrorKind::kPrecondition,
          "hinge_encode expects ||x|| <= 1 (normalize by R first)");
  HingeReport rep;
  rep.p = p;
  rep.sigma_base = hinge_sigma_base(params);
  rep.sigma_copy = hinge_sigma_copy(params, p);
  rep.x0 = gaussian_release(example.x, rep.sigma_base, rng);
  rep.y0 = static_cast<double>(example.y) + rep.sigma_base * rng.next_gaussian();
  std::size_t copies = p * (p + 1);
  rep.x_copies.reserve(copies);
  rep.y_copies.reserve(copies);
  for (std::size_t j = 0; j < copies; ++j) {
    rep.x_copies.push_back(gaussian_release(example.x, rep.sigma_copy, rng));
    rep.y_copies.push_back(static_cast<double>(example.y) +
                           rep.sigma_copy * rng.next_gaussian());
  }
  return rep;
}

// Encode one raw example for the logistic mechanism; normalization by R
// happens here, on the user's side.
inline LogisticReport logistic_encode(const Example& example, const PrivacyParams& params,
                                      std::size_t p, double R, RngStream rng) {
  require(R > 0.0, ErrorKind::kConfig, "logistic_encode: R must be positive");
  require(norm2(example.x) <= R * (1.0 + 1e-12), ErrorKind::kPrecondition,
          "logistic_encode expects ||x|| <= R");
  std::vector<double> xn = scaled(example.x, 1.0 / R);

  LogisticReport rep;
  rep.p = p;
  rep.sigma_base = hinge_sigma_base(params);
  rep.sigma_copy = hinge_sigma_copy(params, p);
  rep.sigma_label = logistic_sigma_label(params, p);
  rep.x0 = gaussian_release(xn, rep.sigma_base, rng);
  rep.y0 = static_cast<double>(example.y) + rep.sigma_base * rng.next_gaussian();
  std::size_t copies = p * (p + 1);
  rep.x_copies.reserve(copies);
  for (std::size_t j = 0; j < copies; ++j) {
    rep.x_copies.push_back(gaussian_release(xn, rep.sigma_copy, rng));
  }
  if (rep.sigma_label > 0.0) {
    rep.y_p = static_cast<double>(example.y) + rep.sigma_label * rng.next_gaussian();
  } else {
    rep.y_p = static_cast<double>(example.y);  // p = 0 degenerate, test-only
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Privacy accounting
// ---------------------------------------------------------------------------

// Per-release budgets inferred from the stored sigmas through the Gaussian
// mechanism relation sigma = Delta*sqrt(2 log(1.25/delta))/eps with
// replace-one sensitivity Delta = 2 (vectors in the unit ball, labels in
// [-1,1]). Totals are basic composition; they exceed the mechanisms' nominal
// epsilon (about 3x for the hinge mechanism) and are reported as the
// conservative bound, not the mechanisms' nominal guarantee.
struct BudgetLedger {
  struct Release {
    double epsilon = 0.0;
    double delta = 0.0;
  };
  std::vector<Release> releases;

  double total_epsilon() const {
    double s = 0.0;
    for (const auto& r : releases) s += r.epsilon;
    return s;
  }
  double total_delta() const {
    double s = 0.0;
    for (const auto& r : releases) s += r.delta;
    return s;
  }
};

namespace detail {

inline double epsilon_from_sigma(double sigma, double delta) {
  constexpr double kSensitivity = 2.0;
  return kSensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
}

}  // namespace detail

inline BudgetLedger budget_report(const HingeReport& rep, double delta) {
  BudgetLedger ledger;
  if (rep.sigma_base <= 0.0 && rep.x_copies.empty()) return ledger;
  double eps_base = detail::epsilon_from_sigma(rep.sigma_base, delta);
  ledger.releases.push_back({eps_base, delta});  // x0
  ledger.releases.push_back({eps_base, delta});  // y0
  double eps_copy = detail::epsilon_from_sigma(rep.sigma_copy, delta);
  for (std::size_t j = 0; j < rep.x_copies.size(); ++j) {
    ledger.releases.push_back({eps_copy, delta});
    ledger.releases.push_back({eps_copy, delta});
  }
  return ledger;
}

inline BudgetLedger budget_report(const LogisticReport& rep, double delta) {
  BudgetLedger ledger;
  if (rep.sigma_base <= 0.0 && rep.x_copies.empty()) return ledger;
  double eps_base = detail::epsilon_from_sigma(rep.sigma_base, delta);
  ledger.releases.push_back({eps_base, delta});
  ledger.releases.push_back({eps_base, delta});
  double eps_copy = detail::epsilon_from_sigma(rep.sigma_copy, delta);
  for (std::size_t j = 0; j < rep.x_copies.size(); ++j) {
    ledger.releases.push_back({eps_copy, delta});
  }
  if (rep.sigma_label > 0.0) {
    ledger.releases.push_back({detail::epsilon_from_sigma(rep.sigma_label, delta), delta});
  }
  return ledger;
}

}  // namespace nldp::client
