#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nldp/error.hpp"
#include "nldp/vec.hpp"

namespace nldp {

// Sign convention used everywhere in this library, including vote counting
// and error measurement: sign(0) = +1.
inline int sign_pm1(double v) { return v >= 0.0 ? +1 : -1; }

// One user's record: a feature vector and a label in {-1, +1}. Unlabeled
// public points carry the sentinel label 0, which no training code may read
// (see Dataset::labeled).
struct Example {
  std::vector<double> x;
  int y = 0;
};

// A linear-threshold classifier, identified with its weight vector. Library
// invariant: ||w||_2 <= 1 for committee members and <= rho for the logistic
// pipeline; pipeline iterates are unit norm.
struct Hypothesis {
  std::vector<double> w;

  std::size_t dimension() const { return w.size(); }
};

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 1e-5;

  void validate() const {
    require(epsilon > 0.0, ErrorKind::kConfig, "epsilon must be positive");
    require(delta > 0.0 && delta < 1.0, ErrorKind::kConfig, "delta must lie in (0,1)");
  }
};

struct AccuracyParams {
  double alpha = 0.1;  // target classification error
  double beta = 0.05;  // failure probability

  void validate() const {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::kConfig, "alpha must lie in (0,1)");
    require(beta > 0.0 && beta < 1.0, ErrorKind::kConfig, "beta must lie in (0,1)");
  }
};

enum class DatasetKind { kPrivate, kPublicUnlabeled, kPseudoLabeled };

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::kPrivate: return "private";
    case DatasetKind::kPublicUnlabeled: return "public_unlabeled";
    case DatasetKind::kPseudoLabeled: return "pseudo_labeled";
  }
  return "unknown";
}

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "private") return DatasetKind::kPrivate;
  if (s == "public_unlabeled") return DatasetKind::kPublicUnlabeled;
  if (s == "pseudo_labeled") return DatasetKind::kPseudoLabeled;
  fail(ErrorKind::kConfig, "unknown dataset kind '" + s + "'");
}

// A homogeneous collection of examples with declared dimension d and radius
// R (all ||x||_2 <= R). The kind tag gates label access: public_unlabeled
// data exposes points() only, and any attempt to read labels throws. This
// enforces the one-way flow from unlabeled public data into pseudo-labels.
struct Dataset {
  std::size_t dimension = 0;
  double radius = 0.0;
  DatasetKind kind = DatasetKind::kPrivate;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  bool labeled() const { return kind != DatasetKind::kPublicUnlabeled; }

  // Label access with the unlabeled-read barrier.
  int label(std::size_t i) const {
    require(labeled(), ErrorKind::kContractViolation,
            "label read on a public_unlabeled dataset");
    return examples.at(i).y;
  }

  std::span<const double> point(std::size_t i) const { return examples.at(i).x; }

  void validate() const {
    require(dimension > 0, ErrorKind::kInvalidInput, "dataset dimension must be positive");
    require(radius > 0.0, ErrorKind::kInvalidInput, "dataset radius must be positive");
    for (const Example& e : examples) {
      require(e.x.size() == dimension, ErrorKind::kInvalidInput,
              "example dimension does not match dataset dimension");
      require(norm2(e.x) <= radius * (1.0 + 1e-12), ErrorKind::kInvalidInput,
              "example norm exceeds dataset radius");
      if (kind == DatasetKind::kPublicUnlabeled) {
        require(e.y == 0, ErrorKind::kInvalidInput,
                "public_unlabeled examples must carry the 0 sentinel label");
      } else {
        require(e.y == -1 || e.y == 1, ErrorKind::kInvalidInput,
                "labels must be -1 or +1");
      }
    }
  }
};

// sign(<w, x>) with sign(0) = +1.
inline int classify(const Hypothesis& h, std::span<const double> x) {
  require(h.w.size() == x.size(), ErrorKind::kInvalidInput,
          "classify: hypothesis and point dimensions differ");
  return sign_pm1(dot(h.w, x));
}

// Empirical misclassification rate of h on a labeled dataset.
inline double classification_error(const Hypothesis& h, const Dataset& data) {
  require(data.labeled(), ErrorKind::kContractViolation,
          "classification_error requires labeled data");
  require(!data.empty(), ErrorKind::kInvalidInput,
          "classification_error on an empty dataset");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (classify(h, data.point(i)) != data.label(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

// v / ||v||_2. Near-zero vectors are rejected; callers that can recover
// (the pipelines) reset to e_1 instead.
inline Hypothesis project_unit_sphere(std::span<const double> v) {
  double n = norm2(v);
  require(n >= 1e-12, ErrorKind::kDegenerateVector,
          "cannot normalize a (near-)zero vector");
  Hypothesis h;
  h.w.assign(v.begin(), v.end());
  scale_in_place(h.w, 1.0 / n);
  return h;
}

// Euclidean projection onto the centered L2 ball of the given radius.
inline void project_ball_in_place(std::vector<double>& v, double radius) {
  double n = norm2(v);
  if (n > radius) scale_in_place(v, radius / n);
}

}  // namespace nldp
