#include "nldp/core.hpp"

#include <gtest/gtest.h>

#include "nldp/dataset_io.hpp"
#include "nldp/rng.hpp"

namespace nldp {
namespace {

Hypothesis hyp(std::vector<double> w) {
  Hypothesis h;
  h.w = std::move(w);
  return h;
}

Dataset tiny_dataset(std::vector<Example> examples, double radius,
                     DatasetKind kind = DatasetKind::kPrivate) {
  Dataset d;
  d.dimension = examples.front().x.size();
  d.radius = radius;
  d.kind = kind;
  d.examples = std::move(examples);
  return d;
}

TEST(Classify, PositiveInnerProduct) {
  EXPECT_EQ(classify(hyp({1, 0}), std::vector<double>{0.5, -3}), 1);
}

TEST(Classify, SignZeroIsPlusOne) {
  EXPECT_EQ(classify(hyp({1, 0}), std::vector<double>{0, 1}), 1);
}

TEST(Classify, ScaleInvariant) {
  std::vector<double> x{-0.1, 5};
  EXPECT_EQ(classify(hyp({0.2, 0}), x), -1);
  EXPECT_EQ(classify(hyp({1.0, 0}), x), -1);  // 5 * w
}

TEST(Classify, DimensionMismatchThrows) {
  try {
    classify(hyp({1, 0, 0}), std::vector<double>{1, 2});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(Classify, ScaleInvarianceProperty) {
  RngStream rng = RngStream::root(7).sub("scale_prop");
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> w = rng.gaussian_vector(5);
    std::vector<double> x = rng.gaussian_vector(5);
    double c = std::exp(3.0 * rng.next_uniform());  // positive scale
    std::vector<double> cw = scaled(w, c);
    EXPECT_EQ(classify(hyp(w), x), classify(hyp(cw), x));
  }
}

TEST(ClassificationError, RealizableDataHasZeroError) {
  Hypothesis w_star = hyp({0.6, 0.8});
  RngStream rng = RngStream::root(3).sub("realizable");
  std::vector<Example> ex;
  for (int i = 0; i < 50; ++i) {
    Example e;
    e.x = rng.gaussian_vector(2);
    project_ball_in_place(e.x, 1.0);
    e.y = sign_pm1(dot(w_star.w, e.x));
    ex.push_back(e);
  }
  Dataset data = tiny_dataset(ex, 1.0);
  EXPECT_EQ(classification_error(w_star, data), 0.0);
  // Antipodal classifier errs everywhere when nothing sits on the boundary.
  EXPECT_EQ(classification_error(hyp({-0.6, -0.8}), data), 1.0);
}

TEST(ClassificationError, CountsDisagreements) {
  Dataset data = tiny_dataset({{{1, 0}, 1}, {{0.5, 0.5}, 1}, {{-1, 0}, -1}, {{0, -1}, 1}}, 1.0);
  // w = e2: predictions +1, +1, +1, -1 vs labels +1, +1, -1, +1 -> 2/4 wrong
  // (x3 gets sign(0) = +1).
  EXPECT_DOUBLE_EQ(classification_error(hyp({0, 1}), data), 0.5);
  EXPECT_DOUBLE_EQ(classification_error(hyp({1, 0}), data), 0.0);
  Dataset quarter =
      tiny_dataset({{{1, 0}, 1}, {{0.9, 0.1}, 1}, {{-1, 0}, -1}, {{0.2, -0.5}, -1}}, 1.0);
  EXPECT_DOUBLE_EQ(classification_error(hyp({1, 0}), quarter), 0.25);
}

TEST(ClassificationError, ComplementProperty) {
  RngStream rng = RngStream::root(11).sub("complement");
  std::vector<Example> ex;
  for (int i = 0; i < 101; ++i) {
    Example e;
    e.x = rng.gaussian_vector(4);
    project_ball_in_place(e.x, 2.0);
    e.y = rng.next_uniform() < 0.5 ? 1 : -1;
    ex.push_back(e);
  }
  Dataset data = tiny_dataset(ex, 2.0);
  Hypothesis w = hyp({0.3, -0.2, 0.8, 0.1});
  Hypothesis neg = hyp(scaled(w.w, -1.0));
  EXPECT_NEAR(classification_error(w, data) + classification_error(neg, data), 1.0, 1e-12);
}

TEST(ClassificationError, PermutationInvariant) {
  RngStream rng = RngStream::root(13).sub("perm");
  std::vector<Example> ex;
  for (int i = 0; i < 40; ++i) {
    Example e;
    e.x = rng.gaussian_vector(3);
    project_ball_in_place(e.x, 1.5);
    e.y = rng.next_uniform() < 0.5 ? 1 : -1;
    ex.push_back(e);
  }
  Dataset data = tiny_dataset(ex, 1.5);
  Dataset shuffled = data;
  std::vector<std::size_t> order = RngStream::root(5).permutation(ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) shuffled.examples[i] = ex[order[i]];
  Hypothesis w = hyp({0.1, 0.9, -0.4});
  EXPECT_DOUBLE_EQ(classification_error(w, data), classification_error(w, shuffled));
}

TEST(ClassificationError, EmptyAndUnlabeledErrors) {
  Dataset empty;
  empty.dimension = 2;
  empty.radius = 1.0;
  try {
    classification_error(hyp({1, 0}), empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
  Dataset unlabeled = tiny_dataset({{{0.1, 0.2}, 0}}, 1.0, DatasetKind::kPublicUnlabeled);
  try {
    classification_error(hyp({1, 0}), unlabeled);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContractViolation);
  }
}

TEST(ProjectUnitSphere, ThreeFourFive) {
  Hypothesis h = project_unit_sphere(std::vector<double>{3, 4});
  EXPECT_DOUBLE_EQ(h.w[0], 0.6);
  EXPECT_DOUBLE_EQ(h.w[1], 0.8);
  EXPECT_NEAR(norm2(h.w), 1.0, 1e-12);
}

TEST(ProjectUnitSphere, IdentityOnUnitVectors) {
  Hypothesis h = project_unit_sphere(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(h.w[0], 0.0);
  EXPECT_DOUBLE_EQ(h.w[1], 1.0);
}

TEST(ProjectUnitSphere, ZeroVectorThrows) {
  try {
    project_unit_sphere(std::vector<double>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateVector);
  }
}

TEST(Dataset, LabelBarrierOnPublicData) {
  Dataset pub = tiny_dataset({{{0.1, 0.2}, 0}}, 1.0, DatasetKind::kPublicUnlabeled);
  EXPECT_NO_THROW(pub.point(0));
  try {
    pub.label(0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContractViolation);
  }
}

TEST(Dataset, ValidateChecksRadiusAndLabels) {
  Dataset bad = tiny_dataset({{{3.0, 0.0}, 1}}, 1.0);
  EXPECT_THROW(bad.validate(), Error);
  Dataset bad_label = tiny_dataset({{{0.1, 0.0}, 2}}, 1.0);
  EXPECT_THROW(bad_label.validate(), Error);
}

TEST(DatasetIo, RoundTripsBitExactly) {
  RngStream rng = RngStream::root(99).sub("io");
  for (int rep = 0; rep < 10; ++rep) {
    Dataset data;
    data.dimension = 3;
    data.radius = 2.5;
    data.kind = rep % 2 == 0 ? DatasetKind::kPrivate : DatasetKind::kPublicUnlabeled;
    for (int i = 0; i < 20; ++i) {
      Example e;
      e.x = rng.gaussian_vector(3);
      project_ball_in_place(e.x, 2.5);
      e.y = data.kind == DatasetKind::kPublicUnlabeled ? 0
                                                       : (rng.next_uniform() < 0.5 ? 1 : -1);
      data.examples.push_back(e);
    }
    std::string text = write_dataset_string(data);
    Dataset back = read_dataset_string(text);
    EXPECT_EQ(write_dataset_string(back), text);
    EXPECT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      EXPECT_EQ(back.examples[i].x, data.examples[i].x);  // exact doubles
      EXPECT_EQ(back.examples[i].y, data.examples[i].y);
    }
  }
}

TEST(DatasetIo, RejectsGarbage) {
  EXPECT_THROW(read_dataset_string("BOGUS v1 d=2"), Error);
  EXPECT_THROW(read_dataset_string("NLDP-DS v1 d=2 R=1 kind=private n=1\n0.1 0.2\n"), Error);
}

}  // namespace
}  // namespace nldp
