#include <gtest/gtest.h>

#include "nldp/harness.hpp"

// End-to-end sweep oracles: learning curves over the public budget and the
// privacy level must be non-increasing up to CI overlap.

namespace nldp::harness {
namespace {

ExperimentConfig massart_base_d5() {
  ExperimentConfig c;
  c.pipeline = "massart";
  c.marginal.dimension = 5;
  c.marginal.family = MarginalFamily::kUniformBallIsotropic;
  c.n_private = 20000;
  c.m_public = 20000;
  c.privacy = {4.0, 0.05};
  c.degree_p = 8;
  c.committee_k = 1;
  c.lhmn.N_override = 2000;
  c.lhmn.eta_override = 3e-4;
  c.eval_trials = 30000;
  c.trials = 1;
  c.seed = 6001;
  return c;
}

void expect_non_increasing(const SweepResult& res) {
  double prev = 1e300, prev_ci = 0.0;
  for (const SweepRow& row : res.rows) {
    ASSERT_EQ(row.status, "ok");
    EXPECT_LE(row.error, prev + prev_ci + row.ci)
        << "value " << row.value << " error " << row.error;
    prev = row.error;
    prev_ci = row.ci;
  }
}

TEST(SweepCurves, MassartErrorNonIncreasingInM) {
  ExperimentConfig c = massart_base_d5();
  // LHMN consumes m - N steps, so small grid points leave the walk short of
  // convergence and the curve must fall as the public budget grows.
  std::vector<double> grid{3000, 8000, 20000};
  SweepResult res = sweep(c, "m", grid);
  ASSERT_EQ(res.rows.size(), grid.size());
  expect_non_increasing(res);
}

TEST(SweepCurves, MassartErrorNonIncreasingInEpsilon) {
  ExperimentConfig c = massart_base_d5();
  SweepResult res = sweep(c, "epsilon", {1.0, 4.0, 16.0});
  ASSERT_EQ(res.rows.size(), 3u);
  expect_non_increasing(res);
}

}  // namespace
}  // namespace nldp::harness
