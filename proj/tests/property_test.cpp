//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Randomised checks of the invariants over hand-rolled instance generators.

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fairaudit.hpp"
#include "test_support.hpp"

namespace fairaudit {
namespace {

using M = SamplingMethod;
using S = CollabStrategy;
using testing::Between;
using testing::IntBetween;

TEST(Property, RoundAllocationSumsAndStaysWithinOne) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.UniformIndex(40);
    const std::int64_t total = IntBetween(rng, 0, 1000);
    std::vector<double> w(n);
    for (double& x : w) x = rng.UniformDouble();
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> real(n);
    for (std::size_t k = 0; k < n; ++k) real[k] = sum > 0 ? w[k] / sum * static_cast<double>(total) : 0.0;
    if (sum == 0) continue;
    const auto out = RoundAllocation(real, total);
    EXPECT_EQ(std::accumulate(out.begin(), out.end(), std::int64_t{0}), total);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(static_cast<double>(out[k]) - real[k]), 1.0);
  }
}

TEST(Property, UniformEqualitiesHold) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 1, 8));
    const GroundTruth gt = testing::RandomGroundTruth(rng, m);
    const BudgetSpec budget(IntBetween(rng, 10, 2000), m);
    const double nc = ClosedFormError(M::kUniform, S::kNoCollab, gt, budget);
    const double post = ClosedFormError(M::kUniform, S::kAPosteriori, gt, budget);
    const double prio = ClosedFormError(M::kUniform, S::kAPriori, gt, budget);
    EXPECT_NEAR(post, prio, 1e-12 * prio);
    EXPECT_NEAR(post, nc / std::sqrt(static_cast<double>(m)), 1e-12 * post);
  }
}

TEST(Property, InequalityChainHolds) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 2, 6));
    const GroundTruth gt = trial % 2 ? testing::RandomGroundTruth(rng, m)
                                     : testing::RandomIndependentGroundTruth(rng, m);
    const BudgetSpec budget(IntBetween(rng, 50, 1000), m);
    const RelationReport r = VerifyRelations(gt, budget);
    for (const char* id : {"uniform_apriori_eq_aposteriori", "uniform_aposteriori_scaling", "neyman_apriori_bound", "neyman_nocollab_bound", "neyman_aposteriori_gain", "stratified_aposteriori_gain"}) {
      EXPECT_TRUE(r.Get(id).holds) << id << " slack " << r.Get(id).slack;
    }
  }
}

TEST(Property, JointDesignDominatesOtherAprioriDesigns) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 1, 6));
    const GroundTruth gt = testing::RandomGroundTruth(rng, m);
    const BudgetSpec budget(IntBetween(rng, 50, 1000), m);
    const double joint = JointNeymanDesignError(gt, budget);
    EXPECT_LE(joint, ClosedFormError(M::kStratified, S::kAPriori, gt, budget) + 1e-12);
    EXPECT_LE(joint, ClosedFormError(M::kUniform, S::kAPriori, gt, budget) + 1e-12);
  }
}

TEST(Property, JointIntegerNoWorseThanRoundedEqualSplit) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 2, 5));
    const GroundTruth gt = testing::RandomGroundTruth(rng, m);
    const BudgetSpec budget(IntBetween(rng, 50, 400), m);
    const auto counts = NeymanJointInteger(gt, budget);
    const JointObjective f(gt);
    std::vector<double> x(counts.begin(), counts.end());
    std::vector<double> eq(gt.num_strata(), static_cast<double>(budget.total()) / static_cast<double>(gt.num_strata()));
    const auto eq_int = RoundAllocation(eq, budget.total());
    std::vector<double> y(eq_int.begin(), eq_int.end());
    EXPECT_LE(f.Value(x), f.Value(y) + 1e-12);
    for (std::int64_t c : counts) EXPECT_GE(c, 1);
  }
}

TEST(Property, PoolingNeverHurtsInClosedForm) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 2, 6));
    const GroundTruth gt = testing::RandomGroundTruth(rng, m);
    const BudgetSpec budget(IntBetween(rng, 50, 1000), m);
    const auto nc = ClosedFormAgentErrors(M::kStratified, S::kNoCollab, gt, budget);
    const auto post = ClosedFormAgentErrors(M::kStratified, S::kAPosteriori, gt, budget);
    for (std::size_t i = 0; i < nc.size(); ++i) EXPECT_LE(post[i], nc[i]);
  }
}

TEST(Property, StratifiedAndSimpleEstimatorsAgreeAtOneAttribute) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const GroundTruth gt = testing::RandomGroundTruth(rng, 1);
    QueryLog log(1, 0);
    for (std::size_t k = 0; k < 2; ++k) {
      const std::int64_t n = IntBetween(rng, 1, 100);
      log.Add(k, n, IntBetween(rng, 0, n));
    }
    EXPECT_EQ(EstimateDpStratified(log, 0, gt), EstimateDpSimple(log, 0));
  }
}

TEST(Property, EstimatesStayInUnitBand) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 1, 4));
    const GroundTruth gt = testing::RandomGroundTruth(rng, m);
    QueryLog log(m, 0);
    for (std::size_t k = 0; k < gt.num_strata(); ++k) {
      const std::int64_t n = IntBetween(rng, 1, 20);
      log.Add(k, n, IntBetween(rng, 0, n));
    }
    for (int i = 0; i < m; ++i) {
      const double d = EstimateDpStratified(log, i, gt);
      EXPECT_GE(d, -1.0 - 1e-12);
      EXPECT_LE(d, 1.0 + 1e-12);
    }
  }
}

TEST(Property, ExpectedPooledCountsMatchTheCountTableUnderIndependence) {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = static_cast<int>(IntBetween(rng, 2, 5));
    const GroundTruth gt = testing::RandomIndependentGroundTruth(rng, m);
    const std::int64_t R = IntBetween(rng, 100, 500);
    const BudgetSpec budget(R, m);
    const auto rd = static_cast<double>(R);
    for (M method : {M::kUniform, M::kStratified}) {
      const AllocationPlan plan = Allocate(method, S::kAPosteriori, gt, budget);
      for (int i = 0; i < m; ++i) {
        double own = std::round(gt.attr_marginal[static_cast<std::size_t>(i)] * rd);
        if (method == M::kStratified) own = std::round(rd / 2.0);
        double expect = own;
        // The other agents' group quotas are rounded; their fill follows the
        // marginal of attribute i exactly.
        expect += (m - 1) * rd * gt.attr_marginal[static_cast<std::size_t>(i)];
        EXPECT_NEAR(plan.ExpectedGroupCounts(i).first, expect, 1e-6) << MethodName(method);
      }
    }
  }
}

}  // namespace
}  // namespace fairaudit
