#include <gtest/gtest.h>

#include "parafem/verify.hpp"

using namespace parafem;

TEST(PropertySuites, ProjectionIdentities) {
  const CheckResult r = checks::projection_identities();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(PropertySuites, GardingInequalityAndContinuity) {
  const CheckResult r = checks::garding_inequality();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(PropertySuites, SolverAgreementWithDenseOracle) {
  const CheckResult r = checks::solver_agreement();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(PropertySuites, L2MonotonicityWithoutLoad) {
  const CheckResult r = checks::l2_monotonicity();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(PropertySuites, SpectralNormsUnderDoubledTruncation) {
  const CheckResult r = checks::spectral_norms();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(PropertySuites, RunnerReportsEverySuiteByName) {
  const auto results = run_property_suites();
  ASSERT_EQ(results.size(), 7u);
  for (const auto& r : results) {
    EXPECT_FALSE(r.name.empty());
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
    EXPECT_LE(r.seconds, 30.0) << r.name;
  }
}
