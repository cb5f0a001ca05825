#include <gtest/gtest.h>

#include <random>

#include "bfd/model_params.hpp"

using namespace bfd;

TEST(DeriveAbcd, ExperimentalFamilyAtZeroOffset) {
  const auto k = derive_abcd({1.0, -0.5, 2.0 / 9.0});
  EXPECT_NEAR(k.a, -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(k.b, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(k.c, -1.0 / 9.0, 1e-15);
  EXPECT_NEAR(k.d, 1.0 / 3.0, 1e-15);
}

TEST(DeriveAbcd, AllZeroModellingParameters) {
  const auto k = derive_abcd({0.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(k.a, 1.0 / 3.0);
  EXPECT_EQ(k.b, 0.0);
  EXPECT_EQ(k.c, 0.0);
  EXPECT_EQ(k.d, 0.0);
}

TEST(DeriveAbcd, OffsetTwoGivesDMinusBTwo) {
  const auto k = derive_abcd({1.0, -0.5, (2.0 / 3.0) * (1.0 / 3.0 + 2.0)});
  EXPECT_NEAR(k.d - k.b, 2.0, 1e-14);
}

TEST(DeriveAbcd, RejectsInadmissible) {
  EXPECT_THROW(derive_abcd({-0.1, 0.0, 0.0}), ParameterDomainError);
  EXPECT_THROW(derive_abcd({0.0, 1.5, 0.0}), ParameterDomainError);
  EXPECT_THROW(derive_abcd({0.0, 0.0, -1.0}), ParameterDomainError);
}

TEST(ReducedParameters, Hamiltonian) {
  const auto r = reduced_parameters(0.0);
  EXPECT_NEAR(r.modeling.beta, 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.system.a, -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.system.b, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.system.c, -1.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.system.d, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.system.gamma, 0.8);
  EXPECT_EQ(r.system.mu2, 10.0);
  EXPECT_TRUE(r.system.hamiltonian());
}

TEST(ReducedParameters, OffsetTwo) {
  const auto r = reduced_parameters(2.0);
  EXPECT_NEAR(r.system.d, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.modeling.beta, 14.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.system.a, -14.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.system.c, -7.0 / 9.0, 1e-15);
  EXPECT_FALSE(r.system.hamiltonian());
}

TEST(ReducedParameters, BoundaryBetaZero) {
  const auto r = reduced_parameters(-1.0 / 3.0);
  EXPECT_NEAR(r.modeling.beta, 0.0, 1e-16);
  EXPECT_NEAR(r.system.a, 0.0, 1e-16);
  EXPECT_NEAR(r.system.c, 0.0, 1e-16);
  EXPECT_NEAR(r.system.d, 0.0, 1e-16);
  EXPECT_THROW(reduced_parameters(-0.5), ParameterDomainError);
}

TEST(ReducedParameters, ClosedFormMatchesDerivation) {
  for (double e : {-1.0 / 3.0, 0.0, 0.25, 1.0, 2.0, 5.0}) {
    const auto r = reduced_parameters(e);
    const auto k = derive_abcd(r.modeling);
    EXPECT_NEAR(k.a, r.system.a, 1e-14);
    EXPECT_NEAR(k.b, r.system.b, 1e-14);
    EXPECT_NEAR(k.c, r.system.c, 1e-14);
    EXPECT_NEAR(k.d, r.system.d, 1e-14);
  }
}

TEST(ReducedParameters, SignsOnSampledRange) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0 / 3.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double e = dist(rng);
    const auto s = reduced_parameters(e).system;
    EXPECT_TRUE(s.linearly_well_posed()) << e;
    EXPECT_EQ(s.hamiltonian(), std::abs(e) <= kSignTolerance) << e;
    EXPECT_NO_THROW(classify(s));
  }
  EXPECT_TRUE(reduced_parameters(0.0).system.hamiltonian());
  EXPECT_FALSE(reduced_parameters(1e-6).system.hamiltonian());
}

TEST(Classify, GenericRow) {
  const auto c = classify(-0.2, 0.3, -0.1, 0.3);
  EXPECT_EQ(c.row_index, 1);
  EXPECT_TRUE(c.relevant);
  EXPECT_EQ(c.signs(), "++--");
  EXPECT_NE(c.wellposedness_label.find("generic B/FD"), std::string::npos);
}

TEST(Classify, BbmBbmRow) {
  const auto c = classify(0.0, 0.3, 0.0, 0.3);
  EXPECT_EQ(c.row_index, 4);
  EXPECT_TRUE(c.relevant);
  EXPECT_NE(c.wellposedness_label.find("BBM-BBM B/FD"), std::string::npos);
}

TEST(Classify, AllZeroRow) {
  const auto c = classify(0.0, 0.0, 0.0, 0.0);
  EXPECT_EQ(c.row_index, 16);
  EXPECT_FALSE(c.relevant);
}

TEST(Classify, ZeroToleranceIsAbsolute) {
  EXPECT_EQ(classify(-1e-15, 0.3, 1e-15, 0.3).row_index, 4);
  EXPECT_EQ(classify(-1e-13, 0.3, -1e-13, 0.3).row_index, 1);
}

TEST(Classify, RejectsIllPosedSigns) {
  EXPECT_THROW(classify(-0.1, -0.3, -0.1, 0.3), NotWellPosedError);
  EXPECT_THROW(classify(0.1, 0.3, -0.1, 0.3), NotWellPosedError);
  EXPECT_THROW(classify(-0.1, 0.3, 0.1, 0.3), NotWellPosedError);
  EXPECT_THROW(classify(-0.1, 0.3, -0.1, -0.3), NotWellPosedError);
}

TEST(Classify, EveryAdmissiblePatternHasOneRow) {
  std::vector<int> seen;
  for (double b : {0.0, 1.0})
    for (double d : {0.0, 1.0})
      for (double a : {0.0, -1.0})
        for (double c : {0.0, -1.0}) seen.push_back(classify(a, b, c, d).row_index);
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 16; ++i) EXPECT_EQ(seen[i], i + 1);
}

TEST(Classify, TotalOnAdmissibleBox) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a1(0.0, 3.0), a2(-3.0, 1.0), be(0.0, 3.0);
  int classified = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto k = derive_abcd({a1(rng), a2(rng), be(rng)});
    const bool wp = sign_of(k.b) != Sign::negative && sign_of(k.d) != Sign::negative &&
                    sign_of(k.a) != Sign::positive && sign_of(k.c) != Sign::positive;
    if (wp) {
      EXPECT_NO_THROW(classify(k));
      ++classified;
    } else {
      EXPECT_THROW(classify(k), NotWellPosedError);
    }
  }
  EXPECT_GT(classified, 0);
}

TEST(AbcdSystem, Validate) {
  auto s = reduced_parameters(0.0).system;
  EXPECT_NO_THROW(s.validate());
  s.gamma = 1.0;
  EXPECT_THROW(s.validate(), ParameterDomainError);
  s.gamma = 0.5;
  s.mu2 = 0.0;
  EXPECT_THROW(s.validate(), ParameterDomainError);
}

TEST(AbcdSystem, NuQuantitiesAreDistinct) {
  const auto s = reduced_parameters(0.0).system;
  EXPECT_NEAR(s.nu_ratio(), 0.1, 1e-16);
  EXPECT_NEAR(s.nu_sqrt(), std::sqrt(0.1), 1e-16);
}

TEST(AbcdSystem, LinearizedSystemIsAccepted) {
  auto s = reduced_parameters(0.0).system;
  s.epsilon = 0.0;
  EXPECT_NO_THROW(s.validate());
  s.epsilon = -1e-3;
  EXPECT_THROW(s.validate(), ParameterDomainError);
  s.epsilon = 1.0;
  s.mu = 0.0;
  EXPECT_THROW(s.validate(), ParameterDomainError);
}
