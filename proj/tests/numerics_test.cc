//
// Copyright 2026 The GEDP Authors
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

#include "gedp/numerics.h"

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace gedp {
namespace {

// Long-double reference for Phi.
long double ReferenceCdf(long double z) {
  return 0.5L * std::erfc(-z / std::sqrt(2.0L));
}

// Bisection on the reference CDF.
double ReferenceQuantile(long double p) {
  long double lo = -40.0L;
  long double hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (ReferenceCdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

TEST(NormalCdfTest, KnownValues) {
  EXPECT_DOUBLE_EQ(NormalCdf(0.0), 0.5);
  EXPECT_NEAR(NormalCdf(1.959963985), 0.975, 1e-9);
  EXPECT_NEAR(NormalCdf(-40.0), 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(NormalCdf(40.0), 1.0);
}

TEST(NormalCdfTest, MatchesLongDoubleReference) {
  for (double z = -8.0; z <= 8.0; z += 0.0625) {
    EXPECT_NEAR(NormalCdf(z), static_cast<double>(ReferenceCdf(z)), 1e-12)
        << "z=" << z;
  }
}

TEST(NormalCdfTest, Monotone) {
  double previous = 0.0;
  for (double z = -10.0; z <= 10.0; z += 0.001) {
    const double c = NormalCdf(z);
    EXPECT_GE(c, previous);
    previous = c;
  }
}

TEST(NormalQuantileTest, KnownValues) {
  EXPECT_NEAR(*NormalQuantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(*NormalQuantile(0.975), 1.959963984540054, 1e-9);
  const double p = std::pow(0.99, 1.0 / 400.0);
  EXPECT_NEAR(*NormalQuantile(p), ReferenceQuantile(p), 1e-9);
  EXPECT_NEAR(*NormalQuantile(p), 4.055, 1e-3);
}

TEST(NormalQuantileTest, AgreesWithBisectionOracle) {
  for (double p : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.001, 0.02425, 0.1,
                   0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1 - 1e-5, 1 - 1e-10}) {
    EXPECT_NEAR(*NormalQuantile(p), ReferenceQuantile(p), 1e-9) << "p=" << p;
  }
}

TEST(NormalQuantileTest, InvertsCdf) {
  for (double p = 0.0005; p < 1.0; p += 0.0005) {
    EXPECT_NEAR(NormalCdf(*NormalQuantile(p)), p, 1e-10);
  }
}

TEST(NormalQuantileTest, RoundTripOnSymmetricRange) {
  for (double z = -8.0; z <= 8.0; z += 0.01) {
    const double p = NormalCdf(z);
    if (p <= 0.0 || p >= 1.0) continue;
    // Above z = 5 the lower-tail probability has too few bits left; use the
    // upper-tail entry point there.
    const double back = z > 5.0 ? *NormalUpperQuantile(NormalCdf(-z))
                                : *NormalQuantile(p);
    EXPECT_NEAR(back, z, 1e-9) << "z=" << z;
  }
}

TEST(NormalQuantileTest, UpperTailAccuracy) {
  for (double q : {1e-300, 1e-50, 2.5e-5, 1e-7}) {
    EXPECT_NEAR(*NormalUpperQuantile(q), -ReferenceQuantile(q), 1e-9);
  }
}

TEST(NormalQuantileTest, DomainErrors) {
  EXPECT_FALSE(NormalQuantile(0.0).ok());
  EXPECT_FALSE(NormalQuantile(1.0).ok());
  EXPECT_FALSE(NormalQuantile(-0.1).ok());
  EXPECT_FALSE(NormalQuantile(std::nan("")).ok());
  EXPECT_FALSE(NormalUpperQuantile(0.0).ok());
}

TEST(RngStreamTest, SameKeySameSequence) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  RngStream c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = a();
    EXPECT_EQ(x, b());
    differs = differs || x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(RngStreamTest, UniformIsOpenInterval) {
  RngStream rng(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(SampleNormalTest, DegenerateAndErrors) {
  RngStream rng(3, 0);
  EXPECT_EQ(*SampleNormal(rng, 5.0, 0.0), 5.0);
  EXPECT_FALSE(SampleNormal(rng, 0.0, -1.0).ok());
}

TEST(SampleNormalTest, Moments) {
  RngStream rng(3, 1);
  const int n = 1000000;
  double sum = 0.0;
  double sum_sq = 0.0;
  int positive = 0;
  for (int i = 0; i < n; ++i) {
    const double x = *SampleNormal(rng, 0.0, 1.0);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 4.0 / 1000);
  EXPECT_NEAR(sum_sq / n - mean * mean, 1.0, 0.005);
  for (int i = 0; i < n; ++i) positive += *SampleNormal(rng, 0.0, 2.0) > 0.0;
  EXPECT_NEAR(static_cast<double>(positive) / n, 0.5, 0.002);
}

TEST(SampleGammaTest, Moments) {
  RngStream rng(5, 0);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += *SampleGamma(rng, 10.0, 200.0);
  EXPECT_NEAR(sum / n / 2000.0, 1.0, 0.01);

  int above = 0;
  for (int i = 0; i < n; ++i) above += *SampleGamma(rng, 1.0, 1.0) > 1.0;
  EXPECT_NEAR(static_cast<double>(above) / n, std::exp(-1.0), 0.002);

  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = *SampleGamma(rng, 2.0, 3.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  EXPECT_NEAR((s2 / n - mean * mean) / 18.0, 1.0, 0.02);
}

TEST(SampleGammaTest, SmallShape) {
  RngStream rng(5, 1);
  const int n = 400000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += *SampleGamma(rng, 0.3, 2.0);
  EXPECT_NEAR(sum / n, 0.6, 0.01);
}

TEST(SampleGammaTest, Errors) {
  RngStream rng(5, 2);
  EXPECT_FALSE(SampleGamma(rng, 0.0, 1.0).ok());
  EXPECT_FALSE(SampleGamma(rng, 1.0, -1.0).ok());
}

TEST(SampleDirichletTest, SingletonAndSums) {
  RngStream rng(9, 0);
  const std::vector<double> one = {3.5};
  EXPECT_THAT(*SampleDirichlet(rng, one), testing::ElementsAre(1.0));
  const std::vector<double> b = {0.01, 0.5, 2.0, 40.0};
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> p = *SampleDirichlet(rng, b);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SampleDirichletTest, Means) {
  RngStream rng(9, 1);
  const std::vector<double> flat = {1.0, 1.0};
  const std::vector<double> skew = {10.0, 30.0};
  const int n = 100000;
  double m_flat = 0.0;
  double m_skew0 = 0.0;
  double m_skew1 = 0.0;
  for (int i = 0; i < n; ++i) {
    m_flat += (*SampleDirichlet(rng, flat))[0];
    const std::vector<double> p = *SampleDirichlet(rng, skew);
    m_skew0 += p[0];
    m_skew1 += p[1];
  }
  EXPECT_NEAR(m_flat / n, 0.5, 0.005);
  EXPECT_NEAR(m_skew0 / n, 10.0 / 40.0, 0.01);
  EXPECT_NEAR(m_skew1 / n, 30.0 / 40.0, 0.01);
}

TEST(SampleDirichletTest, Errors) {
  RngStream rng(9, 2);
  const std::vector<double> empty;
  const std::vector<double> bad = {1.0, 0.0};
  EXPECT_FALSE(SampleDirichlet(rng, empty).ok());
  EXPECT_FALSE(SampleDirichlet(rng, bad).ok());
}

TEST(SampleInverseGammaTest, Moments) {
  RngStream rng(11, 0);
  const int n = 1000000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = *SampleInverseGamma(rng, 3.0, 4.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean / 2.0, 1.0, 0.01);
  // beta^2 / ((alpha-1)^2 (alpha-2)) = 16 / 4 = 4. The fourth moment is
  // infinite at shape 3, so the sample variance converges slowly.
  EXPECT_NEAR((s2 / n - mean * mean) / 4.0, 1.0, 0.1);

  double s_case2 = 0.0;
  for (int i = 0; i < n; ++i) s_case2 += *SampleInverseGamma(rng, 3.0, 2.0);
  EXPECT_NEAR(s_case2 / n, 1.0, 0.01);
}

TEST(SampleInverseGammaTest, VarianceAtLargerShape) {
  RngStream rng(11, 1);
  const int n = 1000000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = *SampleInverseGamma(rng, 6.0, 10.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double expected = 100.0 / (25.0 * 4.0);
  EXPECT_NEAR((s2 / n - mean * mean) / expected, 1.0, 0.03);
}

TEST(SampleInverseGammaTest, Errors) {
  RngStream rng(11, 2);
  EXPECT_FALSE(SampleInverseGamma(rng, 2.0, 1.0).ok());
  EXPECT_FALSE(SampleInverseGamma(rng, 3.0, 0.0).ok());
}

TEST(SamplersTest, BitIdenticalAcrossRuns) {
  RngStream a(77, 3);
  RngStream b(77, 3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(*SampleGamma(a, 0.7, 2.0), *SampleGamma(b, 0.7, 2.0));
    EXPECT_EQ(*SampleNormal(a, 1.0, 3.0), *SampleNormal(b, 1.0, 3.0));
  }
}

}  // namespace
}  // namespace gedp
