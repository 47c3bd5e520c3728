#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace svceco;

namespace {

/// Direct partial sum with an integral tail correction.
double zeta_direct(double s, double q) {
  constexpr int kTerms = 200'000;
  double sum = 0.0;
  for (int k = kTerms - 1; k >= 0; --k) sum += std::pow(q + k, -s);
  const double end = q + kTerms;
  return sum + std::pow(end, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(end, -s);
}

std::vector<std::int64_t> draw(const DiscretePowerLaw& law, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = law.sample(rng);
  return out;
}

std::vector<std::int64_t> geometric(double p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::geometric_distribution<std::int64_t> g(p);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = 1 + g(rng);
  return out;
}

/// Evaluates the empirical and model CDFs at every integer in [xmin, max].
double ks_brute(double alpha, std::int64_t xmin, const std::vector<std::int64_t>& data) {
  std::vector<std::int64_t> tail;
  for (auto x : data) {
    if (x >= xmin) tail.push_back(x);
  }
  std::sort(tail.begin(), tail.end());
  const DiscretePowerLaw law{alpha, xmin};
  double d = 0.0;
  std::size_t below = 0;
  for (std::int64_t x = xmin; x <= tail.back(); ++x) {
    while (below < tail.size() && tail[below] <= x) ++below;
    const double emp = static_cast<double>(below) / tail.size();
    d = std::max(d, std::abs(emp - (1.0 - law.ccdf(x + 1))));
  }
  return d;
}

double rejection_rate(const std::vector<std::vector<std::int64_t>>& samples, std::size_t n_boot) {
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto fit = fit_power_law(samples[i]);
    if (pvalue_bootstrap(fit, samples[i], n_boot, 1000 + i).p_value < 0.1) ++rejected;
  }
  return static_cast<double>(rejected) / samples.size();
}

}  // namespace

TEST(Zeta, MatchesRiemannZeta) {
  for (double s : {1.1, 1.5, 2.0, 2.5, 3.7, 6.0}) {
    EXPECT_NEAR(hurwitz_zeta(s, 1.0) / std::riemann_zeta(s), 1.0, 1e-11) << s;
  }
}

TEST(Zeta, MatchesDirectSums) {
  for (double s : {1.8, 2.5, 3.3}) {
    for (double q : {0.5, 1.0, 2.5, 17.0, 400.0}) {
      EXPECT_NEAR(hurwitz_zeta(s, q) / zeta_direct(s, q), 1.0, 1e-9) << s << " " << q;
    }
  }
  // The scaled form agrees with the plain one after undoing the scale.
  EXPECT_NEAR(hurwitz_zeta_scaled(2.5, 30.0, 10.0) * std::pow(10.0, -2.5) / hurwitz_zeta(2.5, 30.0), 1.0, 1e-12);
  EXPECT_THROW(hurwitz_zeta(1.0, 1.0), std::domain_error);
}

TEST(DiscreteLaw, CcdfDifferencesArePmf) {
  const DiscretePowerLaw law{2.3, 3};
  EXPECT_DOUBLE_EQ(law.ccdf(3), 1.0);
  EXPECT_DOUBLE_EQ(law.ccdf(1), 1.0);
  const double z = zeta_direct(2.3, 3.0);
  for (std::int64_t x = 3; x < 40; ++x) {
    EXPECT_NEAR(law.ccdf(x) - law.ccdf(x + 1), std::pow(static_cast<double>(x), -2.3) / z, 1e-10);
  }
}

TEST(DiscreteLaw, SamplerMatchesPmf) {
  const DiscretePowerLaw law{2.5, 2};
  const std::size_t n = 200'000;
  const auto xs = draw(law, n, 8);
  std::map<std::int64_t, std::size_t> freq;
  for (auto x : xs) {
    ASSERT_GE(x, 2);
    ++freq[x];
  }
  for (std::int64_t x = 2; x <= 12; ++x) {
    const double p = law.ccdf(x) - law.ccdf(x + 1);
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(freq[x]), n * p, 4.5 * sd) << x;
  }
  std::size_t big = 0;
  for (auto x : xs) big += x >= 100;
  const double p100 = law.ccdf(100);
  EXPECT_NEAR(static_cast<double>(big), n * p100, 4.5 * std::sqrt(n * p100));
}

TEST(Fit, RecoversExponent) {
  const auto xs = draw({2.5, 1}, 10'000, 42);
  const auto fit = fit_power_law(xs);
  EXPECT_GE(fit.alpha, 2.4);
  EXPECT_LE(fit.alpha, 2.6);
  EXPECT_GE(fit.n_tail, kPowerLawConfidentTail);
  EXPECT_FALSE(fit.low_confidence);
  EXPECT_EQ(fit.n, xs.size());
  EXPECT_NEAR(fit.ks, ks_brute(fit.alpha, fit.xmin, xs), 1e-9);
}

TEST(Fit, Errors) {
  const std::vector<std::int64_t> same(20, 3);
  try {
    fit_power_law(same);
    FAIL();
  } catch (const PowerLawError& e) {
    EXPECT_EQ(e.reason(), PowerLawError::Reason::no_spread);
  }
  const std::vector<std::int64_t> few{1, 2, 3};
  try {
    fit_power_law(few);
    FAIL();
  } catch (const PowerLawError& e) {
    EXPECT_EQ(e.reason(), PowerLawError::Reason::low_sample);
  }
  std::vector<std::int64_t> zero(20, 2);
  zero[0] = 0;
  zero[1] = 5;
  try {
    fit_power_law(zero);
    FAIL();
  } catch (const PowerLawError& e) {
    EXPECT_EQ(e.reason(), PowerLawError::Reason::invalid_input);
  }
}

TEST(Fit, SmallTailIsLowConfidence) {
  const auto xs = draw({2.5, 1}, 30, 5);
  const auto fit = fit_power_law(xs);
  EXPECT_TRUE(fit.low_confidence);
  EXPECT_GE(fit.n_tail, kPowerLawMinTail);
}

TEST(Ks, MatchesBruteForceOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alpha(1.6, 3.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto xs = draw({alpha(rng), 1}, 300, rng());
    std::vector<std::int64_t> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const std::int64_t xmin = sorted[rng() % (sorted.size() / 2)];
    std::vector<std::int64_t> values;
    std::vector<std::size_t> counts;
    for (auto x : sorted) {
      if (x < xmin) continue;
      if (values.empty() || values.back() != x) {
        values.push_back(x);
        counts.push_back(0);
      }
      ++counts.back();
    }
    std::size_t n_tail = 0;
    for (auto c : counts) n_tail += c;
    const double a = alpha(rng);
    ASSERT_NEAR(detail::ks_distance(a, xmin, values, counts, n_tail), ks_brute(a, xmin, xs), 1e-9);
  }
}

TEST(Bootstrap, DeterministicAndWorkerIndependent) {
  const auto xs = draw({2.2, 1}, 2'000, 6);
  const auto fit = fit_power_law(xs);
  const auto one = pvalue_bootstrap(fit, xs, 120, 17, 1);
  const auto four = pvalue_bootstrap(fit, xs, 120, 17, 4);
  EXPECT_EQ(one.p_value, four.p_value);
  EXPECT_EQ(one.replicates, 120u);
  EXPECT_EQ(pvalue_bootstrap(fit, xs, 120, 17, 2).p_value, one.p_value);
  EXPECT_FALSE(one.low_precision);
  EXPECT_TRUE(pvalue_bootstrap(fit, xs, 20, 17).low_precision);
  EXPECT_THROW(pvalue_bootstrap(fit, xs, 0, 17), InputError);
}

TEST(Bootstrap, UniformDataIsRejected) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::int64_t> u(1, 100);
  std::vector<std::int64_t> xs(10'000);
  for (auto& x : xs) x = u(rng);
  const auto fit = fit_power_law(xs);
  EXPECT_LT(pvalue_bootstrap(fit, xs, 200, 3).p_value, 0.05);
}

TEST(Bootstrap, GeometricDataIsRejectedMoreOftenThanPowerLaw) {
  std::vector<std::vector<std::int64_t>> geo, pl;
  for (std::uint64_t s = 0; s < 40; ++s) {
    geo.push_back(geometric(0.1, 2'000, 500 + s));
    pl.push_back(draw({2.5, 1}, 2'000, 900 + s));
  }
  const double geo_rate = rejection_rate(geo, 100);
  const double pl_rate = rejection_rate(pl, 100);
  EXPECT_GT(geo_rate, pl_rate + 0.1) << "geometric " << geo_rate << " power law " << pl_rate;
  EXPECT_LE(pl_rate, 0.25);
}
