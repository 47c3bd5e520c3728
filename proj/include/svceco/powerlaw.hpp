#pragma once

// Discrete power-law fitting with a KS-minimizing lower cutoff and a
// semi-parametric bootstrap goodness-of-fit p-value.
//
//   p(x) = x^-alpha / zeta(alpha, xmin),  x >= xmin
//
// alpha uses the continuous approximation to the discrete MLE,
//   alpha = 1 + n_tail / sum(ln(x_i / (xmin - 1/2))),
// and xmin is the observed value whose tail minimizes the KS distance.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "svceco/error.hpp"
#include "svceco/hash.hpp"

namespace svceco {

/// zeta(s, q) * ref^s for s > 1, q > 0. Direct summation until the argument
/// reaches max(10, s + 5), then Euler-Maclaurin with six Bernoulli terms.
/// Scaling by ref^s keeps ratios like zeta(s, x) / zeta(s, xmin) finite for
/// large s.
inline double hurwitz_zeta_scaled(double s, double q, double ref) {
  if (!(s > 1.0) || !(q > 0.0) || !(ref > 0.0)) throw std::domain_error("hurwitz_zeta: need s > 1, q > 0");
  static constexpr double kCoef[] = {1.0 / 12.0,       -1.0 / 720.0,       1.0 / 30240.0,
                                     -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0};
  const double threshold = std::max(10.0, s + 5.0);
  double sum = 0.0;
  double a = q;
  while (a < threshold) {
    sum += std::pow(a / ref, -s);
    a += 1.0;
  }
  const double a_pow = std::pow(a / ref, -s);  // (a/ref)^-s
  sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
  double fac = s * a_pow / a;  // s * a^{-s-1}, scaled
  const double inv_a2 = 1.0 / (a * a);
  for (int j = 0; j < 6; ++j) {
    sum += kCoef[j] * fac;
    const double k = 2.0 * (j + 1);
    fac *= (s + k - 1.0) * (s + k) * inv_a2;
  }
  return sum;
}

inline double hurwitz_zeta(double s, double q) { return hurwitz_zeta_scaled(s, q, 1.0); }

struct DiscretePowerLaw {
  double alpha = 2.0;
  std::int64_t xmin = 1;

  /// P(X >= x) for x >= xmin.
  double ccdf(std::int64_t x) const {
    if (x <= xmin) return 1.0;
    const double ref = static_cast<double>(xmin);
    return hurwitz_zeta_scaled(alpha, static_cast<double>(x), ref) /
           hurwitz_zeta_scaled(alpha, ref, ref);
  }

  /// Exact inverse-transform draw: the smallest x >= xmin with
  /// P(X >= x + 1) < u, starting from the continuous approximation and
  /// bracketing by doubling.
  template <class URBG>
  std::int64_t sample(URBG& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = 1.0 - unif(rng);  // (0, 1]
    const double ref = static_cast<double>(xmin);
    const double z0 = hurwitz_zeta_scaled(alpha, ref, ref);
    const double target = u * z0;
    auto tail_below = [&](std::int64_t x) {  // P(X >= x+1) < u
      return hurwitz_zeta_scaled(alpha, static_cast<double>(x + 1), ref) < target;
    };
    constexpr double kCap = 1e15;
    double guess = (static_cast<double>(xmin) - 0.5) * std::pow(u, -1.0 / (alpha - 1.0)) + 0.5;
    if (!(guess < kCap)) guess = kCap;
    const std::int64_t x = std::max<std::int64_t>(xmin, static_cast<std::int64_t>(std::floor(guess)));
    if (tail_below(xmin)) return xmin;
    std::int64_t lo = x, hi = x;
    if (tail_below(x)) {
      for (std::int64_t step = 1;; step *= 2) {
        lo = std::max<std::int64_t>(xmin, hi - step);
        if (!tail_below(lo)) break;
        hi = lo;
      }
    } else {
      for (std::int64_t step = 1;; step *= 2) {
        hi = lo + step;
        if (hi >= static_cast<std::int64_t>(kCap)) return static_cast<std::int64_t>(kCap);
        if (tail_below(hi)) break;
        lo = hi;
      }
    }
    // !tail_below(lo), tail_below(hi)
    while (hi - lo > 1) {
      const auto mid = lo + (hi - lo) / 2;
      if (tail_below(mid)) hi = mid;
      else lo = mid;
    }
    return hi;
  }
};

struct PowerLawFit {
  double alpha = 0.0;
  std::int64_t xmin = 1;
  double ks = 1.0;
  std::optional<double> p_value;
  std::size_t n_tail = 0;
  std::size_t n = 0;
  bool low_confidence = false;  // fewer than 50 observations in the tail

  DiscretePowerLaw law() const { return {alpha, xmin}; }
};

class PowerLawError : public DataError {
 public:
  enum class Reason { no_spread, low_sample, invalid_input };
  PowerLawError(Reason r, const std::string& what) : DataError(what), reason_(r) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

inline constexpr std::size_t kPowerLawMinTail = 10;
inline constexpr std::size_t kPowerLawConfidentTail = 50;

namespace detail {

/// KS distance between the empirical tail (sorted values >= xmin, given as
/// unique values and counts) and the fitted law, evaluated at every integer
/// in [xmin, max]. Between consecutive observed values the empirical CDF is
/// flat and the model CDF increases, so checking each observed value and the
/// integer just before the next one is enough.
inline double ks_distance(double alpha, std::int64_t xmin, std::span<const std::int64_t> values,
                          std::span<const std::size_t> counts, std::size_t n_tail) {
  const double ref = static_cast<double>(xmin);
  const double z0 = hurwitz_zeta_scaled(alpha, ref, ref);
  double d = 0.0;
  std::size_t cum = 0;
  double z_next = hurwitz_zeta_scaled(alpha, static_cast<double>(values[0]), ref);
  for (std::size_t k = 0; k < values.size(); ++k) {
    cum += counts[k];
    const double s = static_cast<double>(cum) / static_cast<double>(n_tail);
    const double z_after = hurwitz_zeta_scaled(alpha, static_cast<double>(values[k] + 1), ref);
    d = std::max(d, std::abs(s - (1.0 - z_after / z0)));
    if (k + 1 < values.size()) {
      z_next = values[k + 1] == values[k] + 1
                   ? z_after
                   : hurwitz_zeta_scaled(alpha, static_cast<double>(values[k + 1]), ref);
      d = std::max(d, std::abs(s - (1.0 - z_next / z0)));
    }
  }
  return d;
}

inline PowerLawFit fit_sorted(std::span<const std::int64_t> sorted) {
  const std::size_t n = sorted.size();
  if (n < kPowerLawMinTail) {
    throw PowerLawError(PowerLawError::Reason::low_sample,
                        "power-law fit needs at least " + std::to_string(kPowerLawMinTail) + " observations");
  }
  if (sorted.front() < 1) throw PowerLawError(PowerLawError::Reason::invalid_input, "degrees must be positive");
  if (sorted.front() == sorted.back()) {
    throw PowerLawError(PowerLawError::Reason::no_spread, "all observations are equal");
  }
  std::vector<std::int64_t> values;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> first;  // index of first occurrence
  for (std::size_t i = 0; i < n; ++i) {
    if (values.empty() || values.back() != sorted[i]) {
      values.push_back(sorted[i]);
      counts.push_back(0);
      first.push_back(i);
    }
    ++counts.back();
  }
  // suffix sums of ln x
  std::vector<double> suffix_log(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix_log[i] = suffix_log[i + 1] + std::log(static_cast<double>(sorted[i]));

  PowerLawFit best;
  best.ks = std::numeric_limits<double>::infinity();
  // The largest value is never a candidate: a tail of identical values fits
  // any steep enough law perfectly.
  for (std::size_t j = 0; j + 1 < values.size(); ++j) {
    const std::size_t n_tail = n - first[j];
    if (n_tail < kPowerLawMinTail) break;
    const auto xmin = values[j];
    const double denom = suffix_log[first[j]] - static_cast<double>(n_tail) * std::log(static_cast<double>(xmin) - 0.5);
    const double alpha = 1.0 + static_cast<double>(n_tail) / denom;
    const double ks = ks_distance(alpha, xmin, std::span(values).subspan(j), std::span(counts).subspan(j), n_tail);
    if (ks < best.ks) {
      best.alpha = alpha;
      best.xmin = xmin;
      best.ks = ks;
      best.n_tail = n_tail;
    }
  }
  best.n = n;
  best.low_confidence = best.n_tail < kPowerLawConfidentTail;
  return best;
}

}  // namespace detail

/// Throws PowerLawError: no_spread when every degree is equal, low_sample
/// when fewer than 10 observations exist, invalid_input on non-positive
/// degrees.
inline PowerLawFit fit_power_law(std::span<const std::int64_t> degrees) {
  std::vector<std::int64_t> sorted(degrees.begin(), degrees.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::fit_sorted(sorted);
}

struct BootstrapResult {
  double p_value = 0.0;
  std::size_t replicates = 0;  // replicates that produced a fit
  bool low_precision = false;  // fewer than 100 replicates requested
};

/// Semi-parametric bootstrap. Each replicate has the original size; a value
/// comes from the fitted law with probability n_tail/n, otherwise it is
/// resampled from the observed values below xmin. Replicates are refitted
/// with the full xmin sweep and p is the fraction whose KS distance is at
/// least the observed one. Replicate r draws from a generator seeded with
/// (seed, r), so the result is independent of `workers`.
inline BootstrapResult pvalue_bootstrap(const PowerLawFit& fit, std::span<const std::int64_t> degrees,
                                        std::size_t n_boot, std::uint64_t seed, int workers = 1) {
  if (n_boot == 0) throw InputError("pvalue_bootstrap: n_boot must be positive");
  std::vector<std::int64_t> body;
  for (const auto d : degrees) {
    if (d < fit.xmin) body.push_back(d);
  }
  std::sort(body.begin(), body.end());
  const std::size_t n = degrees.size();
  const double p_tail = static_cast<double>(n - body.size()) / static_cast<double>(n);
  const auto law = fit.law();

  std::vector<double> ks(n_boot, std::numeric_limits<double>::quiet_NaN());
  auto replicate = [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::int64_t> sample(n);
    for (auto& x : sample) {
      if (body.empty() || coin(rng) < p_tail) {
        x = law.sample(rng);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, body.size() - 1);
        x = body[pick(rng)];
      }
    }
    std::sort(sample.begin(), sample.end());
    try {
      ks[r] = detail::fit_sorted(sample).ks;
    } catch (const PowerLawError&) {
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n_boot)));
  if (threads == 1) {
    for (std::size_t r = 0; r < n_boot; ++r) replicate(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < n_boot; r = next++) replicate(r);
      });
    }
    for (auto& t : pool) t.join();
  }
  BootstrapResult res;
  res.low_precision = n_boot < 100;
  std::size_t at_least = 0;
  for (const double k : ks) {
    if (std::isnan(k)) continue;
    ++res.replicates;
    if (k >= fit.ks) ++at_least;
  }
  res.p_value = res.replicates ? static_cast<double>(at_least) / static_cast<double>(res.replicates) : 0.0;
  return res;
}

}  // namespace svceco
