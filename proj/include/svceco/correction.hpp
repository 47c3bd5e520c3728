#pragma once

// Death-time estimation and composition repair.
//
// Longevities observed in the trusted deathpool window are fitted with a
// normal distribution (maximum likelihood, biased 1/n variance). Obsolete
// entities without a trusted death date get an end date drawn from that fit,
// bounded above by beta, the earliest date they are known to be gone. APIs
// that were transferred or split end when their last successor appeared.
// Mashup compositions are then replayed through every API end event.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svceco/dataset.hpp"
#include "svceco/date.hpp"
#include "svceco/hash.hpp"
#include "svceco/liveness.hpp"

namespace svceco {

struct NormalFit {
  double mu_hat = 0.0;      // days
  double sigma2_hat = 0.0;  // days^2
  std::size_t n = 0;

  double sigma() const { return std::sqrt(sigma2_hat); }
  bool degenerate() const { return sigma2_hat == 0.0; }
};

/// Sample mean and the biased (1/n) variance. Requires n >= 2 and finite
/// samples; throws DataError otherwise. Identical samples give
/// a degenerate fit (variance 0) which callers should report.
inline NormalFit fit_normal_mle(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw DataError("normal fit needs at least 2 samples, got " + std::to_string(samples.size()));
  }
  // Welford's update.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (const double x : samples) {
    if (!std::isfinite(x)) throw DataError("normal fit: non-finite sample");
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  return {mean, std::max(0.0, m2 / static_cast<double>(k)), k};
}

/// Longevities in whole days; negative values throw DataError.
inline NormalFit fit_normal_mle(std::span<const std::int64_t> samples) {
  for (const auto x : samples) {
    if (x < 0) throw DataError("normal fit: negative longevity " + std::to_string(x));
  }
  std::vector<double> xs(samples.begin(), samples.end());
  return fit_normal_mle(std::span<const double>(xs));
}

enum class ZBand { same, marginal, significant, highly_significant };

inline std::string_view to_string(ZBand b) {
  switch (b) {
    case ZBand::same: return "same";
    case ZBand::marginal: return "marginal";
    case ZBand::significant: return "significant";
    case ZBand::highly_significant: return "highly_significant";
  }
  return "?";
}

struct ZTest {
  double z = 0.0;  // +inf when both variances are 0 and the means differ
  ZBand band = ZBand::same;
};

/// Thresholds: below 2 same, [2, 2.5) marginal, [2.5, 3) significant,
/// 3 and above highly significant.
inline ZBand z_band(double z) {
  if (z < 2.0) return ZBand::same;
  if (z < 2.5) return ZBand::marginal;
  if (z < 3.0) return ZBand::significant;
  return ZBand::highly_significant;
}

inline ZTest z_test(const NormalFit& a, const NormalFit& b) {
  const double diff = std::abs(a.mu_hat - b.mu_hat);
  const double var = a.sigma2_hat + b.sigma2_hat;
  if (var == 0.0) {
    if (diff == 0.0) return {0.0, ZBand::same};
    return {std::numeric_limits<double>::infinity(), ZBand::highly_significant};
  }
  const double z = diff / std::sqrt(var);
  return {z, z_band(z)};
}

enum class Provenance { observed_deathpool, sampled, derived_successor, alive };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::observed_deathpool: return "observed_deathpool";
    case Provenance::sampled: return "sampled";
    case Provenance::derived_successor: return "derived_successor";
    case Provenance::alive: return "alive";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view s) {
  for (auto p : {Provenance::observed_deathpool, Provenance::sampled, Provenance::derived_successor,
                 Provenance::alive}) {
    if (to_string(p) == s) return p;
  }
  throw DataError("unknown provenance '" + std::string(s) + "'");
}

struct LifecycleEstimate {
  std::string entity_id;
  EntityKind kind = EntityKind::api;
  Date start;
  std::optional<Date> end;  // absent while alive
  Provenance provenance = Provenance::alive;
  Date beta;

  Interval interval() const { return {start, end}; }
  bool active_at(Date t) const { return interval().contains(t); }

  friend bool operator==(const LifecycleEstimate&, const LifecycleEstimate&) = default;
};

/// Default beta: the first liveness test date.
inline Date default_beta() { return Date::from_ymd(2020, 9, 10); }

/// Draws a longevity in whole days from the fit, redrawing values that round
/// below one day.
template <class URBG>
std::int64_t draw_longevity(const NormalFit& fit, URBG& rng) {
  if (fit.degenerate()) return std::max<std::int64_t>(1, std::llround(fit.mu_hat));
  std::normal_distribution<double> normal(fit.mu_hat, fit.sigma());
  for (int tries = 0; tries < 10'000; ++tries) {
    const auto d = std::llround(normal(rng));
    if (d >= 1) return d;
  }
  return 1;
}

/// End date for a drawn longevity `d`: start + d when that is not after
/// beta, otherwise uniform over the whole days strictly between start and
/// beta (beta itself when none exist).
template <class URBG>
Date end_from_longevity(Date start, Date beta, std::int64_t d, URBG& rng) {
  if (!(start < beta)) throw std::invalid_argument("end_from_longevity: start must precede beta");
  if (start + d <= beta) return start + d;
  const auto width = beta - start;
  if (width < 2) return beta;
  std::uniform_int_distribution<std::int64_t> uniform(1, width - 1);
  return start + uniform(rng);
}

template <class URBG>
LifecycleEstimate sample_death_time(Date start, Date beta, const NormalFit& fit, URBG& rng) {
  if (!(start < beta)) {
    throw DataError("cannot sample a death time: start " + start.iso() + " is not before beta " + beta.iso());
  }
  LifecycleEstimate e;
  e.start = start;
  e.beta = beta;
  e.provenance = Provenance::sampled;
  e.end = end_from_longevity(start, beta, draw_longevity(fit, rng), rng);
  return e;
}

/// End of a transferred or split API: the latest successor creation date.
inline Date successor_end_time(std::span<const Date> successor_starts) {
  if (successor_starts.empty()) throw std::invalid_argument("successor_end_time: no successors");
  return *std::max_element(successor_starts.begin(), successor_starts.end());
}

struct CompositionSegment {
  Date from;
  std::optional<Date> to;
  std::set<std::string> api_ids;
  bool functionally_dead = false;

  Interval interval() const { return {from, to}; }
  friend bool operator==(const CompositionSegment&, const CompositionSegment&) = default;
};

struct CompositionTimeline {
  std::string mashup_id;
  std::vector<CompositionSegment> segments;

  /// Segment covering `t`, if any.
  const CompositionSegment* at(Date t) const {
    for (const auto& s : segments) {
      if (s.interval().contains(t)) return &s;
    }
    return nullptr;
  }

  friend bool operator==(const CompositionTimeline&, const CompositionTimeline&) = default;
};

enum class DeathPattern { death, transfer, split };

inline DeathPattern pattern_of(Verdict v) {
  if (v == Verdict::transfer) return DeathPattern::transfer;
  if (v == Verdict::split) return DeathPattern::split;
  return DeathPattern::death;
}

struct UnavailabilityEvent {
  std::string api_id;
  DeathPattern pattern = DeathPattern::death;
  std::vector<std::string> successors;  // empty for death
};

/// Applies one API end event at date `t` to the open (last) segment:
///   death:    S - {a}
///   transfer: S - {a} + {a'}
///   split:    S - {a} + {a_1, ..., a_n}   (every successor is assumed used)
/// The open segment is closed at `t` and a new one begins there; an event at
/// the segment's own start date rewrites it in place so no empty interval is
/// produced. An API not in the open segment, or an event at or after the
/// timeline's end, is a no-op reported through `warning`.
inline CompositionTimeline correct_composition(CompositionTimeline timeline, const UnavailabilityEvent& event,
                                               Date t, std::string* warning = nullptr) {
  if (timeline.segments.empty()) throw std::invalid_argument("correct_composition: empty timeline");
  auto& cur = timeline.segments.back();
  if (t < cur.from) {
    throw std::invalid_argument("correct_composition: event " + t.iso() + " precedes open segment " +
                                cur.from.iso());
  }
  if (!cur.api_ids.count(event.api_id)) {
    if (warning) *warning = event.api_id + " is not part of " + timeline.mashup_id + " at " + t.iso();
    return timeline;
  }
  if (cur.to && *cur.to <= t) {
    if (warning) *warning = "event at " + t.iso() + " is after " + timeline.mashup_id + " ended";
    return timeline;
  }
  std::set<std::string> next = cur.api_ids;
  next.erase(event.api_id);
  if (event.pattern != DeathPattern::death) next.insert(event.successors.begin(), event.successors.end());
  if (t == cur.from) {
    cur.api_ids = std::move(next);
    cur.functionally_dead = cur.api_ids.empty();
    return timeline;
  }
  CompositionSegment seg{t, cur.to, std::move(next), false};
  seg.functionally_dead = seg.api_ids.empty();
  cur.to = t;
  timeline.segments.push_back(std::move(seg));
  return timeline;
}

struct CorrectionOptions {
  std::uint64_t seed = 0;
  Date beta = default_beta();
  TrustWindow trust_window;
  /// A deathpool entry proves the entity was gone by that date, even when
  /// the date is too coarse to serve as the death time itself.
  bool clamp_beta_to_deathpool = true;
};

struct CorrectedDataset {
  Dataset dataset;
  std::map<std::string, LifecycleEstimate> lifecycles;
  std::map<std::string, CompositionTimeline> timelines;
  std::map<std::string, std::vector<std::string>> flags;

  const LifecycleEstimate* lifecycle(const std::string& id) const {
    auto it = lifecycles.find(id);
    return it == lifecycles.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline Date entity_beta(Date start, LabeledStatus status, const std::optional<Date>& deathpool,
                        const CorrectionOptions& opt) {
  Date beta = opt.beta;
  if (opt.clamp_beta_to_deathpool && status == LabeledStatus::deprecated && deathpool && start < *deathpool &&
      *deathpool < beta) {
    beta = *deathpool;
  }
  return beta;
}

}  // namespace detail

/// Lifecycle for every record (unless flagged unresolved) and a composition
/// timeline for every mashup with a lifecycle and a non-empty composition.
/// Sampling for entity `id` uses a generator seeded from (seed, id), so the
/// result does not depend on iteration order.
inline CorrectedDataset apply_corrections(const Dataset& ds, const VerdictMap& verdicts, const NormalFit& fit,
                                          const CorrectionOptions& opt) {
  CorrectedDataset out;
  out.dataset = ds;
  auto flag = [&](const std::string& id, std::string note) { out.flags[id].push_back(std::move(note)); };

  auto estimate = [&](const std::string& id, EntityKind kind, Date start, LabeledStatus status,
                      const std::optional<Date>& deathpool, const std::vector<std::string>* successors) {
    LifecycleEstimate e;
    e.entity_id = id;
    e.kind = kind;
    e.start = start;
    e.beta = detail::entity_beta(start, status, deathpool, opt);
    const auto vit = verdicts.find(id);
    if (vit == verdicts.end()) {
      flag(id, "missing_verdict: treated as available");
      out.lifecycles.emplace(id, e);
      return;
    }
    const auto& v = vit->second;
    if (!is_unavailable(v.verdict)) {
      out.lifecycles.emplace(id, e);
      return;
    }
    if (deathpool && opt.trust_window.contains(*deathpool) && start < *deathpool) {
      e.end = *deathpool;
      e.provenance = Provenance::observed_deathpool;
      out.lifecycles.emplace(id, e);
      return;
    }
    if (successors && (v.verdict == Verdict::transfer || v.verdict == Verdict::split)) {
      std::vector<Date> starts;
      for (const auto& s : *successors) {
        if (const auto* a = ds.find_api(s)) starts.push_back(a->start);
        else flag(id, "successor_missing: " + s);
      }
      if (!starts.empty()) {
        const Date end = successor_end_time(starts);
        if (start < end) {
          e.end = end;
          e.provenance = Provenance::derived_successor;
          out.lifecycles.emplace(id, e);
          return;
        }
        flag(id, "successor_end_not_after_start: sampled instead");
      }
    }
    if (!(start < e.beta)) {
      flag(id, "unresolved_death: start " + start.iso() + " is not before beta " + e.beta.iso());
      return;
    }
    std::mt19937_64 rng(derive_seed(opt.seed, id));
    auto s = sample_death_time(start, e.beta, fit, rng);
    e.end = s.end;
    e.provenance = Provenance::sampled;
    out.lifecycles.emplace(id, e);
  };

  for (const auto& [id, a] : ds.apis()) {
    const auto vit = verdicts.find(id);
    const std::vector<std::string>* succ = vit == verdicts.end() ? nullptr : &vit->second.successor_ids;
    estimate(id, EntityKind::api, a.start, a.labeled_status, a.deathpool_date, succ);
  }
  for (const auto& [id, m] : ds.mashups()) {
    estimate(id, EntityKind::mashup, m.start, m.labeled_status, m.deathpool_date, nullptr);
  }

  for (const auto& [id, m] : ds.mashups()) {
    const auto* life = out.lifecycle(id);
    if (!life) continue;
    const auto initial = ds.resolved_api_ids(m);
    if (initial.empty()) continue;
    CompositionTimeline tl{id, {{m.start, life->end, {initial.begin(), initial.end()}, false}}};

    std::set<std::pair<Date, std::string>> pending;
    auto schedule = [&](const std::string& api) {
      if (const auto* al = out.lifecycle(api); al && al->end) pending.emplace(*al->end, api);
    };
    for (const auto& api : initial) schedule(api);

    while (!pending.empty()) {
      const auto [t, api] = *pending.begin();
      pending.erase(pending.begin());
      if (life->end && *life->end <= t) break;
      const Date at = std::max(t, m.start);
      UnavailabilityEvent ev{api, DeathPattern::death, {}};
      if (auto vit = verdicts.find(api); vit != verdicts.end()) {
        ev.pattern = pattern_of(vit->second.verdict);
        for (const auto& s : vit->second.successor_ids) {
          const auto* sl = out.lifecycle(s);
          if (sl && (!sl->end || at < *sl->end)) ev.successors.push_back(s);
        }
        if (ev.successors.empty()) ev.pattern = DeathPattern::death;
      }
      std::string warning;
      const auto before = tl.segments.back().api_ids;
      tl = correct_composition(std::move(tl), ev, at, &warning);
      if (!warning.empty()) continue;
      for (const auto& s : ev.successors) {
        if (!before.count(s)) schedule(s);
      }
    }
    out.timelines.emplace(id, std::move(tl));
  }
  return out;
}

}  // namespace svceco
