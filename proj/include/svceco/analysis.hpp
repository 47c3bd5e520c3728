#pragma once

// Evolution metrics over the corrected data and its networks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "svceco/correction.hpp"
#include "svceco/networks.hpp"
#include "svceco/powerlaw.hpp"

namespace svceco {

enum class Scenario { no_death, deathpool, corrected };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::no_death: return "no_death";
    case Scenario::deathpool: return "deathpool";
    case Scenario::corrected: return "corrected";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  if (s == "no_death") return Scenario::no_death;
  if (s == "deathpool") return Scenario::deathpool;
  if (s == "corrected") return Scenario::corrected;
  throw InputError("unknown scenario '" + std::string(s) + "'");
}

struct TimeSeries {
  std::string label;
  Scenario scenario = Scenario::corrected;
  std::vector<std::pair<Date, double>> points;  // strictly increasing t
};

// ---------------------------------------------------------------- RQ1

/// Interval during which an entity counts as available under a scenario, or
/// nullopt when it never does. no_death: from creation on. deathpool: until
/// the labeled deathpool date; a date before creation is unusable and is
/// ignored. corrected: the lifecycle estimate, if one exists.
inline std::optional<Interval> scenario_interval(const CorrectedDataset& c, const std::string& id, Date start,
                                                 LabeledStatus status, const std::optional<Date>& deathpool,
                                                 Scenario scenario) {
  switch (scenario) {
    case Scenario::no_death: return Interval{start, std::nullopt};
    case Scenario::deathpool:
      if (status == LabeledStatus::deprecated && deathpool && !(*deathpool < start)) {
        return Interval{start, *deathpool};
      }
      return Interval{start, std::nullopt};
    case Scenario::corrected:
      if (const auto* l = c.lifecycle(id)) return l->interval();
      return std::nullopt;
  }
  return std::nullopt;
}

struct CountSeries {
  TimeSeries apis;
  TimeSeries mashups;
};

inline CountSeries rq1_counts(const CorrectedDataset& c, Cadence cadence, Scenario scenario, Date from, Date to) {
  const auto points = cadence_points(cadence, from, to);
  std::vector<Interval> api_iv, mashup_iv;
  for (const auto& [id, a] : c.dataset.apis()) {
    if (auto iv = scenario_interval(c, id, a.start, a.labeled_status, a.deathpool_date, scenario)) api_iv.push_back(*iv);
  }
  for (const auto& [id, m] : c.dataset.mashups()) {
    if (auto iv = scenario_interval(c, id, m.start, m.labeled_status, m.deathpool_date, scenario)) {
      mashup_iv.push_back(*iv);
    }
  }
  // Sweep with start/end event counts.
  auto series = [&](const std::vector<Interval>& ivs, const char* label) {
    std::vector<Date> starts, ends;
    for (const auto& iv : ivs) {
      if (iv.empty()) continue;
      starts.push_back(iv.from);
      if (iv.to) ends.push_back(*iv.to);
    }
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());
    TimeSeries ts{label, scenario, {}};
    for (const Date t : points) {
      const auto started = std::upper_bound(starts.begin(), starts.end(), t) - starts.begin();
      const auto ended = std::upper_bound(ends.begin(), ends.end(), t) - ends.begin();
      ts.points.emplace_back(t, static_cast<double>(started - ended));
    }
    return ts;
  };
  return {series(api_iv, "apis"), series(mashup_iv, "mashups")};
}

// ---------------------------------------------------------------- RQ2

/// degree -> number of APIs with that many distinct co-occurring APIs.
/// Isolated APIs appear at degree 0.
inline std::map<std::int64_t, std::size_t> degree_distribution(const AASnapshot& aa) {
  std::map<std::int64_t, std::size_t> hist;
  for (const auto& [node, nbrs] : aa.adjacency()) ++hist[static_cast<std::int64_t>(nbrs.size())];
  return hist;
}

/// Positive degrees, one entry per non-isolated API.
inline std::vector<std::int64_t> positive_degrees(const AASnapshot& aa) {
  std::vector<std::int64_t> out;
  for (const auto& [node, nbrs] : aa.adjacency()) {
    if (!nbrs.empty()) out.push_back(static_cast<std::int64_t>(nbrs.size()));
  }
  return out;
}

// ---------------------------------------------------------------- RQ3

struct DiversityReport {
  TimeSeries diversity;  // |C^t|
  /// Per snapshot: categories ordered by aggregated API count (descending,
  /// ties by name).
  std::vector<std::pair<Date, std::vector<std::pair<std::string, std::size_t>>>> popularity;
};

inline DiversityReport rq3_diversity(const std::vector<SnapshotTriple>& series) {
  DiversityReport r;
  r.diversity.label = "categories";
  for (const auto& s : series) {
    r.diversity.points.emplace_back(s.t, static_cast<double>(s.cc.nodes.size()));
    std::vector<std::pair<std::string, std::size_t>> ranked(s.cc.nodes.begin(), s.cc.nodes.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    r.popularity.emplace_back(s.t, std::move(ranked));
  }
  return r;
}

// ---------------------------------------------------------------- RQ4

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
  }

  std::size_t size_of(std::size_t x) { return size_[find(x)]; }
  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

struct ComponentStats {
  std::size_t components = 0;
  std::size_t larger_than_4 = 0;
  std::size_t largest = 0;

  friend bool operator==(const ComponentStats&, const ComponentStats&) = default;
};

/// Components of the simple graph under the A-A multiset; isolated APIs are
/// singleton components.
inline ComponentStats rq4_components(const AASnapshot& aa) {
  std::map<std::string, std::size_t> index;
  for (const auto& n : aa.nodes) index.emplace(n, index.size());
  for (const auto& e : aa.edges) {
    index.emplace(e.u, index.size());
    index.emplace(e.v, index.size());
  }
  DisjointSets sets(index.size());
  for (const auto& e : aa.edges) sets.unite(index.at(e.u), index.at(e.v));
  ComponentStats st;
  st.components = sets.components();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (sets.find(i) != i) continue;
    const auto sz = sets.size_of(i);
    if (sz > 4) ++st.larger_than_4;
    st.largest = std::max(st.largest, sz);
  }
  return st;
}

// ---------------------------------------------------------------- RQ5

struct PairSurvivalStat {
  std::string api_a;  // api_a < api_b
  std::string api_b;
  std::size_t total_use = 0;
  std::size_t active_use = 0;
  double survival_rate = 0.0;
  double avg_days = 0.0;
};

struct SurvivalBucket {
  std::size_t lo = 0;  // total_use in [lo, hi)
  std::size_t hi = 0;
  std::size_t pairs = 0;
  double mean_survival_rate = 0.0;    // unweighted mean over pairs
  double pooled_survival_rate = 0.0;  // sum active / sum total
};

struct PairSurvivalReport {
  std::vector<PairSurvivalStat> pairs;  // by total_use desc, then ids
  std::vector<SurvivalBucket> curve;    // non-empty buckets, ascending
};

inline constexpr std::size_t kSurvivalBucketWidth = 20;

/// Mashup longevity is measured up to its end, or up to `reference` while it
/// is still alive. A pair counts for a mashup if some composition segment
/// held both APIs.
inline PairSurvivalReport rq5_pair_survival(const CorrectedDataset& c, Date reference,
                                            std::size_t bucket_width = kSurvivalBucketWidth) {
  struct Acc {
    std::size_t total = 0, active = 0;
    double days = 0.0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& [id, tl] : c.timelines) {
    const auto* life = c.lifecycle(id);
    if (!life) continue;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& seg : tl.segments) {
      for (auto i = seg.api_ids.begin(); i != seg.api_ids.end(); ++i) {
        for (auto j = std::next(i); j != seg.api_ids.end(); ++j) pairs.emplace(*i, *j);
      }
    }
    const bool alive = life->active_at(reference);
    const Date until = alive || !life->end ? reference : std::min(*life->end, reference);
    const double days = static_cast<double>(std::max<std::int64_t>(0, until - life->start));
    for (const auto& p : pairs) {
      auto& a = acc[p];
      ++a.total;
      if (alive) ++a.active;
      a.days += days;
    }
  }
  PairSurvivalReport r;
  for (const auto& [p, a] : acc) {
    r.pairs.push_back({p.first, p.second, a.total, a.active,
                       static_cast<double>(a.active) / static_cast<double>(a.total),
                       a.days / static_cast<double>(a.total)});
  }
  std::stable_sort(r.pairs.begin(), r.pairs.end(),
                   [](const auto& x, const auto& y) { return x.total_use > y.total_use; });
  std::map<std::size_t, std::pair<std::vector<double>, std::pair<std::size_t, std::size_t>>> buckets;
  for (const auto& s : r.pairs) {
    auto& b = buckets[s.total_use / bucket_width];
    b.first.push_back(s.survival_rate);
    b.second.first += s.active_use;
    b.second.second += s.total_use;
  }
  for (const auto& [k, b] : buckets) {
    const double mean = std::accumulate(b.first.begin(), b.first.end(), 0.0) / static_cast<double>(b.first.size());
    r.curve.push_back({k * bucket_width, (k + 1) * bucket_width, b.first.size(), mean,
                       static_cast<double>(b.second.first) / static_cast<double>(b.second.second)});
  }
  return r;
}

// ---------------------------------------------------------------- RQ6

enum class SizePopulation { new_only, all_active };

inline std::string_view to_string(SizePopulation p) {
  return p == SizePopulation::new_only ? "new_only" : "all_active";
}

struct SizeStats {
  Date t;
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

/// Quantile by linear interpolation between closest ranks: position
/// p * (n - 1) in the sorted sample.
inline double quantile_linear(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline SizeStats size_stats(Date t, std::vector<double> sizes) {
  std::sort(sizes.begin(), sizes.end());
  SizeStats s;
  s.t = t;
  s.n = sizes.size();
  s.min = sizes.front();
  s.max = sizes.back();
  s.q1 = quantile_linear(sizes, 0.25);
  s.median = quantile_linear(sizes, 0.5);
  s.q3 = quantile_linear(sizes, 0.75);
  s.mean = std::accumulate(sizes.begin(), sizes.end(), 0.0) / static_cast<double>(sizes.size());
  return s;
}

struct SizeReport {
  std::vector<SizeStats> rows;
  std::vector<std::string> notes;  // omitted empty buckets
};

/// new_only: mashups grouped by the cadence period of their creation date,
/// sized by their initial composition. all_active: at each cadence point,
/// the current composition size of every active mashup.
inline SizeReport rq6_size_stats(const CorrectedDataset& c, Cadence cadence, SizePopulation population, Date from,
                                 Date to) {
  SizeReport r;
  const auto points = cadence_points(cadence, from, to);
  if (population == SizePopulation::new_only) {
    std::map<Date, std::vector<double>> buckets;
    for (const auto& [id, tl] : c.timelines) {
      if (tl.segments.empty()) continue;
      const Date period = period_start(cadence, tl.segments.front().from);
      if (period < from || to < period) continue;
      buckets[period].push_back(static_cast<double>(tl.segments.front().api_ids.size()));
    }
    for (const Date t : points) {
      auto b = buckets.find(t);
      if (b == buckets.end()) {
        r.notes.push_back("no new mashups in " + period_label(cadence, t));
        continue;
      }
      r.rows.push_back(size_stats(t, b->second));
    }
    return r;
  }
  for (const Date t : points) {
    std::vector<double> sizes;
    for (const auto& [id, tl] : c.timelines) {
      const auto* life = c.lifecycle(id);
      if (!life || !life->active_at(t)) continue;
      if (const auto* seg = tl.at(t)) sizes.push_back(static_cast<double>(seg->api_ids.size()));
    }
    if (sizes.empty()) {
      r.notes.push_back("no active mashups at " + t.iso());
      continue;
    }
    r.rows.push_back(size_stats(t, std::move(sizes)));
  }
  return r;
}

}  // namespace svceco
