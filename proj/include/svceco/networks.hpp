#pragma once

// The three dynamic networks:
//   M-A  mashup-API bipartite graph whose nodes and edges carry [start, end)
//   A-A  per-date snapshot; APIs u, v linked once per mashup w invoking both
//   C-C  per-date snapshot of A-A aggregated onto primary categories
// Activity is half-open: an element is present at t iff start <= t < end.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "svceco/correction.hpp"
#include "svceco/date.hpp"

namespace svceco {

inline constexpr const char* kUnknownCategory = "unknown";

struct NetworkNode {
  std::string id;
  Interval life;
  std::string category;
};

struct MAEdge {
  std::string mashup_id;
  std::string api_id;
  Interval interval;
};

struct MANetwork {
  std::map<std::string, NetworkNode> apis;
  std::map<std::string, NetworkNode> mashups;
  std::vector<MAEdge> edges;  // ordered by (mashup, api, start)
  std::vector<std::string> flags;
};

/// One edge per (mashup, API) and maximal run of contiguous timeline
/// segments, clipped to both lifecycles. Segments naming an API without a
/// lifecycle are flagged and the edge is skipped.
inline MANetwork build_ma(const CorrectedDataset& corrected) {
  MANetwork net;
  const auto& ds = corrected.dataset;
  for (const auto& [id, a] : ds.apis()) {
    if (const auto* life = corrected.lifecycle(id)) {
      net.apis.emplace(id, NetworkNode{id, life->interval(), a.primary_category});
    }
  }
  for (const auto& [id, tl] : corrected.timelines) {
    const auto* m = ds.find_mashup(id);
    const auto* mlife = corrected.lifecycle(id);
    if (!m || !mlife || ds.has_flag(id, Flag::empty_composition)) continue;
    net.mashups.emplace(id, NetworkNode{id, mlife->interval(), m->primary_category});
    std::map<std::string, std::vector<Interval>> runs;
    for (const auto& seg : tl.segments) {
      for (const auto& api : seg.api_ids) {
        const auto* alife = corrected.lifecycle(api);
        if (!alife) {
          net.flags.push_back("mashup " + id + " segment " + seg.from.iso() + " references " + api +
                              " which has no lifecycle");
          continue;
        }
        const auto iv = intersect(intersect(seg.interval(), mlife->interval()), alife->interval());
        if (iv.empty()) continue;
        auto& list = runs[api];
        if (!list.empty() && list.back().to && *list.back().to == iv.from) {
          list.back().to = iv.to;
        } else {
          list.push_back(iv);
        }
      }
    }
    for (const auto& [api, list] : runs) {
      for (const auto& iv : list) net.edges.push_back({id, api, iv});
    }
  }
  return net;
}

struct MASnapshot {
  Date t;
  std::set<std::string> apis;
  std::set<std::string> mashups;
  std::vector<std::pair<std::string, std::string>> edges;  // (mashup, api)
};

inline MASnapshot snapshot_active(const MANetwork& net, Date t) {
  MASnapshot s;
  s.t = t;
  for (const auto& [id, n] : net.apis) {
    if (n.life.contains(t)) s.apis.insert(id);
  }
  for (const auto& [id, n] : net.mashups) {
    if (n.life.contains(t)) s.mashups.insert(id);
  }
  for (const auto& e : net.edges) {
    if (e.interval.contains(t)) s.edges.emplace_back(e.mashup_id, e.api_id);
  }
  return s;
}

struct AAEdge {
  std::string u;  // u < v
  std::string v;
  std::string witness;

  friend auto operator<=>(const AAEdge&, const AAEdge&) = default;
};

struct AASnapshot {
  Date t;
  std::set<std::string> nodes;  // every active API, isolated ones included
  std::vector<AAEdge> edges;    // multiset, one entry per witnessing mashup

  /// Distinct neighbours per node (simple-graph view).
  std::map<std::string, std::set<std::string>> adjacency() const {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& n : nodes) adj[n];
    for (const auto& e : edges) {
      adj[e.u].insert(e.v);
      adj[e.v].insert(e.u);
    }
    return adj;
  }

  std::set<std::string> non_isolated() const {
    std::set<std::string> out;
    for (const auto& e : edges) {
      out.insert(e.u);
      out.insert(e.v);
    }
    return out;
  }
};

/// Every unordered pair of APIs jointly invoked by an active mashup, once per
/// mashup: |edges| = sum over mashups of C(k_w, 2).
inline AASnapshot project_aa(const MASnapshot& ma) {
  AASnapshot aa;
  aa.t = ma.t;
  aa.nodes = ma.apis;
  std::map<std::string, std::set<std::string>> by_mashup;
  for (const auto& [m, a] : ma.edges) by_mashup[m].insert(a);
  for (const auto& [w, apis] : by_mashup) {
    for (auto i = apis.begin(); i != apis.end(); ++i) {
      for (auto j = std::next(i); j != apis.end(); ++j) aa.edges.push_back({*i, *j, w});
    }
  }
  return aa;
}

struct CCEdge {
  std::size_t weight = 0;
  std::map<std::string, std::size_t> witnesses;  // mashup -> contributing A-A edges
};

struct CCSnapshot {
  Date t;
  std::map<std::pair<std::string, std::string>, CCEdge> edges;  // key.first <= key.second
  std::map<std::string, std::size_t> nodes;                     // category -> non-isolated API count
  std::vector<std::string> flagged;                             // APIs without a category

  std::size_t total_weight() const {
    std::size_t w = 0;
    for (const auto& [k, e] : edges) w += e.weight;
    return w;
  }
};

/// Maps each A-A edge onto its category pair. Isolated APIs are dropped, so
/// nodes are the categories of APIs with at least one co-occurrence. APIs
/// missing from `category_of` (or with an empty category) are counted under
/// "unknown" and flagged.
inline CCSnapshot aggregate_cc(const AASnapshot& aa, const std::map<std::string, std::string>& category_of) {
  CCSnapshot cc;
  cc.t = aa.t;
  std::set<std::string> flagged;
  auto cat = [&](const std::string& api) -> std::string {
    auto it = category_of.find(api);
    if (it == category_of.end() || it->second.empty()) {
      flagged.insert(api);
      return kUnknownCategory;
    }
    return it->second;
  };
  for (const auto& api : aa.non_isolated()) ++cc.nodes[cat(api)];
  for (const auto& e : aa.edges) {
    auto cu = cat(e.u);
    auto cv = cat(e.v);
    if (cv < cu) std::swap(cu, cv);
    auto& edge = cc.edges[{cu, cv}];
    ++edge.weight;
    ++edge.witnesses[e.witness];
  }
  cc.flagged.assign(flagged.begin(), flagged.end());
  return cc;
}

inline std::map<std::string, std::string> category_map(const MANetwork& net) {
  std::map<std::string, std::string> out;
  for (const auto& [id, n] : net.apis) out.emplace(id, n.category);
  return out;
}

enum class Cadence { daily, monthly, yearly };

inline Cadence parse_cadence(std::string_view s) {
  if (s == "daily") return Cadence::daily;
  if (s == "monthly") return Cadence::monthly;
  if (s == "yearly") return Cadence::yearly;
  throw InputError("unknown cadence '" + std::string(s) + "'");
}

inline std::string_view to_string(Cadence c) {
  switch (c) {
    case Cadence::daily: return "daily";
    case Cadence::monthly: return "monthly";
    case Cadence::yearly: return "yearly";
  }
  return "?";
}

/// Period starts (every day, first of month, or January 1st) in [from, to].
inline std::vector<Date> cadence_points(Cadence cadence, Date from, Date to) {
  std::vector<Date> out;
  if (to < from) return out;
  switch (cadence) {
    case Cadence::daily:
      for (Date d = from; d <= to; d = d + 1) out.push_back(d);
      break;
    case Cadence::monthly: {
      int y = from.year();
      unsigned m = from.month();
      for (Date d = Date::from_ymd(y, m, 1); d <= to;) {
        if (from <= d) out.push_back(d);
        if (++m == 13) {
          m = 1;
          ++y;
        }
        d = Date::from_ymd(y, m, 1);
      }
      break;
    }
    case Cadence::yearly:
      for (int y = from.year(); Date::from_ymd(y, 1, 1) <= to; ++y) {
        const Date d = Date::from_ymd(y, 1, 1);
        if (from <= d) out.push_back(d);
      }
      break;
  }
  return out;
}

/// Start of the cadence period containing d.
inline Date period_start(Cadence cadence, Date d) {
  switch (cadence) {
    case Cadence::daily: return d;
    case Cadence::monthly: return Date::from_ymd(d.year(), d.month(), 1);
    case Cadence::yearly: return Date::from_ymd(d.year(), 1, 1);
  }
  return d;
}

/// Period label for reports: YYYY, YYYY-MM or YYYY-MM-DD.
inline std::string period_label(Cadence cadence, Date t) {
  const auto iso = t.iso();
  switch (cadence) {
    case Cadence::yearly: return iso.substr(0, 4);
    case Cadence::monthly: return iso.substr(0, 7);
    case Cadence::daily: return iso;
  }
  return iso;
}

struct SnapshotTriple {
  Date t;
  AASnapshot aa;
  CCSnapshot cc;
};

inline std::vector<SnapshotTriple> snapshot_series(const MANetwork& net, Cadence cadence, Date from, Date to) {
  if (to < from) throw InputError("snapshot_series: empty range");
  const auto categories = category_map(net);
  std::vector<SnapshotTriple> out;
  for (const Date t : cadence_points(cadence, from, to)) {
    auto aa = project_aa(snapshot_active(net, t));
    auto cc = aggregate_cc(aa, categories);
    out.push_back({t, std::move(aa), std::move(cc)});
  }
  return out;
}

/// Tab-separated `u v w t`, one A-A edge per line.
inline void write_aa_edges(const std::vector<SnapshotTriple>& series, std::ostream& out) {
  out << "# u\tv\tw\tt\n";
  for (const auto& s : series) {
    for (const auto& e : s.aa.edges) out << e.u << '\t' << e.v << '\t' << e.witness << '\t' << s.t.iso() << '\n';
  }
}

/// Tab-separated `u v w t weight`: one line per category pair and witnessing
/// mashup; summing `weight` over w gives the pair's C-C weight.
inline void write_cc_edges(const std::vector<SnapshotTriple>& series, std::ostream& out) {
  out << "# u\tv\tw\tt\tweight\n";
  for (const auto& s : series) {
    for (const auto& [key, edge] : s.cc.edges) {
      for (const auto& [w, n] : edge.witnesses) {
        out << key.first << '\t' << key.second << '\t' << w << '\t' << s.t.iso() << '\t' << n << '\n';
      }
    }
  }
}

}  // namespace svceco
