#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "support.hpp"

using namespace svceco;
using namespace svceco::testing;

namespace {

CorrectedDataset corrected_from_labels(const std::string& rel) {
  const auto ds = parse_dataset(data_path(rel), DatasetFormat::json_lines).dataset;
  CorrectionOptions opt;
  opt.seed = 5;
  return apply_corrections(ds, verdicts_from_labels(ds), NormalFit{900, 90'000, 100}, opt);
}

AASnapshot graph(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  AASnapshot aa;
  auto name = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%05d", i);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < n; ++i) aa.nodes.insert(name(static_cast<int>(i)));
  for (auto [u, v] : edges) {
    auto a = name(u), b = name(v);
    if (b < a) std::swap(a, b);
    aa.edges.push_back({a, b, "w"});
  }
  return aa;
}

ComponentStats bfs_components(const AASnapshot& aa) {
  const auto adj = aa.adjacency();
  std::set<std::string> seen;
  ComponentStats st;
  for (const auto& [start, nbrs] : adj) {
    if (seen.count(start)) continue;
    std::deque<std::string> queue{start};
    seen.insert(start);
    std::size_t size = 0;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      ++size;
      for (const auto& nb : adj.at(cur)) {
        if (seen.insert(nb).second) queue.push_back(nb);
      }
    }
    ++st.components;
    if (size > 4) ++st.larger_than_4;
    st.largest = std::max(st.largest, size);
  }
  return st;
}

/// Hand-built corrected dataset: lifecycles only, one segment per mashup.
struct Builder {
  std::vector<ApiRecord> apis;
  std::vector<MashupRecord> mashups;
  CorrectedDataset c;

  void add_api(const std::string& id, const char* start, const char* end = nullptr) {
    apis.push_back(api(id, start));
    c.lifecycles.emplace(id, life(id, EntityKind::api, start, end));
  }
  void add_mashup(const std::string& id, const char* start, std::vector<std::string> ids, const char* end = nullptr) {
    mashups.push_back(mashup(id, start, ids));
    auto l = life(id, EntityKind::mashup, start, end);
    c.lifecycles.emplace(id, l);
    c.timelines.emplace(id, CompositionTimeline{id, {{l.start, l.end, {ids.begin(), ids.end()}, false}}});
  }
  CorrectedDataset done() {
    c.dataset = Dataset::build(apis, mashups);
    return c;
  }
};

std::vector<double> values(const TimeSeries& ts) {
  std::vector<double> out;
  for (const auto& [t, v] : ts.points) out.push_back(v);
  return out;
}

}  // namespace

TEST(Rq1, StaggeredLifecyclesByHand) {
  Builder b;
  b.add_api("/api/a", "2010-03-01", "2012-06-01");
  b.add_api("/api/b", "2011-01-01");
  b.add_api("/api/c", "2011-01-01", "2013-01-01");  // ends exactly on a point
  b.add_api("/api/d", "2012-02-01", "2012-03-01");  // between points
  const auto c = b.done();
  const auto s = rq1_counts(c, Cadence::yearly, Scenario::corrected, d("2010-01-01"), d("2014-12-31"));
  EXPECT_EQ(values(s.apis), (std::vector<double>{0, 3, 3, 1, 1}));
  const auto nd = rq1_counts(c, Cadence::yearly, Scenario::no_death, d("2010-01-01"), d("2014-12-31"));
  EXPECT_EQ(values(nd.apis), (std::vector<double>{0, 3, 3, 4, 4}));
}

TEST(Rq1, DeathpoolScenarioIgnoresImplausibleLabels) {
  Builder b;
  b.add_api("/api/a", "2010-01-01");
  b.add_api("/api/b", "2010-01-01");
  b.apis[0].labeled_status = b.apis[1].labeled_status = LabeledStatus::deprecated;
  b.apis[0].deathpool_date = d("2012-06-01");
  b.apis[1].deathpool_date = d("2009-06-01");
  const auto c = b.done();
  const auto s = rq1_counts(c, Cadence::yearly, Scenario::deathpool, d("2011-01-01"), d("2013-01-01"));
  EXPECT_EQ(values(s.apis), (std::vector<double>{2, 2, 1}));
}

TEST(Rq1, NoDeathIsMonotone) {
  const auto c = corrected_from_labels("rq5/curve.jsonl");
  const auto s = rq1_counts(c, Cadence::monthly, Scenario::no_death, d("2005-01-01"), d("2020-09-01"));
  const auto v = values(s.mashups);
  EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  const auto corrected = values(rq1_counts(c, Cadence::monthly, Scenario::corrected, d("2005-01-01"),
                                           d("2020-09-01")).mashups);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LE(corrected[i], v[i]);
}

TEST(Rq2, StarDegrees) {
  const auto star = graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EXPECT_EQ(degree_distribution(star), (std::map<std::int64_t, std::size_t>{{1, 4}, {4, 1}}));
  EXPECT_TRUE(degree_distribution(AASnapshot{}).empty());
  // Repeated witnesses do not add degree.
  auto multi = graph(3, {{0, 1}, {0, 1}});
  EXPECT_EQ(degree_distribution(multi), (std::map<std::int64_t, std::size_t>{{0, 1}, {1, 2}}));
  EXPECT_EQ(positive_degrees(multi), (std::vector<std::int64_t>{1, 1}));
}

TEST(Rq2, RandomDegreesMatchBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
    for (int k = static_cast<int>(rng() % 80); k > 0; --k) {
      const int u = static_cast<int>(rng() % n), v = static_cast<int>(rng() % n);
      if (u == v) continue;
      edges.emplace_back(u, v);
      m[u][v] = m[v][u] = true;
    }
    std::map<std::int64_t, std::size_t> want;
    for (int u = 0; u < n; ++u) ++want[std::count(m[u].begin(), m[u].end(), true)];
    ASSERT_EQ(degree_distribution(graph(n, edges)), want);
  }
}

TEST(Rq3, CategoryCounts) {
  SnapshotTriple s;
  s.t = d("2012-01-01");
  s.cc.nodes = {{"Mapping", 3}, {"Social", 5}, {"Tools", 3}};
  const auto r = rq3_diversity({s});
  EXPECT_EQ(values(r.diversity), std::vector<double>{3});
  const std::vector<std::pair<std::string, std::size_t>> ranked{{"Social", 5}, {"Mapping", 3}, {"Tools", 3}};
  EXPECT_EQ(r.popularity.at(0).second, ranked);
}

TEST(Rq4, HandGraphs) {
  const auto triangles = graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  EXPECT_EQ(rq4_components(triangles), (ComponentStats{2, 0, 3}));
  const auto path = graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  EXPECT_EQ(rq4_components(path), (ComponentStats{1, 1, 6}));
  EXPECT_EQ(rq4_components(AASnapshot{}), (ComponentStats{0, 0, 0}));
}

TEST(Rq4, RandomGraphsMatchBfs) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = rng() % (n + n / 2); k > 0; --k) {
      edges.emplace_back(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
    }
    std::erase_if(edges, [](auto e) { return e.first == e.second; });
    const auto g = graph(n, edges);
    ASSERT_EQ(rq4_components(g), bfs_components(g));
  }
}

TEST(Rq5, TopPairSurvival) {
  const auto c = corrected_from_labels("rq5/top_pair.jsonl");
  const auto r = rq5_pair_survival(c, default_beta());
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].total_use, 185u);
  EXPECT_EQ(r.pairs[0].active_use, 63u);
  EXPECT_NEAR(r.pairs[0].survival_rate, 0.34, 0.005);
}

TEST(Rq5, SingleAliveMashup) {
  Builder b;
  b.add_api("/api/a", "2010-01-01");
  b.add_api("/api/b", "2010-01-01");
  b.add_mashup("/mashup/m", "2011-01-01", {"/api/a", "/api/b"});
  const auto r = rq5_pair_survival(b.done(), d("2012-01-01"));
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(r.pairs[0].survival_rate, 1.0);
  EXPECT_DOUBLE_EQ(r.pairs[0].avg_days, 365.0);
}

TEST(Rq5, CurvePeaksBetweenFortyAndSixty) {
  const auto r = rq5_pair_survival(corrected_from_labels("rq5/curve.jsonl"), default_beta());
  ASSERT_FALSE(r.curve.empty());
  const auto peak = std::max_element(r.curve.begin(), r.curve.end(), [](const auto& a, const auto& b) {
    return a.mean_survival_rate < b.mean_survival_rate;
  });
  EXPECT_EQ(peak->lo, 40u);
  EXPECT_EQ(peak->hi, 60u);
  for (std::size_t i = 1; i < r.pairs.size(); ++i) EXPECT_GE(r.pairs[i - 1].total_use, r.pairs[i].total_use);
}

TEST(Rq5, MatchesBruteForcePairScan) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    Builder b;
    const int n_api = 6;
    for (int i = 0; i < n_api; ++i) b.add_api("/api/" + std::to_string(i), "2008-01-01");
    std::map<std::pair<std::string, std::string>, std::pair<int, int>> want;
    for (int m = 0; m < 40; ++m) {
      std::vector<std::string> ids;
      for (int i = 0; i < n_api; ++i) {
        if (rng() % 2) ids.push_back("/api/" + std::to_string(i));
      }
      const bool alive = rng() % 3 == 0;
      b.add_mashup("/mashup/" + std::to_string(m), "2010-01-01", ids, alive ? nullptr : "2015-01-01");
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          auto& w = want[{ids[i], ids[j]}];
          ++w.first;
          w.second += alive;
        }
      }
    }
    const auto r = rq5_pair_survival(b.done(), d("2018-01-01"));
    ASSERT_EQ(r.pairs.size(), want.size());
    for (const auto& p : r.pairs) {
      const auto& w = want.at({p.api_a, p.api_b});
      ASSERT_EQ(p.total_use, static_cast<std::size_t>(w.first));
      ASSERT_EQ(p.active_use, static_cast<std::size_t>(w.second));
    }
  }
}

TEST(Rq5, SurvivalIsMonotoneInReferenceWhenNothingIsBorn) {
  const auto c = corrected_from_labels("rq5/curve.jsonl");
  // Every mashup exists by 2015, so later reference dates can only lose survivors.
  std::optional<std::size_t> prev;
  for (int y = 2015; y <= 2020; ++y) {
    std::size_t active = 0;
    for (const auto& p : rq5_pair_survival(c, Date::from_ymd(y, 1, 1)).pairs) active += p.active_use;
    if (prev) {
      EXPECT_LE(active, *prev) << y;
    }
    prev = active;
  }
}

TEST(Rq6, HandSizes) {
  Builder b;
  for (int i = 0; i < 40; ++i) b.add_api("/api/" + std::to_string(i), "2005-01-01");
  const std::vector<int> sizes{1, 1, 2, 3, 36};
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<std::string> ids;
    for (int i = 0; i < sizes[k]; ++i) ids.push_back("/api/" + std::to_string(i));
    b.add_mashup("/mashup/" + std::to_string(k), "2010-04-01", ids);
  }
  const auto c = b.done();
  const auto r = rq6_size_stats(c, Cadence::yearly, SizePopulation::new_only, d("2009-01-01"), d("2010-12-31"));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].t, d("2010-01-01"));
  EXPECT_EQ(r.rows[0].min, 1);
  EXPECT_EQ(r.rows[0].median, 2);
  EXPECT_EQ(r.rows[0].max, 36);
  EXPECT_EQ(r.rows[0].q1, 1);
  EXPECT_EQ(r.rows[0].q3, 3);
  EXPECT_DOUBLE_EQ(r.rows[0].mean, 8.6);
  EXPECT_EQ(r.notes.size(), 1u);  // 2009 is empty
}

TEST(Rq6, SingleMashup) {
  Builder b;
  b.add_api("/api/a", "2005-01-01");
  b.add_api("/api/b", "2005-01-01");
  b.add_mashup("/mashup/m", "2010-04-01", {"/api/a", "/api/b"});
  const auto r = rq6_size_stats(b.done(), Cadence::yearly, SizePopulation::all_active, d("2011-01-01"), d("2011-01-01"));
  ASSERT_EQ(r.rows.size(), 1u);
  const auto& s = r.rows[0];
  for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean}) EXPECT_EQ(v, 2.0);
}

TEST(Rq6, QuantilesMatchSortOracle) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 50);
    for (auto& x : xs) x = static_cast<double>(1 + rng() % 30);
    const auto s = size_stats(d("2010-01-01"), xs);
    std::sort(xs.begin(), xs.end());
    auto q = [&](double p) {
      // Hyndman-Fan type 7: h = (n-1)p, interpolate floor(h) and floor(h)+1.
      const double h = (xs.size() - 1) * p;
      const auto lo = static_cast<std::size_t>(h);
      return lo + 1 < xs.size() ? xs[lo] + (h - lo) * (xs[lo + 1] - xs[lo]) : xs[lo];
    };
    ASSERT_DOUBLE_EQ(s.q1, q(0.25));
    ASSERT_DOUBLE_EQ(s.median, q(0.5));
    ASSERT_DOUBLE_EQ(s.q3, q(0.75));
    ASSERT_EQ(s.min, xs.front());
    ASSERT_EQ(s.max, xs.back());
  }
}

TEST(RunAnalyses, EmptyDatasetIsWellFormed) {
  CorrectedDataset c;
  AnalysisOptions opt;
  opt.from = d("2010-01-01");
  opt.to = d("2012-01-01");
  opt.n_boot = 10;
  const auto out = run_analyses(c, opt);
  EXPECT_EQ(out.report.at("schema_version"), kReportSchemaVersion);
  for (const auto* name : {"rq1_counts.csv", "rq2_powerlaw.csv", "rq4_components.csv", "rq6_sizes.csv"}) {
    ASSERT_TRUE(out.tables.count(name)) << name;
    EXPECT_NE(out.tables.at(name).find('\n'), std::string::npos) << name;
  }
  EXPECT_NO_THROW(summarize_report(out.report));
}

TEST(RunAnalyses, SelectionParsing) {
  EXPECT_EQ(parse_analysis_selection({"all"}).size(), std::size(kAnalysisNames));
  EXPECT_EQ(parse_analysis_selection({"rq2", "rq5"}), (std::set<std::string>{"rq2", "rq5"}));
  EXPECT_THROW(parse_analysis_selection({"rq9"}), InputError);
  EXPECT_THROW(parse_scenario("zombie"), InputError);
}
