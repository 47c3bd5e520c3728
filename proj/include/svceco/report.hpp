#pragma once

// Runs the requested analyses and renders them as CSV tables (one or two per
// analysis, long format) plus a combined JSON document.
//
// Table schemas, version 1:
//   rq1_counts.csv       scenario,kind,t,count
//   rq2_degrees.csv      t,degree,frequency
//   rq2_powerlaw.csv     t,nodes,non_isolated,status,alpha,xmin,ks,n_tail,p_value,replicates,low_confidence
//   rq3_diversity.csv    t,categories
//   rq3_popularity.csv   t,rank,category,api_count
//   rq4_components.csv   t,nodes,components,components_gt4,largest
//   rq5_pairs.csv        api_a,api_b,total_use,active_use,survival_rate,avg_days
//   rq5_curve.csv        lo,hi,pairs,mean_survival_rate,pooled_survival_rate
//   rq6_sizes.csv        population,t,n,min,q1,median,q3,max,mean

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "svceco/analysis.hpp"
#include "svceco/csv.hpp"

namespace svceco {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kAnalysisNames[] = {"rq1", "rq2", "rq3", "rq4", "rq5", "rq6"};

/// Expands "all" and validates names; throws InputError on unknown ones.
inline std::set<std::string> parse_analysis_selection(const std::vector<std::string>& names) {
  std::set<std::string> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.insert(std::begin(kAnalysisNames), std::end(kAnalysisNames));
      continue;
    }
    if (std::find(std::begin(kAnalysisNames), std::end(kAnalysisNames), n) == std::end(kAnalysisNames)) {
      throw InputError("unknown analysis '" + n + "' (expected rq1..rq6 or all)");
    }
    out.insert(n);
  }
  if (out.empty()) throw InputError("no analysis selected");
  return out;
}

struct AnalysisOptions {
  std::set<std::string> which{std::begin(kAnalysisNames), std::end(kAnalysisNames)};
  Cadence cadence = Cadence::yearly;
  std::optional<Date> from;  // default: January 1st of the earliest creation year
  std::optional<Date> to;    // default: reference
  Date reference = default_beta();
  std::optional<Scenario> scenario;  // rq1 only; default all three
  std::size_t n_boot = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct AnalysisOutput {
  std::map<std::string, std::string> tables;  // file name -> CSV text
  nlohmann::json report = nlohmann::json::object();
};

namespace detail {

inline std::string num(double v, int precision = 6) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline nlohmann::json series_json(const TimeSeries& ts) {
  auto pts = nlohmann::json::array();
  for (const auto& [t, v] : ts.points) pts.push_back({t.iso(), v});
  return {{"label", ts.label}, {"scenario", to_string(ts.scenario)}, {"points", pts}};
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) { csv::write_record(out_, header); }
  void row(const std::vector<std::string>& fields) { csv::write_record(out_, fields); }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline Date earliest_year_start(const CorrectedDataset& c, Date fallback) {
  std::optional<Date> first;
  for (const auto& [id, l] : c.lifecycles) {
    if (!first || l.start < *first) first = l.start;
  }
  for (const auto& [id, a] : c.dataset.apis()) {
    if (!first || a.start < *first) first = a.start;
  }
  for (const auto& [id, m] : c.dataset.mashups()) {
    if (!first || m.start < *first) first = m.start;
  }
  const Date d = first.value_or(fallback);
  return Date::from_ymd(d.year(), 1, 1);
}

}  // namespace detail

inline AnalysisOutput run_analyses(const CorrectedDataset& c, const AnalysisOptions& opt) {
  using detail::num;
  using detail::Table;
  AnalysisOutput out;
  const Date to = opt.to.value_or(opt.reference);
  const Date from = opt.from.value_or(detail::earliest_year_start(c, to));
  if (to < from) throw InputError("analysis range is empty: " + from.iso() + " > " + to.iso());
  auto& rep = out.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["config"] = {{"cadence", to_string(opt.cadence)},
                   {"from", from.iso()},
                   {"to", to.iso()},
                   {"reference", opt.reference.iso()},
                   {"n_boot", opt.n_boot},
                   {"seed", opt.seed}};
  rep["notes"] = nlohmann::json::array();

  const bool need_snapshots = opt.which.count("rq2") || opt.which.count("rq3") || opt.which.count("rq4");
  std::vector<SnapshotTriple> snaps;
  if (need_snapshots) {
    const auto net = build_ma(c);
    for (const auto& f : net.flags) rep["notes"].push_back(f);
    snaps = snapshot_series(net, opt.cadence, from, to);
  }

  if (opt.which.count("rq1")) {
    Table t({"scenario", "kind", "t", "count"});
    auto j = nlohmann::json::array();
    std::vector<Scenario> scenarios = {Scenario::no_death, Scenario::deathpool, Scenario::corrected};
    if (opt.scenario) scenarios = {*opt.scenario};
    for (const auto s : scenarios) {
      const auto series = rq1_counts(c, opt.cadence, s, from, to);
      for (const auto* ts : {&series.apis, &series.mashups}) {
        for (const auto& [d, v] : ts->points) {
          t.row({std::string(to_string(s)), ts->label, d.iso(), num(v, 0)});
        }
        j.push_back(detail::series_json(*ts));
      }
    }
    out.tables["rq1_counts.csv"] = t.str();
    rep["rq1"] = j;
  }

  if (opt.which.count("rq2")) {
    Table deg({"t", "degree", "frequency"});
    Table pl({"t", "nodes", "non_isolated", "status", "alpha", "xmin", "ks", "n_tail", "p_value", "replicates",
              "low_confidence"});
    auto j = nlohmann::json::array();
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto& s = snaps[i];
      const auto date = s.t.iso();
      for (const auto& [d, f] : degree_distribution(s.aa)) deg.row({date, std::to_string(d), std::to_string(f)});
      const auto degrees = positive_degrees(s.aa);
      nlohmann::json row = {{"t", date}, {"nodes", s.aa.nodes.size()}, {"non_isolated", degrees.size()}};
      try {
        auto fit = fit_power_law(degrees);
        const auto boot = pvalue_bootstrap(fit, degrees, opt.n_boot, derive_seed(opt.seed, date), opt.workers);
        fit.p_value = boot.p_value;
        pl.row({date, std::to_string(s.aa.nodes.size()), std::to_string(degrees.size()), "ok", num(fit.alpha),
                std::to_string(fit.xmin), num(fit.ks), std::to_string(fit.n_tail), num(boot.p_value),
                std::to_string(boot.replicates), fit.low_confidence ? "1" : "0"});
        row.update({{"status", "ok"},
                    {"alpha", fit.alpha},
                    {"xmin", fit.xmin},
                    {"ks", fit.ks},
                    {"n_tail", fit.n_tail},
                    {"p_value", boot.p_value},
                    {"replicates", boot.replicates},
                    {"low_confidence", fit.low_confidence},
                    {"low_precision", boot.low_precision}});
      } catch (const PowerLawError& e) {
        const char* status = e.reason() == PowerLawError::Reason::no_spread ? "no_spread" : "low_sample";
        pl.row({date, std::to_string(s.aa.nodes.size()), std::to_string(degrees.size()), status, "", "", "", "", "",
                "", ""});
        row["status"] = status;
      }
      j.push_back(std::move(row));
    }
    out.tables["rq2_degrees.csv"] = deg.str();
    out.tables["rq2_powerlaw.csv"] = pl.str();
    rep["rq2"] = j;
  }

  if (opt.which.count("rq3")) {
    const auto d = rq3_diversity(snaps);
    Table div({"t", "categories"});
    Table pop({"t", "rank", "category", "api_count"});
    for (const auto& [t, v] : d.diversity.points) div.row({t.iso(), num(v, 0)});
    auto popj = nlohmann::json::array();
    for (const auto& [t, ranked] : d.popularity) {
      auto cats = nlohmann::json::array();
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        pop.row({t.iso(), std::to_string(r + 1), ranked[r].first, std::to_string(ranked[r].second)});
        cats.push_back({ranked[r].first, ranked[r].second});
      }
      popj.push_back({{"t", t.iso()}, {"categories", cats}});
    }
    out.tables["rq3_diversity.csv"] = div.str();
    out.tables["rq3_popularity.csv"] = pop.str();
    rep["rq3"] = {{"diversity", detail::series_json(d.diversity)}, {"popularity", popj}};
  }

  if (opt.which.count("rq4")) {
    Table t({"t", "nodes", "components", "components_gt4", "largest"});
    auto j = nlohmann::json::array();
    for (const auto& s : snaps) {
      const auto st = rq4_components(s.aa);
      t.row({s.t.iso(), std::to_string(s.aa.nodes.size()), std::to_string(st.components),
             std::to_string(st.larger_than_4), std::to_string(st.largest)});
      j.push_back({{"t", s.t.iso()},
                   {"nodes", s.aa.nodes.size()},
                   {"components", st.components},
                   {"components_gt4", st.larger_than_4},
                   {"largest", st.largest}});
    }
    out.tables["rq4_components.csv"] = t.str();
    rep["rq4"] = j;
  }

  if (opt.which.count("rq5")) {
    const auto r = rq5_pair_survival(c, opt.reference);
    Table pairs({"api_a", "api_b", "total_use", "active_use", "survival_rate", "avg_days"});
    for (const auto& p : r.pairs) {
      pairs.row({p.api_a, p.api_b, std::to_string(p.total_use), std::to_string(p.active_use), num(p.survival_rate),
                 num(p.avg_days, 2)});
    }
    Table curve({"lo", "hi", "pairs", "mean_survival_rate", "pooled_survival_rate"});
    auto cj = nlohmann::json::array();
    for (const auto& b : r.curve) {
      curve.row({std::to_string(b.lo), std::to_string(b.hi), std::to_string(b.pairs), num(b.mean_survival_rate),
                 num(b.pooled_survival_rate)});
      cj.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"pairs", b.pairs},
                    {"mean_survival_rate", b.mean_survival_rate},
                    {"pooled_survival_rate", b.pooled_survival_rate}});
    }
    auto top = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, r.pairs.size()); ++i) {
      const auto& p = r.pairs[i];
      top.push_back({{"api_a", p.api_a},
                     {"api_b", p.api_b},
                     {"total_use", p.total_use},
                     {"active_use", p.active_use},
                     {"survival_rate", p.survival_rate},
                     {"avg_days", p.avg_days}});
    }
    out.tables["rq5_pairs.csv"] = pairs.str();
    out.tables["rq5_curve.csv"] = curve.str();
    rep["rq5"] = {{"pairs", r.pairs.size()},
                  {"top", top},
                  {"curve", cj},
                  {"avg_days_definition", "mashup longevity, alive mashups clipped at the reference date"}};
  }

  if (opt.which.count("rq6")) {
    Table t({"population", "t", "n", "min", "q1", "median", "q3", "max", "mean"});
    nlohmann::json j = nlohmann::json::object();
    for (const auto pop : {SizePopulation::new_only, SizePopulation::all_active}) {
      const auto r = rq6_size_stats(c, opt.cadence, pop, from, to);
      auto rows = nlohmann::json::array();
      for (const auto& s : r.rows) {
        t.row({std::string(to_string(pop)), s.t.iso(), std::to_string(s.n), num(s.min, 2), num(s.q1, 2),
               num(s.median, 2), num(s.q3, 2), num(s.max, 2), num(s.mean, 4)});
        rows.push_back({{"t", s.t.iso()},
                        {"n", s.n},
                        {"min", s.min},
                        {"q1", s.q1},
                        {"median", s.median},
                        {"q3", s.q3},
                        {"max", s.max},
                        {"mean", s.mean}});
      }
      j[std::string(to_string(pop))] = {{"rows", rows}, {"notes", r.notes}};
    }
    out.tables["rq6_sizes.csv"] = t.str();
    rep["rq6"] = j;
  }
  return out;
}

/// Plain-text digest of a combined report.
inline std::string summarize_report(const nlohmann::json& rep) {
  std::ostringstream o;
  const auto& cfg = rep.at("config");
  o << "analysis " << cfg.value("from", "") << " .. " << cfg.value("to", "") << " (" << cfg.value("cadence", "")
    << "), reference " << cfg.value("reference", "") << "\n";
  if (rep.contains("rq1")) {
    o << "\n[rq1] available entities\n";
    for (const auto& ts : rep["rq1"]) {
      const auto& pts = ts.at("points");
      if (pts.empty()) continue;
      double peak = -1;
      std::string peak_t;
      for (const auto& p : pts) {
        if (p[1].get<double>() > peak) {
          peak = p[1].get<double>();
          peak_t = p[0].get<std::string>();
        }
      }
      o << "  " << ts.value("scenario", "") << "/" << ts.value("label", "") << ": peak " << peak << " at " << peak_t
        << ", last " << pts.back()[1].get<double>() << "\n";
    }
  }
  if (rep.contains("rq2")) {
    o << "\n[rq2] degree distribution power-law fits\n";
    for (const auto& r : rep["rq2"]) {
      o << "  " << r.value("t", "") << ": ";
      if (r.value("status", "") == "ok") {
        o << "alpha=" << detail::num(r["alpha"].get<double>(), 3) << " xmin=" << r["xmin"].get<std::int64_t>()
          << " p=" << detail::num(r["p_value"].get<double>(), 3);
        if (r.value("low_confidence", false)) o << " (low confidence)";
      } else {
        o << r.value("status", "");
      }
      o << "\n";
    }
  }
  if (rep.contains("rq3")) {
    o << "\n[rq3] category diversity\n";
    for (const auto& p : rep["rq3"]["diversity"]["points"]) {
      o << "  " << p[0].get<std::string>() << ": " << p[1].get<double>() << "\n";
    }
  }
  if (rep.contains("rq4")) {
    o << "\n[rq4] connected components (count / >4 / largest)\n";
    for (const auto& r : rep["rq4"]) {
      o << "  " << r.value("t", "") << ": " << r["components"].get<std::size_t>() << " / "
        << r["components_gt4"].get<std::size_t>() << " / " << r["largest"].get<std::size_t>() << "\n";
    }
  }
  if (rep.contains("rq5")) {
    o << "\n[rq5] most frequent co-occurring pairs (active/total, rate)\n";
    for (const auto& p : rep["rq5"]["top"]) {
      o << "  " << p.value("api_a", "") << " + " << p.value("api_b", "") << ": " << p["active_use"].get<std::size_t>()
        << "/" << p["total_use"].get<std::size_t>() << ", " << detail::num(p["survival_rate"].get<double>(), 2)
        << "\n";
    }
  }
  if (rep.contains("rq6")) {
    o << "\n[rq6] mashup size (median, mean)\n";
    for (const auto& [pop, body] : rep["rq6"].items()) {
      for (const auto& r : body["rows"]) {
        o << "  " << pop << " " << r.value("t", "") << ": " << detail::num(r["median"].get<double>(), 1) << ", "
          << detail::num(r["mean"].get<double>(), 2) << "\n";
      }
    }
  }
  if (!rep.value("notes", nlohmann::json::array()).empty()) {
    o << "\n" << rep["notes"].size() << " note(s) in report\n";
  }
  return o.str();
}

}  // namespace svceco
