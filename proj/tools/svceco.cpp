// svceco: ingest, probe, correct and analyze service-ecosystem datasets.
//
// Exit codes: 0 success, 1 usage or input error, 2 data or contract error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svceco/svceco.hpp"

namespace fs = std::filesystem;
using namespace svceco;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string beta;
  std::string trust_window;
  std::string cadence = "yearly";
  std::string scenario;
  std::string probe_mode = "fixture";
  std::string fixture_store;
  int repeat = 1;
  int workers = 1;

  RunConfig resolve() const {
    RunConfig c;
    c.seed = seed;
    if (!beta.empty()) c.beta = parse_date_arg("--beta", beta);
    if (!trust_window.empty()) c.trust_window = parse_trust_window(trust_window);
    c.cadence = parse_cadence(cadence);
    c.probe_mode = parse_probe_mode(probe_mode);
    c.fixture_store = fixture_store;
    if (repeat < 1) throw InputError("--repeat must be at least 1");
    if (workers < 1) throw InputError("--workers must be at least 1");
    c.repeat = repeat;
    c.workers = workers;
    return c;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in || fs::is_directory(p)) throw InputError("cannot read " + p.string());
  return in;
}

Dataset load_dataset(const fs::path& p) {
  auto in = open_in(p);
  auto parsed = parse_json_lines(in, p.filename().string());
  if (!parsed.errors.empty()) {
    const auto& e = parsed.errors.front();
    throw DataError(e.file + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return std::move(parsed.dataset);
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string format;
  std::string output;
  std::string report;
};

int cmd_ingest(const IngestArgs& a) {
  const fs::path in(a.input);
  if (!fs::exists(in)) throw InputError("no such input: " + a.input);
  const auto format = a.format.empty() ? (fs::is_directory(in) ? DatasetFormat::csv_pair : DatasetFormat::json_lines)
                                       : parse_dataset_format(a.format);
  auto parsed = parse_dataset(in, format);
  const auto report = validate(parsed.dataset);
  {
    auto out = open_out(a.output);
    write_json_lines(parsed.dataset, out);
  }
  const fs::path report_path = a.report.empty() ? fs::path(a.output).concat(".validation.json") : fs::path(a.report);
  {
    auto out = open_out(report_path);
    nlohmann::json j = {{"apis", parsed.dataset.apis().size()},
                        {"mashups", parsed.dataset.mashups().size()},
                        {"flags", report.to_json()},
                        {"row_errors", parsed.errors_json()}};
    out << j.dump(2) << '\n';
  }
  std::fprintf(stderr, "ingested %zu apis, %zu mashups", parsed.dataset.apis().size(),
               parsed.dataset.mashups().size());
  for (const auto f : kAllFlags) {
    if (report.count(f)) std::fprintf(stderr, ", %zu %s", report.count(f), std::string(to_string(f)).c_str());
  }
  std::fprintf(stderr, "\n");
  if (!parsed.errors.empty()) {
    std::fprintf(stderr, "warning: %zu rejected row(s), see %s\n", parsed.errors.size(), report_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------- probe

struct ProbeArgs {
  std::string dataset;
  std::string output;
  std::string successors;
  int timeout_ms = 10'000;
  int retries = 3;
  int retry_gap_ms = 1'000;
  int host_interval_ms = 1'000;
};

int cmd_probe(const ProbeArgs& a, const RunConfig& cfg) {
  const auto ds = load_dataset(a.dataset);
  ClassifyOptions opt;
  opt.policy.timeout = std::chrono::milliseconds(a.timeout_ms);
  opt.policy.retries = a.retries;
  opt.policy.retry_gap = std::chrono::milliseconds(a.retry_gap_ms);
  opt.policy.per_host_interval = std::chrono::milliseconds(a.host_interval_ms);
  opt.repeat = cfg.repeat;
  opt.workers = cfg.workers;
  if (!a.successors.empty()) opt.successors = load_successor_table(a.successors);

  VerdictMap verdicts;
  std::size_t unreachable = 0;
  if (cfg.probe_mode == ProbeMode::fixture) {
    if (cfg.fixture_store.empty()) {
      throw InputError(std::string("fixture mode needs --fixture-store or ") + kFixtureStoreEnv);
    }
    FixtureStore store(cfg.fixture_store);
    verdicts = classify_all(ds, store, opt);
  } else {
    HttpProber prober(opt.policy.per_host_interval);
    verdicts = classify_all(ds, prober, opt);
    for (const auto& [id, v] : verdicts) {
      for (const auto& e : v.evidence) {
        if (e.probe && e.probe->outcome == ProbeOutcome::unreachable) ++unreachable;
      }
    }
  }
  {
    auto out = open_out(a.output);
    write_verdicts(verdicts, out);
  }
  std::fprintf(stderr, "classified %zu entities:", verdicts.size());
  for (const auto& [v, n] : verdict_counts(verdicts)) {
    std::fprintf(stderr, " %s=%zu", std::string(to_string(v)).c_str(), n);
  }
  std::fprintf(stderr, "\n");
  if (unreachable) std::fprintf(stderr, "warning: %zu probe(s) unreachable\n", unreachable);
  return 0;
}

// ---------------------------------------------------------------- correct

struct CorrectArgs {
  std::string dataset;
  std::string verdicts;
  std::string output;
  std::string summary;
  std::string fit_kind = "both";
  std::string reference_sample;
  std::string reference_window;
  bool no_beta_clamp = false;
};

int cmd_correct(const CorrectArgs& a, const RunConfig& cfg) {
  const auto seed = cfg.require_seed();
  const auto ds = load_dataset(a.dataset);
  VerdictMap verdicts;
  {
    auto in = open_in(a.verdicts);
    verdicts = read_verdicts(in);
  }
  const auto kinds = parse_kind_filter(a.fit_kind);
  const auto sample = deathpool_window(ds, cfg.trust_window, kinds);
  if (sample.size() < 2) {
    throw DataError("trust window " + cfg.trust_window.from.iso() + ".." + cfg.trust_window.to.iso() + " yields " +
                    std::to_string(sample.size()) + " longevity sample(s); at least 2 are needed");
  }
  FitSummary summary;
  summary.fit = fit_normal_mle(std::span<const std::int64_t>(sample));
  if (!a.reference_sample.empty() && !a.reference_window.empty()) {
    throw InputError("--reference-sample and --reference-window are exclusive");
  }
  std::optional<std::vector<std::int64_t>> ref;
  if (!a.reference_sample.empty()) {
    ref = read_longevity_sample(a.reference_sample);
    summary.reference_label = fs::path(a.reference_sample).filename().string();
  } else if (!a.reference_window.empty()) {
    const auto w = parse_trust_window(a.reference_window);
    ref = deathpool_window(ds, w, kinds);
    summary.reference_label = "window " + w.from.iso() + ".." + w.to.iso();
  }
  if (ref) {
    if (ref->size() < 2) throw DataError("reference sample has fewer than 2 values");
    summary.reference = fit_normal_mle(std::span<const std::int64_t>(*ref));
    summary.z = z_test(summary.fit, *summary.reference);
  }

  CorrectionOptions opt;
  opt.seed = seed;
  opt.beta = cfg.beta;
  opt.trust_window = cfg.trust_window;
  opt.clamp_beta_to_deathpool = !a.no_beta_clamp;
  const auto corrected = apply_corrections(ds, verdicts, summary.fit, opt);

  auto meta = cfg.to_json();
  meta["source"] = ds.metadata().source;
  meta["fit_kind"] = a.fit_kind;
  meta["fit"] = summary.to_json();
  {
    auto out = open_out(a.output);
    write_corrected(corrected, meta, out);
  }
  const auto sj = summary.to_json().dump(2);
  if (!a.summary.empty()) {
    auto out = open_out(a.summary);
    out << sj << '\n';
  }
  std::printf("%s\n", sj.c_str());
  std::fprintf(stderr, "corrected %zu lifecycles, %zu timelines, %zu flagged\n", corrected.lifecycles.size(),
               corrected.timelines.size(), corrected.flags.size());
  return 0;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string input;
  std::string out_dir;
  std::vector<std::string> which{"all"};
  std::string reference;
  std::string from;
  std::string to;
  std::size_t n_boot = 1000;
};

int cmd_analyze(const AnalyzeArgs& a, const RunConfig& cfg, const std::string& scenario) {
  AnalysisOptions opt;
  opt.which = parse_analysis_selection(a.which);
  opt.cadence = cfg.cadence;
  opt.reference = a.reference.empty() ? cfg.beta : parse_date_arg("--reference", a.reference);
  if (!a.from.empty()) opt.from = parse_date_arg("--from", a.from);
  if (!a.to.empty()) opt.to = parse_date_arg("--to", a.to);
  if (!scenario.empty()) opt.scenario = parse_scenario(scenario);
  if (a.n_boot == 0) throw InputError("--n-boot must be positive");
  opt.n_boot = a.n_boot;
  opt.workers = cfg.workers;
  if (opt.which.count("rq2")) opt.seed = cfg.require_seed();
  else opt.seed = cfg.seed.value_or(0);

  CorrectedFile file;
  {
    auto in = open_in(a.input);
    file = read_corrected(in);
  }
  auto result = run_analyses(file.corrected, opt);
  result.report["input"] = fs::path(a.input).filename().string();
  const fs::path dir(a.out_dir);
  for (const auto& [name, text] : result.tables) {
    auto out = open_out(dir / name);
    out << text;
  }
  {
    auto out = open_out(dir / "report.json");
    out << result.report.dump(2) << '\n';
  }
  std::fprintf(stderr, "wrote %zu table(s) and report.json to %s\n", result.tables.size(), dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const std::string& input, const std::string& output) {
  nlohmann::json rep;
  {
    auto in = open_in(input);
    try {
      rep = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed report " + input + ": " + e.what());
    }
  }
  std::string text;
  try {
    text = summarize_report(rep);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("unexpected report layout in " + input + ": " + e.what());
  }
  if (output.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    auto out = open_out(output);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liveness correction and temporal network analysis for service ecosystems"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every sampling step");
  app.add_option("--beta", g.beta, "Latest admissible death date (YYYY-MM-DD)");
  app.add_option("--trust-window", g.trust_window, "Deathpool dates trusted as death times: FROM,TO");
  app.add_option("--cadence", g.cadence, "Snapshot cadence: daily, monthly, yearly");
  app.add_option("--scenario", g.scenario, "Restrict rq1 to one scenario: no_death, deathpool, corrected");
  app.add_option("--probe-mode", g.probe_mode, "fixture or live");
  app.add_option("--fixture-store", g.fixture_store, "Directory of canned probe responses")->envname(kFixtureStoreEnv);
  app.add_option("--repeat", g.repeat, "Probe passes merged best-of");
  app.add_option("--workers", g.workers, "Worker threads");

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Parse and validate a raw dataset");
  ingest->add_option("input", ia.input, "JSON-lines file or directory with apis.csv and mashups.csv")->required();
  ingest->add_option("--format", ia.format, "json_lines or csv_pair (default: by input type)");
  ingest->add_option("-o,--output", ia.output, "Dataset output (JSON-lines)")->required();
  ingest->add_option("--report", ia.report, "Validation report path (default: <output>.validation.json)");

  ProbeArgs pa;
  auto* probe = app.add_subcommand("probe", "Classify liveness of every entity");
  probe->add_option("dataset", pa.dataset, "Ingested dataset")->required();
  probe->add_option("-o,--output", pa.output, "Verdicts output (JSON-lines)")->required();
  probe->add_option("--successors", pa.successors, "Successor table (JSON)");
  probe->add_option("--timeout-ms", pa.timeout_ms, "Per-request timeout");
  probe->add_option("--retries", pa.retries, "Attempts per probe");
  probe->add_option("--retry-gap-ms", pa.retry_gap_ms, "Pause between attempts");
  probe->add_option("--host-interval-ms", pa.host_interval_ms, "Minimum gap between requests to one host");

  CorrectArgs ca;
  auto* correct = app.add_subcommand("correct", "Estimate lifecycles and repair compositions");
  correct->add_option("dataset", ca.dataset, "Ingested dataset")->required();
  correct->add_option("verdicts", ca.verdicts, "Verdicts from probe")->required();
  correct->add_option("-o,--output", ca.output, "Corrected dataset output")->required();
  correct->add_option("--summary", ca.summary, "Also write the fit summary here");
  correct->add_option("--fit-kind", ca.fit_kind, "Longevity sample: api, mashup or both");
  correct->add_option("--reference-sample", ca.reference_sample, "Independent longevity sample for the z-test");
  correct->add_option("--reference-window", ca.reference_window, "Deathpool window FROM,TO used as the z-test reference");
  correct->add_flag("--no-beta-clamp", ca.no_beta_clamp, "Use the global beta even for deathpool entities");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Compute rq1..rq6 over a corrected dataset");
  analyze->add_option("input", aa.input, "Corrected dataset")->required();
  analyze->add_option("which", aa.which, "rq1..rq6 or all");
  analyze->add_option("-o,--out-dir", aa.out_dir, "Output directory")->required();
  analyze->add_option("--reference", aa.reference, "Reference date for rq5 (default: beta)");
  analyze->add_option("--from", aa.from, "First snapshot date");
  analyze->add_option("--to", aa.to, "Last snapshot date (default: reference)");
  analyze->add_option("--n-boot", aa.n_boot, "Bootstrap replicates for rq2");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Print a summary of an analysis report");
  report->add_option("input", report_in, "report.json from analyze")->required();
  report->add_option("-o,--output", report_out, "Write the summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto cfg = g.resolve();
    if (*ingest) return cmd_ingest(ia);
    if (*probe) return cmd_probe(pa, cfg);
    if (*correct) return cmd_correct(ca, cfg);
    if (*analyze) return cmd_analyze(aa, cfg, g.scenario);
    if (*report) return cmd_report(report_in, report_out);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
