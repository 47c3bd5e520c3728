#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"

using namespace svceco;
using namespace svceco::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs the CLI with `args` (already shell-quoted where needed). stdout is
/// captured; stderr is discarded.
Run cli(const std::string& args, const std::string& env = "") {
  const auto out = fs::temp_directory_path() / "svceco_cli_stdout.txt";
  const std::string cmd = env + " " + SVCECO_CLI + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

/// ingest, probe and correct the Mosoto fixture into `dir`.
void mosoto_pipeline(const fs::path& dir, const std::string& extra = "--seed 7") {
  ASSERT_EQ(cli("ingest " + q(data_path("mosoto/dataset.jsonl")) + " -o " + q(dir / "ds.jsonl")).code, 0);
  ASSERT_EQ(cli("--fixture-store " + q(data_path("mosoto/probe_store")) + " probe " + q(dir / "ds.jsonl") +
                " --successors " + q(data_path("successors.json")) + " -o " + q(dir / "verdicts.jsonl"))
                .code,
            0);
  ASSERT_EQ(cli(extra + " correct " + q(dir / "ds.jsonl") + " " + q(dir / "verdicts.jsonl") + " -o " +
                q(dir / "corrected.jsonl"))
                .code,
            0);
}

}  // namespace

TEST(Cli, IngestWritesDatasetAndReport) {
  const auto dir = temp_dir("cli_ingest");
  EXPECT_EQ(cli("ingest " + q(data_path("realistic/dataset.jsonl")) + " -o " + q(dir / "ds.jsonl")).code, 0);
  EXPECT_TRUE(fs::exists(dir / "ds.jsonl"));
  const auto report = nlohmann::json::parse(slurp(dir / "ds.jsonl.validation.json"));
  EXPECT_EQ(report.at("apis"), 420);
  EXPECT_EQ(report.at("mashups"), 600);
}

TEST(Cli, IngestErrorsMapToExitCodes) {
  const auto dir = temp_dir("cli_ingest_err");
  std::ofstream(dir / "dup.jsonl")
      << R"({"kind":"api","id":"/api/a","name":"A","start":"2010-01-01","labeled_status":"available","primary_category":"Tools"})"
      << "\n"
      << R"({"kind":"api","id":"/api/a","name":"A","start":"2010-01-01","labeled_status":"available","primary_category":"Tools"})"
      << "\n";
  EXPECT_EQ(cli("ingest " + q(dir / "dup.jsonl") + " -o " + q(dir / "o.jsonl")).code, 2);
  EXPECT_EQ(cli("ingest " + q(dir / "missing.jsonl") + " -o " + q(dir / "o.jsonl")).code, 1);
  EXPECT_EQ(cli("ingest").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, MissingFixtureEntryIsDataError) {
  const auto dir = temp_dir("cli_probe_missing");
  std::ofstream(dir / "ds.jsonl")
      << R"({"kind":"api","id":"/api/a","name":"A","start":"2010-01-01","labeled_status":"available","primary_category":"Tools","endpoint_url":"https://unknown.example/"})"
      << "\n";
  EXPECT_EQ(cli("--fixture-store " + q(data_path("mosoto/probe_store")) + " probe " + q(dir / "ds.jsonl") + " -o " +
                q(dir / "v.jsonl"))
                .code,
            2);
  EXPECT_EQ(cli("probe " + q(dir / "ds.jsonl") + " -o " + q(dir / "v.jsonl")).code, 1);  // no store
}

TEST(Cli, FixtureStoreFromEnvironment) {
  const auto dir = temp_dir("cli_env");
  ASSERT_EQ(cli("ingest " + q(data_path("mosoto/dataset.jsonl")) + " -o " + q(dir / "ds.jsonl")).code, 0);
  const std::string env = std::string(kFixtureStoreEnv) + "=" + q(data_path("mosoto/probe_store"));
  EXPECT_EQ(cli("probe " + q(dir / "ds.jsonl") + " -o " + q(dir / "v.jsonl"), env).code, 0);
  EXPECT_TRUE(fs::exists(dir / "v.jsonl"));
}

TEST(Cli, CorrectNeedsSeedAndEnoughWindowSamples) {
  const auto dir = temp_dir("cli_correct");
  mosoto_pipeline(dir);
  const std::string args = "correct " + q(dir / "ds.jsonl") + " " + q(dir / "verdicts.jsonl") + " -o " + q(dir / "c.jsonl");
  EXPECT_EQ(cli(args).code, 1);
  // Only /api/facebook has a deathpool date in 2013.
  EXPECT_EQ(cli("--seed 1 --trust-window 2013-01-01,2013-12-31 " + args).code, 2);
  EXPECT_EQ(cli("--seed 1 --trust-window 2013-12-31 " + args).code, 1);
}

TEST(Cli, MosotoTimelineThroughCli) {
  const auto dir = temp_dir("cli_mosoto");
  mosoto_pipeline(dir);
  std::ifstream in(dir / "corrected.jsonl");
  const auto file = read_corrected(in);
  EXPECT_EQ(file.corrected.timelines.at("/mashup/mosoto").segments.size(), 3u);
}

TEST(Cli, AnalyzeRejectsUnknownAnalysis) {
  const auto dir = temp_dir("cli_analyze_bad");
  mosoto_pipeline(dir);
  EXPECT_EQ(cli("--seed 1 analyze " + q(dir / "corrected.jsonl") + " rq9 -o " + q(dir / "out")).code, 1);
  EXPECT_EQ(cli("analyze " + q(dir / "corrected.jsonl") + " rq2 -o " + q(dir / "out")).code, 1);  // rq2 needs a seed
  EXPECT_EQ(cli("analyze " + q(dir / "corrected.jsonl") + " rq1 rq4 -o " + q(dir / "out")).code, 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "rq4_components.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "rq2_powerlaw.csv"));
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = temp_dir("cli_rerun_a"), b = temp_dir("cli_rerun_b");
  for (const auto& dir : {a, b}) {
    mosoto_pipeline(dir);
    ASSERT_EQ(cli("--seed 7 analyze " + q(dir / "corrected.jsonl") + " all --n-boot 50 -o " + q(dir / "out")).code, 0);
    ASSERT_EQ(cli("report " + q(dir / "out" / "report.json") + " -o " + q(dir / "summary.txt")).code, 0);
  }
  for (const auto* f : {"ds.jsonl", "verdicts.jsonl", "corrected.jsonl", "out/report.json", "out/rq1_counts.csv",
                        "out/rq5_pairs.csv", "summary.txt"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_FALSE(slurp(a / "summary.txt").empty());
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = temp_dir("cli_config");
  mosoto_pipeline(dir);
  std::ofstream(dir / "run.toml") << "seed = 11\nbeta = \"2020-01-01\"\n";
  const std::string tail = " correct " + q(dir / "ds.jsonl") + " " + q(dir / "verdicts.jsonl") + " -o ";
  ASSERT_EQ(cli("--config " + q(dir / "run.toml") + tail + q(dir / "from_config.jsonl")).code, 0);
  ASSERT_EQ(cli("--seed 11 --beta 2020-01-01" + tail + q(dir / "from_flags.jsonl")).code, 0);
  ASSERT_EQ(cli("--config " + q(dir / "run.toml") + " --seed 12" + tail + q(dir / "override.jsonl")).code, 0);
  ASSERT_EQ(cli("--seed 12 --beta 2020-01-01" + tail + q(dir / "override_flags.jsonl")).code, 0);
  EXPECT_EQ(slurp(dir / "from_config.jsonl"), slurp(dir / "from_flags.jsonl"));
  EXPECT_EQ(slurp(dir / "override.jsonl"), slurp(dir / "override_flags.jsonl"));
  std::ifstream in(dir / "override.jsonl");
  EXPECT_EQ(read_corrected(in).meta.at("seed"), 12);
}

TEST(Cli, ReferenceSampleZTest) {
  const auto dir = temp_dir("cli_ztest");
  const auto ds_path = data_path("realistic/dataset.jsonl");
  ASSERT_EQ(cli("ingest " + q(ds_path) + " -o " + q(dir / "ds.jsonl")).code, 0);
  ASSERT_EQ(cli("--fixture-store " + q(data_path("realistic/probe_store")) + " probe " + q(dir / "ds.jsonl") +
                " -o " + q(dir / "v.jsonl"))
                .code,
            0);
  const auto ref = data_path("ztest/manual_check_longevity.txt");
  const auto r = cli("--seed 3 correct " + q(dir / "ds.jsonl") + " " + q(dir / "v.jsonl") + " -o " +
                     q(dir / "c.jsonl") + " --reference-sample " + q(ref));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);

  const auto ds = parse_dataset(ds_path, DatasetFormat::json_lines).dataset;
  const auto sample = deathpool_window(ds, TrustWindow{}, KindFilter::both);
  const auto fit = fit_normal_mle(std::span<const std::int64_t>(sample));
  const auto ref_sample = read_longevity_sample(ref);
  const auto z = z_test(fit, fit_normal_mle(std::span<const std::int64_t>(ref_sample)));
  EXPECT_NEAR(j.at("z").get<double>(), z.z, 1e-9);
  EXPECT_EQ(j.at("band"), to_string(z.band));
  EXPECT_EQ(j.at("n"), sample.size());
}
