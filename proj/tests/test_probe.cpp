#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "httplib.h"
#include "support.hpp"

using namespace svceco;
using namespace svceco::testing;
using namespace std::chrono_literals;

TEST(Probe, StatusMapping) {
  EXPECT_EQ(result_from_status("u", 200, 1).outcome, ProbeOutcome::ok);
  EXPECT_EQ(result_from_status("u", 302, 1).outcome, ProbeOutcome::ok);
  EXPECT_EQ(result_from_status("u", 404, 1).outcome, ProbeOutcome::not_found_404);
  EXPECT_EQ(result_from_status("u", 500, 1).outcome, ProbeOutcome::other_status);
  EXPECT_EQ(result_from_status("u", 403, 1).outcome, ProbeOutcome::other_status);
  EXPECT_EQ(result_from_status("u", std::nullopt, 1).outcome, ProbeOutcome::unreachable);
  EXPECT_TRUE(is_dead_outcome(ProbeOutcome::unreachable));
  EXPECT_TRUE(is_dead_outcome(ProbeOutcome::not_found_404));
  EXPECT_FALSE(is_dead_outcome(ProbeOutcome::other_status));
}

TEST(Probe, BestOfPrefersMoreAvailable) {
  const auto gone = result_from_status("u", 404, 1);
  const auto up = result_from_status("u", 200, 2);
  const auto none = result_from_status("u", std::nullopt, 3);
  EXPECT_EQ(best_of(gone, up).outcome, ProbeOutcome::ok);
  EXPECT_EQ(best_of(up, gone).outcome, ProbeOutcome::ok);
  EXPECT_EQ(best_of(none, gone).outcome, ProbeOutcome::not_found_404);
}

TEST(Probe, UrlParsing) {
  const auto p = parse_url("https://api.example.com:8443/v1?q=1");
  EXPECT_EQ(p.scheme, "https");
  EXPECT_EQ(p.host, "api.example.com");
  EXPECT_EQ(p.port, 8443);
  EXPECT_EQ(p.path, "/v1?q=1");
  EXPECT_EQ(parse_url("http://x.org").port, 80);
  EXPECT_EQ(parse_url("http://x.org").path, "/");
  EXPECT_THROW(parse_url("ftp://x.org/"), InputError);
  EXPECT_THROW(parse_url("not a url"), InputError);
}

TEST(FixtureStore, ReplaysResponsesPerAttempt) {
  const auto dir = temp_dir("store_seq");
  FixtureStore::write(dir, "https://a.example/", {{404, std::nullopt}, {200, "hello"}});
  FixtureStore::write(dir, "https://b.example/", {{404, std::nullopt}});
  FixtureStore::write(dir, "https://c.example/", {{std::nullopt, std::nullopt}});
  FixtureStore store(dir);
  ProbePolicy policy;
  policy.retries = 3;
  const auto a = store.probe("https://a.example/", policy);
  EXPECT_EQ(a.outcome, ProbeOutcome::ok);
  EXPECT_EQ(a.attempt, 2);
  EXPECT_EQ(a.body_excerpt, "hello");
  EXPECT_EQ(store.probe("https://b.example/", policy).outcome, ProbeOutcome::not_found_404);
  EXPECT_EQ(store.probe("https://c.example/", policy).outcome, ProbeOutcome::unreachable);
  policy.retries = 1;
  EXPECT_EQ(store.probe("https://a.example/", policy).outcome, ProbeOutcome::not_found_404);
}

TEST(FixtureStore, MissingEntryIsDataError) {
  const auto dir = temp_dir("store_missing");
  FixtureStore store(dir);
  EXPECT_THROW(store.probe("https://nowhere.example/", {}), DataError);
  EXPECT_THROW(FixtureStore(dir / "absent"), InputError);
}

TEST(FixtureStore, FileNamesAreUrlHashes) {
  // Reference FNV-1a 64 values for "" and "a".
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(FixtureStore::file_name("a"), "af63dc4c8601ec8c.json");
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/ok", [](const httplib::Request&, httplib::Response& res) { res.set_content("fine", "text/plain"); });
    server_.Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    server_.Get("/flaky", [this](const httplib::Request&, httplib::Response& res) {
      if (flaky_hits_++ == 0) {
        res.status = 404;
      } else {
        res.set_content("back", "text/plain");
      }
    });
    server_.Get("/moved", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ok"); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    policy_.timeout = 2s;
    policy_.retries = 3;
    policy_.retry_gap = 0ms;
    policy_.per_host_interval = 0ms;
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::string url(const char* path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_hits_{0};
  ProbePolicy policy_;
};

TEST_F(LocalServer, OkResponse) {
  HttpProber prober(0ms);
  const auto r = prober.probe(url("/ok"), policy_);
  EXPECT_EQ(r.outcome, ProbeOutcome::ok);
  EXPECT_EQ(r.status_code, 200);
  EXPECT_EQ(r.body_excerpt, "fine");
  EXPECT_EQ(r.attempt, 1);
}

TEST_F(LocalServer, NotFoundOnEveryRetry) {
  HttpProber prober(0ms);
  const auto r = prober.probe(url("/gone"), policy_);
  EXPECT_EQ(r.outcome, ProbeOutcome::not_found_404);
  EXPECT_EQ(r.status_code, 404);
}

TEST_F(LocalServer, NotFoundThenOkIsOk) {
  HttpProber prober(0ms);
  const auto r = prober.probe(url("/flaky"), policy_);
  EXPECT_EQ(r.outcome, ProbeOutcome::ok);
  EXPECT_EQ(r.attempt, 2);
  EXPECT_EQ(flaky_hits_.load(), 2);
}

TEST_F(LocalServer, FollowsRedirects) {
  HttpProber prober(0ms);
  EXPECT_EQ(prober.probe(url("/moved"), policy_).outcome, ProbeOutcome::ok);
}

TEST_F(LocalServer, ClosedPortIsUnreachable) {
  HttpProber prober(0ms);
  // Port 1 on loopback is not listening in the test environment.
  policy_.retries = 1;
  EXPECT_EQ(prober.probe("http://127.0.0.1:1/", policy_).outcome, ProbeOutcome::unreachable);
}

TEST(HostRateLimiter, SpacesRequestsToOneHost) {
  HostRateLimiter limiter(40ms);
  const auto t0 = std::chrono::steady_clock::now();
  limiter.acquire("h");
  limiter.acquire("h");
  limiter.acquire("h");
  limiter.acquire("other");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(elapsed, 80ms);
  EXPECT_LT(elapsed, 2s);
}
