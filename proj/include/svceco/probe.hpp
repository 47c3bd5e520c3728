#pragma once

// Endpoint probing: a live HTTP prober and an offline fixture store that
// replays canned responses. Both implement ProbeSource.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "svceco/error.hpp"
#include "svceco/hash.hpp"

namespace svceco {

enum class ProbeOutcome { unreachable, not_found_404, other_status, ok };

inline std::string_view to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::ok: return "ok";
    case ProbeOutcome::not_found_404: return "not_found_404";
    case ProbeOutcome::unreachable: return "unreachable";
    case ProbeOutcome::other_status: return "other_status";
  }
  return "?";
}

/// Higher is more available. Strict probing keeps the best outcome seen.
constexpr int availability_rank(ProbeOutcome o) { return static_cast<int>(o); }

/// An endpoint is obsolete only on 404 or when no response was obtained.
constexpr bool is_dead_outcome(ProbeOutcome o) {
  return o == ProbeOutcome::unreachable || o == ProbeOutcome::not_found_404;
}

struct ProbeResult {
  std::string url;
  ProbeOutcome outcome = ProbeOutcome::unreachable;
  std::optional<int> status_code;  // absent iff unreachable
  std::optional<std::string> body_excerpt;
  std::int64_t probe_time = 0;  // unix seconds
  int attempt = 1;

  std::string summary() const {
    std::string s = "probe " + std::string(to_string(outcome));
    if (outcome == ProbeOutcome::other_status && status_code) s += "(" + std::to_string(*status_code) + ")";
    s += " attempt " + std::to_string(attempt);
    return s;
  }
};

/// Returns whichever result is more available; ties keep `a`.
inline const ProbeResult& best_of(const ProbeResult& a, const ProbeResult& b) {
  return availability_rank(b.outcome) > availability_rank(a.outcome) ? b : a;
}

inline ProbeResult result_from_status(std::string url, std::optional<int> status, int attempt) {
  ProbeResult r;
  r.url = std::move(url);
  r.attempt = attempt;
  r.status_code = status;
  if (!status) {
    r.outcome = ProbeOutcome::unreachable;
  } else if (*status == 404) {
    r.outcome = ProbeOutcome::not_found_404;
  } else if (*status >= 200 && *status < 400) {
    r.outcome = ProbeOutcome::ok;
  } else {
    r.outcome = ProbeOutcome::other_status;
  }
  return r;
}

struct ProbePolicy {
  std::chrono::milliseconds timeout{10'000};
  int retries = 3;
  std::chrono::milliseconds retry_gap{1'000};
  std::chrono::milliseconds per_host_interval{1'000};
};

struct UrlParts {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // includes query

  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }
};

/// Accepts absolute http(s) URLs only. Throws InputError otherwise.
inline UrlParts parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(?::(\d{1,5}))?([/?#][^\s]*)?$)",
                             std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw InputError("invalid URL '" + url + "'");
  UrlParts p;
  p.scheme = m[1].str();
  std::transform(p.scheme.begin(), p.scheme.end(), p.scheme.begin(), ::tolower);
  p.host = m[2].str();
  p.port = m[3].matched ? std::stoi(m[3].str()) : (p.scheme == "https" ? 443 : 80);
  if (p.port <= 0 || p.port > 65535) throw InputError("invalid port in URL '" + url + "'");
  p.path = m[4].matched ? m[4].str() : "/";
  if (p.path.front() != '/') p.path.insert(p.path.begin(), '/');
  if (auto hash = p.path.find('#'); hash != std::string::npos) p.path.erase(hash);
  if (p.path.empty()) p.path = "/";
  return p;
}

class ProbeSource {
 public:
  virtual ~ProbeSource() = default;
  /// Network failures become outcome=unreachable. Invalid URLs throw InputError.
  virtual ProbeResult probe(const std::string& url, const ProbePolicy& policy) = 0;
  /// Fixture sources are deterministic and may be probed in any order.
  virtual bool deterministic() const = 0;
};

/// Serializes requests to each host with a minimum spacing between them.
class HostRateLimiter {
 public:
  explicit HostRateLimiter(std::chrono::milliseconds interval) : interval_(interval) {}

  void acquire(const std::string& host) {
    std::unique_lock lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    auto& next = next_slot_[host];
    const auto slot = std::max(now, next);
    next = slot + interval_;
    lock.unlock();
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

/// Live GET prober. Up to `retries` attempts, best outcome kept, stops early
/// on success. Redirects are followed and TLS certificates are not verified:
/// a misconfigured certificate still proves the endpoint exists.
class HttpProber : public ProbeSource {
 public:
  static constexpr std::size_t kMaxBody = 256 * 1024;

  explicit HttpProber(std::chrono::milliseconds per_host_interval = std::chrono::milliseconds{1'000})
      : limiter_(per_host_interval) {}

  ProbeResult probe(const std::string& url, const ProbePolicy& policy) override {
    const UrlParts parts = parse_url(url);
    std::optional<ProbeResult> best;
    const int attempts = std::max(1, policy.retries);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      if (attempt > 1) std::this_thread::sleep_for(policy.retry_gap);
      limiter_.acquire(parts.host);
      auto r = attempt_once(url, parts, policy, attempt);
      best = best ? best_of(*best, r) : r;
      if (best->outcome == ProbeOutcome::ok) break;
    }
    return *best;
  }

  bool deterministic() const override { return false; }

 private:
  static ProbeResult attempt_once(const std::string& url, const UrlParts& parts,
                                  const ProbePolicy& policy, int attempt) {
    std::optional<int> status;
    std::optional<std::string> body;
    try {
      httplib::Client cli(parts.origin());
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy.timeout - secs);
      cli.set_connection_timeout(secs.count(), usecs.count());
      cli.set_read_timeout(secs.count(), usecs.count());
      cli.set_write_timeout(secs.count(), usecs.count());
      cli.set_follow_location(true);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
      cli.enable_server_certificate_verification(false);
#endif
      if (auto res = cli.Get(parts.path)) {
        status = res->status;
        body = res->body.substr(0, kMaxBody);
      }
    } catch (const std::exception&) {
      status.reset();
    }
    auto r = result_from_status(url, status, attempt);
    r.body_excerpt = std::move(body);
    r.probe_time = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
    return r;
  }

  HostRateLimiter limiter_;
};

/// Offline probe source: a directory of `<fnv1a64(url) as 16 hex digits>.json`
/// files. Each file is either
///   {"url": U, "status_code": 200|404|...|null, "body": "..."}
/// or a per-attempt sequence
///   {"url": U, "responses": [{"status_code": ..., "body": ...}, ...]}
/// A null or absent status_code means no response (unreachable). Attempt k
/// replays response k, repeating the last one once the list is exhausted.
/// Probe times are reported as 0 so that fixture runs are reproducible.
class FixtureStore : public ProbeSource {
 public:
  struct CannedResponse {
    std::optional<int> status_code;
    std::optional<std::string> body;
  };

  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw InputError("fixture store is not a directory: " + dir_.string());
    }
  }

  static std::string file_name(const std::string& url) { return hex64(fnv1a64(url)) + ".json"; }

  std::filesystem::path path_for(const std::string& url) const { return dir_ / file_name(url); }

  bool contains(const std::string& url) const { return std::filesystem::exists(path_for(url)); }

  static void write(const std::filesystem::path& dir, const std::string& url,
                    const std::vector<CannedResponse>& responses) {
    std::filesystem::create_directories(dir);
    nlohmann::json j = {{"url", url}};
    auto to_obj = [](const CannedResponse& r) {
      nlohmann::json o = nlohmann::json::object();
      o["status_code"] = r.status_code ? nlohmann::json(*r.status_code) : nlohmann::json(nullptr);
      if (r.body) o["body"] = *r.body;
      return o;
    };
    if (responses.size() == 1) {
      j.update(to_obj(responses.front()));
    } else {
      j["responses"] = nlohmann::json::array();
      for (const auto& r : responses) j["responses"].push_back(to_obj(r));
    }
    std::ofstream(dir / file_name(url)) << j.dump(2) << '\n';
  }

  /// Throws DataError when the store has no entry for `url`.
  std::vector<CannedResponse> load(const std::string& url) const {
    std::ifstream in(path_for(url));
    if (!in) throw DataError("fixture store has no entry for " + url);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed fixture for " + url + ": " + e.what());
    }
    if (j.value("url", std::string{}) != url) {
      throw DataError("fixture " + file_name(url) + " does not belong to " + url);
    }
    auto read = [](const nlohmann::json& o) {
      CannedResponse r;
      if (auto it = o.find("status_code"); it != o.end() && it->is_number_integer()) {
        r.status_code = it->get<int>();
      }
      if (auto it = o.find("body"); it != o.end() && it->is_string()) r.body = it->get<std::string>();
      return r;
    };
    std::vector<CannedResponse> out;
    if (auto it = j.find("responses"); it != j.end() && it->is_array() && !it->empty()) {
      for (const auto& o : *it) out.push_back(read(o));
    } else {
      out.push_back(read(j));
    }
    return out;
  }

  ProbeResult probe(const std::string& url, const ProbePolicy& policy) override {
    parse_url(url);
    const auto responses = load(url);
    std::optional<ProbeResult> best;
    const int attempts = std::max(1, policy.retries);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      const auto& canned = responses[std::min<std::size_t>(attempt - 1, responses.size() - 1)];
      auto r = result_from_status(url, canned.status_code, attempt);
      r.body_excerpt = canned.body;
      best = best ? best_of(*best, r) : r;
      if (best->outcome == ProbeOutcome::ok) break;
    }
    return *best;
  }

  bool deterministic() const override { return true; }

 private:
  std::filesystem::path dir_;
};

}  // namespace svceco
