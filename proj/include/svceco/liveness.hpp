#pragma once

// Availability classification for APIs and mashups.
//
// APIs: a description phrase hit or a deathpool label marks the API obsolete;
// otherwise it is obsolete only when its endpoint is unreachable or answers
// 404. Obsolete APIs with one successor are transfers, with several are
// splits, and are dead otherwise.
//
// Mashups: unreachable when the homepage cannot be fetched (or 404s),
// replaced when the fetched page no longer mentions the mashup.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "svceco/dataset.hpp"
#include "svceco/probe.hpp"

namespace svceco {

enum class Verdict { available, dead, transfer, split, unreachable, replaced };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::available: return "available";
    case Verdict::dead: return "dead";
    case Verdict::transfer: return "transfer";
    case Verdict::split: return "split";
    case Verdict::unreachable: return "unreachable";
    case Verdict::replaced: return "replaced";
  }
  return "?";
}

inline Verdict parse_verdict(std::string_view s) {
  for (auto v : {Verdict::available, Verdict::dead, Verdict::transfer, Verdict::split,
                 Verdict::unreachable, Verdict::replaced}) {
    if (to_string(v) == s) return v;
  }
  throw DataError("unknown verdict '" + std::string(s) + "'");
}

inline bool is_unavailable(Verdict v) { return v != Verdict::available; }

inline bool verdict_allowed(EntityKind kind, Verdict v) {
  if (kind == EntityKind::api) {
    return v == Verdict::available || v == Verdict::dead || v == Verdict::transfer || v == Verdict::split;
  }
  return v == Verdict::available || v == Verdict::unreachable || v == Verdict::replaced;
}

struct Evidence {
  std::string detail;
  std::optional<ProbeResult> probe;
};

struct LivenessVerdict {
  std::string entity_id;
  EntityKind kind = EntityKind::api;
  Verdict verdict = Verdict::available;
  std::vector<Evidence> evidence;
  std::vector<std::string> successor_ids;

  std::vector<std::string> evidence_summary() const {
    std::vector<std::string> out;
    out.reserve(evidence.size());
    for (const auto& e : evidence) out.push_back(e.detail);
    return out;
  }
};

using VerdictMap = std::map<std::string, LivenessVerdict>;
using SuccessorTable = std::map<std::string, std::vector<std::string>>;

/// Versioned, extensible list of phrases that mark a description as
/// announcing the API's end of life. Matching is case-insensitive.
struct PhraseList {
  std::string version = "v1";
  std::vector<std::string> phrases = {"no longer available", "no longer exists",
                                      "has been discontinued", "deprecated"};
};

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercase, every non-alphanumeric byte becomes a single space.
inline std::string normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool space = true;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80) {
      out.push_back(static_cast<char>(std::tolower(c)));
      space = false;
    } else if (!space) {
      out.push_back(' ');
      space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace detail

/// The matched phrase, if any.
inline std::optional<std::string> match_unavailability_phrase(std::string_view description,
                                                              const PhraseList& phrases = {}) {
  const auto text = detail::lowercase(description);
  for (const auto& p : phrases.phrases) {
    if (!p.empty() && text.find(detail::lowercase(p)) != std::string::npos) return p;
  }
  return std::nullopt;
}

inline std::optional<Verdict> classify_api_text(std::string_view description,
                                                const PhraseList& phrases = {}) {
  if (match_unavailability_phrase(description, phrases)) return Verdict::dead;
  return std::nullopt;
}

/// Tokens that identify a mashup on its homepage: normalized name tokens of
/// at least four characters, or every token when the name has none that long.
inline std::vector<std::string> identifying_tokens(std::string_view name) {
  const auto norm = detail::normalize_text(name);
  std::vector<std::string> all;
  std::size_t pos = 0;
  while (pos < norm.size()) {
    auto next = norm.find(' ', pos);
    if (next == std::string::npos) next = norm.size();
    if (next > pos) all.push_back(norm.substr(pos, next - pos));
    pos = next + 1;
  }
  std::vector<std::string> longer;
  std::copy_if(all.begin(), all.end(), std::back_inserter(longer),
               [](const std::string& t) { return t.size() >= 4; });
  return longer.empty() ? all : longer;
}

inline bool page_mentions(std::string_view html, std::string_view name) {
  const auto page = detail::normalize_text(html);
  for (const auto& tok : identifying_tokens(name)) {
    if (page.find(tok) != std::string::npos) return true;
  }
  return false;
}

inline std::vector<std::string> successors_of(const ApiRecord& record, const SuccessorTable& table) {
  if (auto it = table.find(record.id); it != table.end() && !it->second.empty()) return it->second;
  return record.successor_ids;
}

/// `probe` must be present when the record has an endpoint URL and no
/// description phrase or deathpool label already decides the outcome.
inline LivenessVerdict classify_api(const ApiRecord& record, const std::optional<ProbeResult>& probe,
                                    const SuccessorTable& successors = {},
                                    const PhraseList& phrases = {}) {
  LivenessVerdict v;
  v.entity_id = record.id;
  v.kind = EntityKind::api;
  bool obsolete = false;
  if (auto phrase = match_unavailability_phrase(record.description, phrases)) {
    obsolete = true;
    v.evidence.push_back({"text rule (" + phrases.version + "): \"" + *phrase + "\"", std::nullopt});
  } else if (record.labeled_status == LabeledStatus::deprecated) {
    obsolete = true;
    v.evidence.push_back({"deathpool label", std::nullopt});
  } else if (!record.endpoint_url) {
    obsolete = true;
    v.evidence.push_back({"no endpoint", std::nullopt});
  } else {
    if (!probe) throw std::invalid_argument("classify_api: missing probe result for " + record.id);
    obsolete = is_dead_outcome(probe->outcome);
    v.evidence.push_back({probe->summary(), probe});
  }
  if (!obsolete) {
    v.verdict = Verdict::available;
    return v;
  }
  v.successor_ids = successors_of(record, successors);
  if (v.successor_ids.size() == 1) {
    v.verdict = Verdict::transfer;
  } else if (v.successor_ids.size() >= 2) {
    v.verdict = Verdict::split;
  } else {
    v.verdict = Verdict::dead;
  }
  return v;
}

/// When `homepage_html` is absent the probe's body is inspected instead; a
/// reachable page with no body at all is taken as available.
inline LivenessVerdict classify_mashup(const MashupRecord& record, const std::optional<ProbeResult>& homepage_probe,
                                       const std::optional<std::string>& homepage_html = std::nullopt) {
  LivenessVerdict v;
  v.entity_id = record.id;
  v.kind = EntityKind::mashup;
  if (record.labeled_status == LabeledStatus::deprecated) {
    v.verdict = Verdict::unreachable;
    v.evidence.push_back({"deathpool label", std::nullopt});
    return v;
  }
  if (!record.homepage_url) {
    v.verdict = Verdict::unreachable;
    v.evidence.push_back({"no homepage", std::nullopt});
    return v;
  }
  if (!homepage_probe) throw std::invalid_argument("classify_mashup: missing probe result for " + record.id);
  v.evidence.push_back({homepage_probe->summary(), homepage_probe});
  if (is_dead_outcome(homepage_probe->outcome)) {
    v.verdict = Verdict::unreachable;
    return v;
  }
  const auto& html = homepage_html ? homepage_html : homepage_probe->body_excerpt;
  if (html && !page_mentions(*html, record.name)) {
    v.verdict = Verdict::replaced;
    v.evidence.push_back({"token rule (stand-in): homepage does not mention the mashup name", std::nullopt});
    return v;
  }
  v.verdict = Verdict::available;
  return v;
}

/// Which URL, if any, must be probed to classify the record.
inline std::optional<std::string> url_to_probe(const ApiRecord& a, const PhraseList& phrases = {}) {
  if (match_unavailability_phrase(a.description, phrases) || a.labeled_status == LabeledStatus::deprecated) {
    return std::nullopt;
  }
  return a.endpoint_url;
}

inline std::optional<std::string> url_to_probe(const MashupRecord& m) {
  if (m.labeled_status == LabeledStatus::deprecated) return std::nullopt;
  return m.homepage_url;
}

struct ClassifyOptions {
  ProbePolicy policy;
  SuccessorTable successors;
  PhraseList phrases;
  int repeat = 1;   // independent passes merged best-of per URL
  int workers = 1;  // concurrent hosts in live mode
};

/// Probes each URL `repeat` times and keeps the best result per URL.
/// Deterministic sources are probed sequentially in URL order. Live sources
/// are probed concurrently across hosts, serially within a host. Invalid URLs
/// yield unreachable results; errors from a deterministic source (e.g. a
/// missing fixture) propagate.
inline std::map<std::string, ProbeResult> probe_all(const std::set<std::string>& urls, ProbeSource& source,
                                                    const ClassifyOptions& opt) {
  std::map<std::string, ProbeResult> results;
  auto probe_one = [&](const std::string& url) {
    try {
      return source.probe(url, opt.policy);
    } catch (const InputError& e) {
      ProbeResult r = result_from_status(url, std::nullopt, 1);
      r.body_excerpt.reset();
      return r;
    }
  };
  const int passes = std::max(1, opt.repeat);
  if (source.deterministic() || opt.workers <= 1) {
    for (int pass = 0; pass < passes; ++pass) {
      for (const auto& url : urls) {
        auto r = probe_one(url);
        auto it = results.find(url);
        if (it == results.end()) results.emplace(url, std::move(r));
        else it->second = best_of(it->second, r);
      }
    }
    return results;
  }
  std::map<std::string, std::vector<std::string>> by_host;
  for (const auto& url : urls) {
    std::string host;
    try {
      host = parse_url(url).host;
    } catch (const InputError&) {
    }
    by_host[host].push_back(url);
  }
  std::vector<const std::vector<std::string>*> groups;
  for (const auto& [host, list] : by_host) groups.push_back(&list);
  std::vector<std::vector<ProbeResult>> out(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t g = next++; g < groups.size(); g = next++) {
      for (const auto& url : *groups[g]) {
        ProbeResult best = probe_one(url);
        for (int pass = 1; pass < passes; ++pass) best = best_of(best, probe_one(url));
        out[g].push_back(std::move(best));
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < std::min<int>(opt.workers, static_cast<int>(groups.size())); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& group : out) {
    for (auto& r : group) results.emplace(r.url, std::move(r));
  }
  return results;
}

/// One verdict per record. In fixture mode the result is a pure function of
/// the dataset and the fixture store.
inline VerdictMap classify_all(const Dataset& ds, ProbeSource& source, const ClassifyOptions& opt = {}) {
  std::set<std::string> urls;
  for (const auto& [id, a] : ds.apis()) {
    if (auto u = url_to_probe(a, opt.phrases)) urls.insert(*u);
  }
  for (const auto& [id, m] : ds.mashups()) {
    if (auto u = url_to_probe(m)) urls.insert(*u);
  }
  const auto probes = probe_all(urls, source, opt);
  auto lookup = [&](const std::optional<std::string>& url) -> std::optional<ProbeResult> {
    if (!url) return std::nullopt;
    return probes.at(*url);
  };
  VerdictMap verdicts;
  for (const auto& [id, a] : ds.apis()) {
    verdicts.emplace(id, classify_api(a, lookup(url_to_probe(a, opt.phrases)), opt.successors, opt.phrases));
  }
  for (const auto& [id, m] : ds.mashups()) {
    verdicts.emplace(id, classify_mashup(m, lookup(url_to_probe(m))));
  }
  return verdicts;
}

/// Verdicts read off the labels alone, for datasets without URLs: deprecated
/// APIs are dead and deprecated mashups unreachable.
inline VerdictMap verdicts_from_labels(const Dataset& ds) {
  VerdictMap out;
  for (const auto& [id, a] : ds.apis()) {
    LivenessVerdict v{id, EntityKind::api, Verdict::available, {}, {}};
    if (a.labeled_status == LabeledStatus::deprecated) {
      v.verdict = Verdict::dead;
      v.evidence.push_back({"deathpool label", std::nullopt});
    }
    out.emplace(id, std::move(v));
  }
  for (const auto& [id, m] : ds.mashups()) {
    LivenessVerdict v{id, EntityKind::mashup, Verdict::available, {}, {}};
    if (m.labeled_status == LabeledStatus::deprecated) {
      v.verdict = Verdict::unreachable;
      v.evidence.push_back({"deathpool label", std::nullopt});
    }
    out.emplace(id, std::move(v));
  }
  return out;
}

inline std::map<Verdict, std::size_t> verdict_counts(const VerdictMap& verdicts) {
  std::map<Verdict, std::size_t> counts;
  for (const auto& [id, v] : verdicts) ++counts[v.verdict];
  return counts;
}

/// JSON-lines: {id, kind, verdict, successors, evidence_summary}.
inline void write_verdicts(const VerdictMap& verdicts, std::ostream& out) {
  for (const auto& [id, v] : verdicts) {
    nlohmann::json o = {{"id", id},
                        {"kind", to_string(v.kind)},
                        {"verdict", to_string(v.verdict)},
                        {"successors", v.successor_ids},
                        {"evidence_summary", v.evidence_summary()}};
    out << o.dump() << '\n';
  }
}

inline VerdictMap read_verdicts(std::istream& in) {
  VerdictMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto o = nlohmann::json::parse(line);
      LivenessVerdict v;
      v.entity_id = o.at("id").get<std::string>();
      const auto kind = o.at("kind").get<std::string>();
      if (kind != "api" && kind != "mashup") throw DataError("unknown kind '" + kind + "'");
      v.kind = kind == "api" ? EntityKind::api : EntityKind::mashup;
      v.verdict = parse_verdict(o.at("verdict").get<std::string>());
      if (!verdict_allowed(v.kind, v.verdict)) throw DataError("verdict not allowed for kind");
      v.successor_ids = o.value("successors", std::vector<std::string>{});
      for (const auto& s : o.value("evidence_summary", std::vector<std::string>{})) {
        v.evidence.push_back({s, std::nullopt});
      }
      out.emplace(v.entity_id, std::move(v));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("verdict line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("verdict line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// JSON object mapping an API id to its successor ids.
inline SuccessorTable load_successor_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read successor table " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    SuccessorTable t;
    for (const auto& [k, v] : j.items()) {
      if (k.rfind("_", 0) == 0) continue;  // metadata keys
      t[k] = v.get<std::vector<std::string>>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed successor table " + path.string() + ": " + e.what());
  }
}

}  // namespace svceco
