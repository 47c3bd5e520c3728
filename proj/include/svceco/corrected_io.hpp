#pragma once

// CorrectedDataset as JSON-lines. Every line has a "type":
//   meta      run parameters (seed, beta, trust window) and the fit summary
//   record    an original dataset record (with "kind")
//   entity    {id, kind, start, end?, provenance, beta}
//   timeline  {mashup_id, segments: [{from, to?, api_ids, functionally_dead}]}
//   flag      {id, notes}
// Lines are emitted in a fixed order so equal inputs give identical bytes.

#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "svceco/correction.hpp"
#include "svceco/dataset_io.hpp"

namespace svceco {

/// Summary of the fit used for a correction run, echoed into outputs.
struct FitSummary {
  NormalFit fit;
  std::optional<NormalFit> reference;
  std::optional<ZTest> z;
  std::string reference_label;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"mu_hat", fit.mu_hat}, {"sigma2_hat", fit.sigma2_hat}, {"n", fit.n}};
    if (reference) {
      j["reference"] = {{"label", reference_label},
                        {"mu_hat", reference->mu_hat},
                        {"sigma2_hat", reference->sigma2_hat},
                        {"n", reference->n}};
    }
    if (z) {
      j["z"] = std::isfinite(z->z) ? nlohmann::json(z->z) : nlohmann::json("inf");
      j["band"] = to_string(z->band);
    }
    return j;
  }
};

struct CorrectedFile {
  CorrectedDataset corrected;
  nlohmann::json meta = nlohmann::json::object();
};

inline void write_corrected(const CorrectedDataset& c, const nlohmann::json& meta, std::ostream& out) {
  nlohmann::json m = meta;
  m["type"] = "meta";
  out << m.dump() << '\n';
  for (const auto& [id, a] : c.dataset.apis()) {
    auto o = to_json(a);
    o["type"] = "record";
    o["kind"] = "api";
    out << o.dump() << '\n';
  }
  for (const auto& [id, mr] : c.dataset.mashups()) {
    auto o = to_json(mr);
    o["type"] = "record";
    o["kind"] = "mashup";
    out << o.dump() << '\n';
  }
  for (const auto& [id, e] : c.lifecycles) {
    nlohmann::json o = {{"type", "entity"},
                        {"id", id},
                        {"kind", to_string(e.kind)},
                        {"start", e.start.iso()},
                        {"provenance", to_string(e.provenance)},
                        {"beta", e.beta.iso()}};
    if (e.end) o["end"] = e.end->iso();
    out << o.dump() << '\n';
  }
  for (const auto& [id, tl] : c.timelines) {
    auto segs = nlohmann::json::array();
    for (const auto& s : tl.segments) {
      nlohmann::json so = {{"from", s.from.iso()},
                           {"api_ids", std::vector<std::string>(s.api_ids.begin(), s.api_ids.end())},
                           {"functionally_dead", s.functionally_dead}};
      if (s.to) so["to"] = s.to->iso();
      segs.push_back(std::move(so));
    }
    out << nlohmann::json{{"type", "timeline"}, {"mashup_id", id}, {"segments", segs}}.dump() << '\n';
  }
  for (const auto& [id, notes] : c.flags) {
    out << nlohmann::json{{"type", "flag"}, {"id", id}, {"notes", notes}}.dump() << '\n';
  }
}

inline CorrectedFile read_corrected(std::istream& in) {
  CorrectedFile f;
  std::vector<ApiRecord> apis;
  std::vector<MashupRecord> mashups;
  std::string line;
  std::size_t lineno = 0;
  auto date = [](const nlohmann::json& o, const char* key) { return Date::parse(o.at(key).get<std::string>()); };
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto o = nlohmann::json::parse(line);
      const auto type = o.at("type").get<std::string>();
      if (type == "meta") {
        f.meta = o;
        f.meta.erase("type");
      } else if (type == "record") {
        if (o.at("kind").get<std::string>() == "api") apis.push_back(detail::api_from_json(o));
        else mashups.push_back(detail::mashup_from_json(o));
      } else if (type == "entity") {
        LifecycleEstimate e;
        e.entity_id = o.at("id").get<std::string>();
        e.kind = o.at("kind").get<std::string>() == "api" ? EntityKind::api : EntityKind::mashup;
        e.start = date(o, "start");
        if (o.contains("end")) e.end = date(o, "end");
        e.provenance = parse_provenance(o.at("provenance").get<std::string>());
        e.beta = date(o, "beta");
        f.corrected.lifecycles.emplace(e.entity_id, e);
      } else if (type == "timeline") {
        CompositionTimeline tl;
        tl.mashup_id = o.at("mashup_id").get<std::string>();
        for (const auto& so : o.at("segments")) {
          CompositionSegment s;
          s.from = date(so, "from");
          if (so.contains("to")) s.to = date(so, "to");
          const auto ids = so.at("api_ids").get<std::vector<std::string>>();
          s.api_ids = {ids.begin(), ids.end()};
          s.functionally_dead = so.value("functionally_dead", s.api_ids.empty());
          tl.segments.push_back(std::move(s));
        }
        f.corrected.timelines.emplace(tl.mashup_id, std::move(tl));
      } else if (type == "flag") {
        f.corrected.flags[o.at("id").get<std::string>()] = o.at("notes").get<std::vector<std::string>>();
      } else {
        throw DataError("unknown line type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrected dataset line " + std::to_string(lineno) + ": " + e.what());
  } catch (const detail::RowError_& e) {
    throw DataError("corrected dataset line " + std::to_string(lineno) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("corrected dataset line " + std::to_string(lineno) + ": " + e.what());
  }
  f.corrected.dataset = Dataset::build(std::move(apis), std::move(mashups),
                                       {f.meta.value("source", std::string{}), std::nullopt});
  return f;
}

}  // namespace svceco
