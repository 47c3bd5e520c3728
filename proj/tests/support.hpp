#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "svceco/svceco.hpp"

namespace svceco::testing {

inline Date d(const char* iso) { return Date::parse(iso); }

inline ApiRecord api(std::string id, const char* start, std::string category = "Tools") {
  ApiRecord a;
  a.id = std::move(id);
  a.name = a.id;
  a.start = d(start);
  a.primary_category = std::move(category);
  return a;
}

inline MashupRecord mashup(std::string id, const char* start, std::vector<std::string> api_ids) {
  MashupRecord m;
  m.id = std::move(id);
  m.name = m.id;
  m.start = d(start);
  m.primary_category = "Mapping";
  m.api_ids = std::move(api_ids);
  return m;
}

inline LivenessVerdict verdict(const std::string& id, EntityKind kind, Verdict v,
                               std::vector<std::string> successors = {}) {
  LivenessVerdict out;
  out.entity_id = id;
  out.kind = kind;
  out.verdict = v;
  out.successor_ids = std::move(successors);
  return out;
}

inline LifecycleEstimate life(const std::string& id, EntityKind kind, const char* start, const char* end = nullptr) {
  LifecycleEstimate e;
  e.entity_id = id;
  e.kind = kind;
  e.start = d(start);
  if (end) {
    e.end = d(end);
    e.provenance = Provenance::sampled;
  }
  return e;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("svceco_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string data_path(const std::string& rel) { return std::string(SVCECO_DATA_DIR) + "/" + rel; }

}  // namespace svceco::testing
