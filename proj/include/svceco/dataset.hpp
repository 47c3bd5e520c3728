#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "svceco/date.hpp"
#include "svceco/error.hpp"

namespace svceco {

enum class EntityKind { api, mashup };
enum class LabeledStatus { available, deprecated };

/// Which entity kinds an operation should consider.
enum class KindFilter { api, mashup, both };

inline bool kind_matches(KindFilter f, EntityKind k) {
  return f == KindFilter::both || (f == KindFilter::api ? k == EntityKind::api : k == EntityKind::mashup);
}

inline std::string_view to_string(EntityKind k) { return k == EntityKind::api ? "api" : "mashup"; }
inline std::string_view to_string(LabeledStatus s) {
  return s == LabeledStatus::available ? "available" : "deprecated";
}

inline std::optional<LabeledStatus> parse_labeled_status(std::string_view s) {
  if (s == "available") return LabeledStatus::available;
  if (s == "deprecated") return LabeledStatus::deprecated;
  return std::nullopt;
}

inline KindFilter parse_kind_filter(std::string_view s) {
  if (s == "api") return KindFilter::api;
  if (s == "mashup") return KindFilter::mashup;
  if (s == "both" || s == "pooled") return KindFilter::both;
  throw InputError("unknown kind filter '" + std::string(s) + "'");
}

struct ApiRecord {
  std::string id;
  std::string name;
  Date start;
  LabeledStatus labeled_status = LabeledStatus::available;
  std::optional<Date> deathpool_date;
  std::optional<std::string> endpoint_url;
  std::string primary_category;
  std::string description;
  std::vector<std::string> successor_ids;

  friend bool operator==(const ApiRecord&, const ApiRecord&) = default;
};

struct MashupRecord {
  std::string id;
  std::string name;
  Date start;
  LabeledStatus labeled_status = LabeledStatus::available;
  std::optional<Date> deathpool_date;
  std::optional<std::string> homepage_url;
  std::string primary_category;
  std::vector<std::string> api_ids;
  std::string description;

  friend bool operator==(const MashupRecord&, const MashupRecord&) = default;
};

/// Validation flag classes. Flagged records stay in the dataset.
enum class Flag {
  implausible_death,   // deathpool date earlier than the creation date
  dangling_reference,  // mashup invokes an API id that is not in the table
  empty_composition,   // mashup has no resolvable API
  missing_category,
};

inline constexpr Flag kAllFlags[] = {Flag::implausible_death, Flag::dangling_reference,
                                     Flag::empty_composition, Flag::missing_category};

inline std::string_view to_string(Flag f) {
  switch (f) {
    case Flag::implausible_death: return "implausible_death";
    case Flag::dangling_reference: return "dangling_reference";
    case Flag::empty_composition: return "empty_composition";
    case Flag::missing_category: return "missing_category";
  }
  return "?";
}

struct DatasetMetadata {
  std::string source;
  std::optional<Date> snapshot_date;

  friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

/// Immutable after construction. Records are keyed and iterated by id.
class Dataset {
 public:
  Dataset() = default;

  /// Throws DataError on a duplicate id (ids are unique across both tables).
  static Dataset build(std::vector<ApiRecord> apis, std::vector<MashupRecord> mashups,
                       DatasetMetadata meta = {}) {
    Dataset ds;
    ds.meta_ = std::move(meta);
    for (auto& a : apis) {
      const std::string id = a.id;
      if (!ds.apis_.emplace(id, std::move(a)).second) {
        throw DataError("duplicate id '" + id + "'");
      }
    }
    for (auto& m : mashups) {
      const std::string id = m.id;
      if (ds.apis_.count(id) || !ds.mashups_.emplace(id, std::move(m)).second) {
        throw DataError("duplicate id '" + id + "'");
      }
    }
    ds.compute_flags();
    return ds;
  }

  const std::map<std::string, ApiRecord>& apis() const { return apis_; }
  const std::map<std::string, MashupRecord>& mashups() const { return mashups_; }
  const DatasetMetadata& metadata() const { return meta_; }

  const ApiRecord* find_api(std::string_view id) const {
    auto it = apis_.find(std::string(id));
    return it == apis_.end() ? nullptr : &it->second;
  }
  const MashupRecord* find_mashup(std::string_view id) const {
    auto it = mashups_.find(std::string(id));
    return it == mashups_.end() ? nullptr : &it->second;
  }

  bool has_flag(const std::string& id, Flag f) const {
    auto it = flags_.find(id);
    return it != flags_.end() && it->second.count(f) > 0;
  }
  const std::map<std::string, std::set<Flag>>& flags() const { return flags_; }

  /// The mashup's API ids that resolve against the API table, in listed order
  /// with duplicates removed.
  std::vector<std::string> resolved_api_ids(const MashupRecord& m) const {
    std::vector<std::string> out;
    for (const auto& id : m.api_ids) {
      if (apis_.count(id) && std::find(out.begin(), out.end(), id) == out.end()) {
        out.push_back(id);
      }
    }
    return out;
  }

  std::size_t size() const { return apis_.size() + mashups_.size(); }

 private:
  void compute_flags() {
    for (const auto& [id, a] : apis_) {
      if (a.deathpool_date && *a.deathpool_date < a.start) flags_[id].insert(Flag::implausible_death);
      if (a.primary_category.empty()) flags_[id].insert(Flag::missing_category);
    }
    for (const auto& [id, m] : mashups_) {
      if (m.deathpool_date && *m.deathpool_date < m.start) flags_[id].insert(Flag::implausible_death);
      if (m.primary_category.empty()) flags_[id].insert(Flag::missing_category);
      for (const auto& ref : m.api_ids) {
        if (!apis_.count(ref)) flags_[id].insert(Flag::dangling_reference);
      }
      if (resolved_api_ids(m).empty()) flags_[id].insert(Flag::empty_composition);
    }
  }

  std::map<std::string, ApiRecord> apis_;
  std::map<std::string, MashupRecord> mashups_;
  std::map<std::string, std::set<Flag>> flags_;
  DatasetMetadata meta_;
};

struct ValidationReport {
  /// Offending ids per flag class. For dangling_reference there is one entry
  /// per unresolved reference, keyed by the referencing mashup.
  std::map<Flag, std::vector<std::string>> offenders;

  std::size_t count(Flag f) const {
    auto it = offenders.find(f);
    return it == offenders.end() ? 0 : it->second.size();
  }
  bool empty() const { return offenders.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json ids = nlohmann::json::object();
    for (const auto& [flag, list] : offenders) {
      counts[std::string(to_string(flag))] = list.size();
      ids[std::string(to_string(flag))] = list;
    }
    return {{"counts", counts}, {"ids", ids}};
  }
};

/// Pure; the dataset is not modified and the output depends only on it.
inline ValidationReport validate(const Dataset& ds) {
  ValidationReport r;
  auto add = [&](Flag f, const std::string& id) { r.offenders[f].push_back(id); };
  for (const auto& [id, a] : ds.apis()) {
    if (a.deathpool_date && *a.deathpool_date < a.start) add(Flag::implausible_death, id);
    if (a.primary_category.empty()) add(Flag::missing_category, id);
  }
  for (const auto& [id, m] : ds.mashups()) {
    if (m.deathpool_date && *m.deathpool_date < m.start) add(Flag::implausible_death, id);
    if (m.primary_category.empty()) add(Flag::missing_category, id);
    for (const auto& ref : m.api_ids) {
      if (!ds.find_api(ref)) add(Flag::dangling_reference, id);
    }
    if (ds.resolved_api_ids(m).empty()) add(Flag::empty_composition, id);
  }
  return r;
}

/// Default window in which deathpool dates are trusted as death times.
struct TrustWindow {
  Date from = Date::from_ymd(2018, 1, 1);
  Date to = Date::from_ymd(2020, 12, 31);

  bool contains(Date d) const { return from <= d && d <= to; }
};

/// Longevities (deathpool date minus start, in days) of records whose
/// deathpool date lies in `[from, to]`. Implausible records and negative
/// longevities are excluded. Output follows id order.
inline std::vector<std::int64_t> deathpool_window(const Dataset& ds, Date from, Date to,
                                                  KindFilter kinds = KindFilter::api) {
  if (to < from) throw InputError("deathpool window: from > to");
  std::vector<std::int64_t> out;
  auto consider = [&](const std::string& id, Date start, const std::optional<Date>& dp) {
    if (!dp || *dp < from || to < *dp) return;
    if (ds.has_flag(id, Flag::implausible_death)) return;
    const auto days = *dp - start;
    if (days >= 0) out.push_back(days);
  };
  if (kind_matches(kinds, EntityKind::api)) {
    for (const auto& [id, a] : ds.apis()) consider(id, a.start, a.deathpool_date);
  }
  if (kind_matches(kinds, EntityKind::mashup)) {
    for (const auto& [id, m] : ds.mashups()) consider(id, m.start, m.deathpool_date);
  }
  return out;
}

inline std::vector<std::int64_t> deathpool_window(const Dataset& ds, const TrustWindow& w,
                                                  KindFilter kinds = KindFilter::api) {
  return deathpool_window(ds, w.from, w.to, kinds);
}

}  // namespace svceco
