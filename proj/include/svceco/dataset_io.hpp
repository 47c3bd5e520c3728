#pragma once

// Reading and writing datasets as JSON-lines (reference format) or as a
// pair of CSV files (apis.csv, mashups.csv).

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "svceco/csv.hpp"
#include "svceco/dataset.hpp"

namespace svceco {

enum class DatasetFormat { json_lines, csv_pair };

inline DatasetFormat parse_dataset_format(std::string_view s) {
  if (s == "json_lines" || s == "jsonl") return DatasetFormat::json_lines;
  if (s == "csv_pair" || s == "csv") return DatasetFormat::csv_pair;
  throw InputError("unknown dataset format '" + std::string(s) + "'");
}

/// A row that could not be turned into a record. Rows are never silently
/// dropped; every rejected row lands here.
struct RowError {
  std::string file;
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  Dataset dataset;
  std::vector<RowError> errors;

  nlohmann::json errors_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& e : errors) {
      arr.push_back({{"file", e.file}, {"line", e.line}, {"message", e.message}});
    }
    return arr;
  }
};

inline constexpr const char* kApiCsvColumns[] = {
    "id", "name", "start", "labeled_status", "deathpool_date", "endpoint_url",
    "primary_category", "description", "successor_ids"};
inline constexpr const char* kMashupCsvColumns[] = {
    "id", "name", "start", "labeled_status", "deathpool_date", "homepage_url",
    "primary_category", "api_ids", "description"};

namespace detail {

struct RowError_ : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Located {
  std::string file;
  std::size_t line;
};

/// Tracks ids across all inputs so duplicates can be reported with both rows.
class IdRegistry {
 public:
  void claim(const std::string& id, const Located& where) {
    auto [it, inserted] = seen_.emplace(id, where);
    if (!inserted) {
      throw DataError("duplicate id '" + id + "' at " + it->second.file + ":" +
                      std::to_string(it->second.line) + " and " + where.file + ":" +
                      std::to_string(where.line));
    }
  }

 private:
  std::map<std::string, Located> seen_;
};

inline Date require_date(std::string_view field, std::string_view v) {
  auto d = Date::try_parse(v);
  if (!d) throw RowError_("field '" + std::string(field) + "': invalid date '" + std::string(v) + "'");
  return *d;
}

inline std::optional<Date> optional_date(std::string_view field, std::string_view v) {
  if (v.empty()) return std::nullopt;
  return require_date(field, v);
}

inline LabeledStatus require_status(std::string_view v) {
  auto s = parse_labeled_status(v);
  if (!s) throw RowError_("field 'labeled_status': expected available|deprecated, got '" + std::string(v) + "'");
  return *s;
}

inline std::string json_string(const nlohmann::json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw RowError_(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw RowError_(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

inline std::optional<std::string> json_optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw RowError_(std::string("field '") + key + "' must be a string");
  if (it->get_ref<const std::string&>().empty()) return std::nullopt;
  return it->get<std::string>();
}

inline std::vector<std::string> json_string_list(const nlohmann::json& obj, const char* key,
                                                 bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw RowError_(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_array()) throw RowError_(std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw RowError_(std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline ApiRecord api_from_json(const nlohmann::json& o) {
  ApiRecord a;
  a.id = json_string(o, "id", true);
  if (a.id.empty()) throw RowError_("empty id");
  a.name = json_string(o, "name", true);
  a.start = require_date("start", json_string(o, "start", true));
  a.labeled_status = require_status(json_string(o, "labeled_status", true));
  a.deathpool_date = optional_date("deathpool_date", json_string(o, "deathpool_date", false));
  a.endpoint_url = json_optional_string(o, "endpoint_url");
  a.primary_category = json_string(o, "primary_category", true);
  a.description = json_string(o, "description", false);
  a.successor_ids = json_string_list(o, "successor_ids", false);
  return a;
}

inline MashupRecord mashup_from_json(const nlohmann::json& o) {
  MashupRecord m;
  m.id = json_string(o, "id", true);
  if (m.id.empty()) throw RowError_("empty id");
  m.name = json_string(o, "name", true);
  m.start = require_date("start", json_string(o, "start", true));
  m.labeled_status = require_status(json_string(o, "labeled_status", true));
  m.deathpool_date = optional_date("deathpool_date", json_string(o, "deathpool_date", false));
  m.homepage_url = json_optional_string(o, "homepage_url");
  m.primary_category = json_string(o, "primary_category", true);
  m.api_ids = json_string_list(o, "api_ids", true);
  m.description = json_string(o, "description", false);
  return m;
}

inline std::map<std::string, std::size_t> csv_header_index(const std::vector<std::string>& header,
                                                           const char* const* columns,
                                                           std::size_t n_columns,
                                                           const std::string& file) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (std::size_t c = 0; c < n_columns; ++c) {
    if (!index.count(columns[c])) {
      throw DataError(file + ": schema mismatch, missing column '" + columns[c] + "'");
    }
  }
  return index;
}

}  // namespace detail

inline nlohmann::json to_json(const ApiRecord& a) {
  nlohmann::json o = {{"id", a.id},
                      {"name", a.name},
                      {"start", a.start.iso()},
                      {"labeled_status", to_string(a.labeled_status)},
                      {"primary_category", a.primary_category},
                      {"description", a.description}};
  if (a.deathpool_date) o["deathpool_date"] = a.deathpool_date->iso();
  if (a.endpoint_url) o["endpoint_url"] = *a.endpoint_url;
  if (!a.successor_ids.empty()) o["successor_ids"] = a.successor_ids;
  return o;
}

inline nlohmann::json to_json(const MashupRecord& m) {
  nlohmann::json o = {{"id", m.id},
                      {"name", m.name},
                      {"start", m.start.iso()},
                      {"labeled_status", to_string(m.labeled_status)},
                      {"primary_category", m.primary_category},
                      {"api_ids", m.api_ids},
                      {"description", m.description}};
  if (m.deathpool_date) o["deathpool_date"] = m.deathpool_date->iso();
  if (m.homepage_url) o["homepage_url"] = *m.homepage_url;
  return o;
}

/// One object per line. The kind is taken from an explicit `"kind"` key when
/// present, otherwise a row with `api_ids` is a mashup.
inline ParseResult parse_json_lines(std::istream& in, const std::string& source = "<stream>") {
  ParseResult result;
  std::vector<ApiRecord> apis;
  std::vector<MashupRecord> mashups;
  detail::IdRegistry ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw detail::RowError_("row is not a JSON object");
      bool is_mashup = obj.contains("api_ids");
      if (auto k = obj.find("kind"); k != obj.end() && k->is_string()) {
        const auto& kind = k->get_ref<const std::string&>();
        if (kind == "mashup") is_mashup = true;
        else if (kind == "api") is_mashup = false;
        else throw detail::RowError_("unknown kind '" + kind + "'");
      }
      if (is_mashup) {
        auto m = detail::mashup_from_json(obj);
        ids.claim(m.id, {source, lineno});
        mashups.push_back(std::move(m));
      } else {
        auto a = detail::api_from_json(obj);
        ids.claim(a.id, {source, lineno});
        apis.push_back(std::move(a));
      }
    } catch (const nlohmann::json::parse_error& e) {
      result.errors.push_back({source, lineno, std::string("invalid JSON: ") + e.what()});
    } catch (const detail::RowError_& e) {
      result.errors.push_back({source, lineno, e.what()});
    }
  }
  result.dataset = Dataset::build(std::move(apis), std::move(mashups), {source, std::nullopt});
  return result;
}

/// Reads `apis.csv` and `mashups.csv` from the two streams.
inline ParseResult parse_csv_pair(std::istream& apis_in, std::istream& mashups_in,
                                  const std::string& apis_name = "apis.csv",
                                  const std::string& mashups_name = "mashups.csv",
                                  const std::string& source = "<csv>") {
  ParseResult result;
  std::vector<ApiRecord> apis;
  std::vector<MashupRecord> mashups;
  detail::IdRegistry ids;

  auto read_table = [&](std::istream& in, const std::string& file, const char* const* columns,
                        std::size_t n_columns, auto&& on_row) {
    std::size_t lines = 0;
    auto header = csv::read_record(in, lines);
    if (!header) throw DataError(file + ": schema mismatch, missing header");
    const auto index = detail::csv_header_index(*header, columns, n_columns, file);
    while (true) {
      const std::size_t row_line = lines + 1;
      auto rec = csv::read_record(in, lines);
      if (!rec) break;
      if (rec->size() == 1 && (*rec)[0].empty()) continue;
      try {
        if (rec->size() != header->size()) {
          throw detail::RowError_("expected " + std::to_string(header->size()) + " fields, got " +
                                  std::to_string(rec->size()));
        }
        auto get = [&](const char* col) -> const std::string& { return (*rec)[index.at(col)]; };
        on_row(get, row_line);
      } catch (const detail::RowError_& e) {
        result.errors.push_back({file, row_line, e.what()});
      }
    }
  };

  read_table(apis_in, apis_name, kApiCsvColumns, std::size(kApiCsvColumns),
             [&](auto&& get, std::size_t line) {
               ApiRecord a;
               a.id = get("id");
               if (a.id.empty()) throw detail::RowError_("empty id");
               a.name = get("name");
               a.start = detail::require_date("start", get("start"));
               a.labeled_status = detail::require_status(get("labeled_status"));
               a.deathpool_date = detail::optional_date("deathpool_date", get("deathpool_date"));
               if (!get("endpoint_url").empty()) a.endpoint_url = get("endpoint_url");
               a.primary_category = get("primary_category");
               a.description = get("description");
               a.successor_ids = csv::split_list(get("successor_ids"));
               ids.claim(a.id, {apis_name, line});
               apis.push_back(std::move(a));
             });
  read_table(mashups_in, mashups_name, kMashupCsvColumns, std::size(kMashupCsvColumns),
             [&](auto&& get, std::size_t line) {
               MashupRecord m;
               m.id = get("id");
               if (m.id.empty()) throw detail::RowError_("empty id");
               m.name = get("name");
               m.start = detail::require_date("start", get("start"));
               m.labeled_status = detail::require_status(get("labeled_status"));
               m.deathpool_date = detail::optional_date("deathpool_date", get("deathpool_date"));
               if (!get("homepage_url").empty()) m.homepage_url = get("homepage_url");
               m.primary_category = get("primary_category");
               m.api_ids = csv::split_list(get("api_ids"));
               m.description = get("description");
               ids.claim(m.id, {mashups_name, line});
               mashups.push_back(std::move(m));
             });
  result.dataset = Dataset::build(std::move(apis), std::move(mashups), {source, std::nullopt});
  return result;
}

/// `path` is a `.jsonl` file for json_lines, or a directory holding
/// `apis.csv` and `mashups.csv` for csv_pair.
inline ParseResult parse_dataset(const std::filesystem::path& path, DatasetFormat format) {
  namespace fs = std::filesystem;
  if (format == DatasetFormat::json_lines) {
    std::ifstream in(path);
    if (!in || fs::is_directory(path)) throw InputError("cannot read dataset file " + path.string());
    return parse_json_lines(in, path.filename().string());
  }
  const auto apis_path = path / "apis.csv";
  const auto mashups_path = path / "mashups.csv";
  std::ifstream apis_in(apis_path);
  std::ifstream mashups_in(mashups_path);
  if (!fs::is_directory(path) || !apis_in || !mashups_in) {
    throw InputError("cannot read CSV pair under " + path.string());
  }
  return parse_csv_pair(apis_in, mashups_in, "apis.csv", "mashups.csv", path.filename().string());
}

/// APIs first, then mashups, each in id order. Every line carries `kind`.
inline void write_json_lines(const Dataset& ds, std::ostream& out) {
  for (const auto& [id, a] : ds.apis()) {
    auto o = to_json(a);
    o["kind"] = "api";
    out << o.dump() << '\n';
  }
  for (const auto& [id, m] : ds.mashups()) {
    auto o = to_json(m);
    o["kind"] = "mashup";
    out << o.dump() << '\n';
  }
}

inline void write_csv_pair(const Dataset& ds, std::ostream& apis_out, std::ostream& mashups_out) {
  csv::write_record(apis_out, {std::begin(kApiCsvColumns), std::end(kApiCsvColumns)});
  for (const auto& [id, a] : ds.apis()) {
    csv::write_record(apis_out, {a.id, a.name, a.start.iso(), std::string(to_string(a.labeled_status)),
                                 a.deathpool_date ? a.deathpool_date->iso() : "",
                                 a.endpoint_url.value_or(""), a.primary_category, a.description,
                                 csv::join_list(a.successor_ids)});
  }
  csv::write_record(mashups_out, {std::begin(kMashupCsvColumns), std::end(kMashupCsvColumns)});
  for (const auto& [id, m] : ds.mashups()) {
    csv::write_record(mashups_out, {m.id, m.name, m.start.iso(), std::string(to_string(m.labeled_status)),
                                    m.deathpool_date ? m.deathpool_date->iso() : "",
                                    m.homepage_url.value_or(""), m.primary_category,
                                    csv::join_list(m.api_ids), m.description});
  }
}

/// Longevities in days, one integer per line; blank lines and '#' comments
/// are skipped.
inline std::vector<std::int64_t> read_longevity_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in || std::filesystem::is_directory(path)) throw InputError("cannot read " + path.string());
  std::vector<std::int64_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::int64_t v;
    std::string rest;
    if (!(ss >> v) || (ss >> rest)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected one integer");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace svceco
