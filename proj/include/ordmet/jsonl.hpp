#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ordmet/ratings.hpp"

namespace ordmet {

// JSON-lines mirrors of the CSV loaders: one object per line,
// {"item_id": ..., "rater_id": ..., "score": ...} and likewise with "label".

namespace detail {

inline nlohmann::json parse_jsonl_line(const std::string& path, std::size_t line_no,
                                       const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw CsvError(path, line_no, "malformed JSON object");
  }
  return j;
}

inline std::string jsonl_string(const nlohmann::json& j, const std::string& path,
                                std::size_t line_no, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw CsvError(path, line_no, std::string("missing string field '") + field + "'");
  }
  return j[field].get<std::string>();
}

inline long long jsonl_int(const nlohmann::json& j, const std::string& path,
                           std::size_t line_no, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer()) {
    throw CsvError(path, line_no, std::string("missing integer field '") + field + "'");
  }
  return j[field].get<long long>();
}

}  // namespace detail

inline LoadResult<RatingTable> load_ratings_jsonl(const std::string& path, LikertScale scale) {
  std::ifstream in(path);
  if (!in) throw CsvError(path, 0, "cannot open file");
  std::vector<RatingRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto j = detail::parse_jsonl_line(path, line_no, line);
    RatingRecord rec;
    rec.item_id = detail::jsonl_string(j, path, line_no, "item_id");
    rec.rater_id = detail::jsonl_string(j, path, line_no, "rater_id");
    const long long s = detail::jsonl_int(j, path, line_no, "score");
    if (!scale.contains(s)) {
      throw CsvError(path, line_no, "score out of range: " + std::to_string(s));
    }
    rec.score = static_cast<int>(s);
    if (!seen.emplace(rec.item_id, rec.rater_id).second) {
      throw CsvError(path, line_no,
                     "duplicate (item, rater): ('" + rec.item_id + "', '" + rec.rater_id + "')");
    }
    records.push_back(std::move(rec));
  }
  LoadResult<RatingTable> out{RatingTable(scale, std::move(records)), {}};
  if (out.value.size() == 0) out.warnings.push_back(path + ": no data rows");
  return out;
}

inline LoadResult<std::vector<BinaryRecord>> load_binary_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path, 0, "cannot open file");
  LoadResult<std::vector<BinaryRecord>> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto j = detail::parse_jsonl_line(path, line_no, line);
    BinaryRecord rec;
    rec.item_id = detail::jsonl_string(j, path, line_no, "item_id");
    rec.rater_id = detail::jsonl_string(j, path, line_no, "rater_id");
    const long long l = detail::jsonl_int(j, path, line_no, "label");
    if (l != 0 && l != 1) {
      throw CsvError(path, line_no, "label must be 0 or 1, got " + std::to_string(l));
    }
    rec.label = static_cast<int>(l);
    if (!seen.emplace(rec.item_id, rec.rater_id).second) {
      throw CsvError(path, line_no,
                     "duplicate (item, rater): ('" + rec.item_id + "', '" + rec.rater_id + "')");
    }
    out.value.push_back(std::move(rec));
  }
  std::sort(out.value.begin(), out.value.end());
  if (out.value.empty()) out.warnings.push_back(path + ": no data rows");
  return out;
}

}  // namespace ordmet
