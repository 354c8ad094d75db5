#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ordmet/csv.hpp"

namespace ordmet {

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordinal scale with integer points {0, ..., k_max}.
struct LikertScale {
  int k_max = 1;

  explicit LikertScale(int k) : k_max(k) {
    if (k < 1) throw ValidationError("scale must have k_max >= 1");
  }
  int levels() const noexcept { return k_max + 1; }
  bool contains(long long s) const noexcept { return s >= 0 && s <= k_max; }
  bool operator==(const LikertScale&) const = default;
};

struct RatingRecord {
  std::string item_id;
  std::string rater_id;
  int score = 0;

  auto operator<=>(const RatingRecord&) const = default;
};

struct BinaryRecord {
  std::string item_id;
  std::string rater_id;
  int label = 0;  // 0 or 1

  auto operator<=>(const BinaryRecord&) const = default;
};

// Long-format ordinal ratings. Immutable after construction; records are
// kept in canonical (item, rater) order so equal contents compare equal
// regardless of input order. The item x rater matrix may be sparse.
class RatingTable {
 public:
  RatingTable(LikertScale scale, std::vector<RatingRecord> records)
      : scale_(scale), records_(std::move(records)) {
    std::sort(records_.begin(), records_.end());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (!scale_.contains(r.score)) {
        throw ValidationError("score out of range for item '" + r.item_id + "', rater '" +
                              r.rater_id + "'");
      }
      if (i > 0 && records_[i - 1].item_id == r.item_id &&
          records_[i - 1].rater_id == r.rater_id) {
        throw ValidationError("duplicate (item, rater): ('" + r.item_id + "', '" + r.rater_id +
                              "')");
      }
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (i == 0 || records_[i].item_id != records_[i - 1].item_id) {
        item_index_.emplace(records_[i].item_id, std::pair<std::size_t, std::size_t>{i, i + 1});
      } else {
        item_index_[records_[i].item_id].second = i + 1;
      }
      rater_ids_.insert(records_[i].rater_id);
    }
  }

  const LikertScale& scale() const noexcept { return scale_; }
  const std::vector<RatingRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  // Ratings on one item, in rater order. Empty span when the item is unknown.
  std::span<const RatingRecord> item_ratings(const std::string& item_id) const {
    auto it = item_index_.find(item_id);
    if (it == item_index_.end()) return {};
    return {records_.data() + it->second.first, it->second.second - it->second.first};
  }

  std::vector<std::string> item_ids() const {
    std::vector<std::string> out;
    out.reserve(item_index_.size());
    for (const auto& [id, span] : item_index_) out.push_back(id);
    return out;  // map iteration is already sorted
  }

  const std::set<std::string>& rater_ids() const noexcept { return rater_ids_; }

  bool operator==(const RatingTable& other) const {
    return scale_ == other.scale_ && records_ == other.records_;
  }

 private:
  LikertScale scale_;
  std::vector<RatingRecord> records_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> item_index_;
  std::set<std::string> rater_ids_;
};

// Rater attributes: axis name -> category, at most one value per axis.
struct RaterAttributes {
  std::string rater_id;
  std::map<std::string, std::string> attributes;
};

struct ItemMeta {
  std::string item_id;
  std::map<std::string, std::string> tags;
};

// Conjunction of (axis, category) selectors; the empty key selects all raters.
struct GroupKey {
  std::vector<std::pair<std::string, std::string>> selectors;

  static GroupKey all() { return {}; }

  std::string label() const {
    if (selectors.empty()) return "all";
    std::string out;
    for (const auto& [axis, value] : selectors) {
      if (!out.empty()) out += "|";
      out += axis + "=" + value;
    }
    return out;
  }

  bool operator==(const GroupKey&) const = default;
};

template <typename T>
struct LoadResult {
  T value;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::size_t require_column(const csv::Table& t, const std::string& path,
                                  const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw CsvError(path, 1, "missing required column '" + name + "'");
}

}  // namespace detail

// Loads `item_id,rater_id,score` and validates against the scale.
// Duplicate (item, rater) rows and out-of-range scores are hard errors.
inline LoadResult<RatingTable> load_ratings(const std::string& path, LikertScale scale) {
  const auto t = csv::read_file(path);
  const auto ci = detail::require_column(t, path, "item_id");
  const auto cr = detail::require_column(t, path, "rater_id");
  const auto cs = detail::require_column(t, path, "score");

  std::vector<RatingRecord> records;
  records.reserve(t.rows.size());
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : t.rows) {
    RatingRecord rec;
    rec.item_id = row.fields[ci];
    rec.rater_id = row.fields[cr];
    if (rec.item_id.empty() || rec.rater_id.empty()) {
      throw CsvError(path, row.line_no, "empty item_id or rater_id");
    }
    const long long s = csv::parse_int(row.fields[cs], path, row.line_no, "score");
    if (!scale.contains(s)) {
      throw CsvError(path, row.line_no,
                     "score out of range: " + std::to_string(s) + " not in [0, " +
                         std::to_string(scale.k_max) + "]");
    }
    rec.score = static_cast<int>(s);
    if (!seen.emplace(rec.item_id, rec.rater_id).second) {
      throw CsvError(path, row.line_no,
                     "duplicate (item, rater): ('" + rec.item_id + "', '" + rec.rater_id + "')");
    }
    records.push_back(std::move(rec));
  }
  LoadResult<RatingTable> out{RatingTable(scale, std::move(records)), {}};
  if (t.rows.empty()) out.warnings.push_back(path + ": no data rows");
  return out;
}

// Loads `item_id,rater_id,label` with labels restricted to {0, 1}.
inline LoadResult<std::vector<BinaryRecord>> load_binary(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto ci = detail::require_column(t, path, "item_id");
  const auto cr = detail::require_column(t, path, "rater_id");
  const auto cl = detail::require_column(t, path, "label");

  LoadResult<std::vector<BinaryRecord>> out;
  out.value.reserve(t.rows.size());
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : t.rows) {
    BinaryRecord rec;
    rec.item_id = row.fields[ci];
    rec.rater_id = row.fields[cr];
    if (rec.item_id.empty() || rec.rater_id.empty()) {
      throw CsvError(path, row.line_no, "empty item_id or rater_id");
    }
    const long long l = csv::parse_int(row.fields[cl], path, row.line_no, "label");
    if (l != 0 && l != 1) {
      throw CsvError(path, row.line_no, "label must be 0 or 1, got " + std::to_string(l));
    }
    rec.label = static_cast<int>(l);
    if (!seen.emplace(rec.item_id, rec.rater_id).second) {
      throw CsvError(path, row.line_no,
                     "duplicate (item, rater): ('" + rec.item_id + "', '" + rec.rater_id + "')");
    }
    out.value.push_back(std::move(rec));
  }
  std::sort(out.value.begin(), out.value.end());
  if (out.value.empty()) out.warnings.push_back(path + ": no data rows");
  return out;
}

// Loads `rater_id,<axis1>,<axis2>,...`; empty cells mean "no value on this axis".
inline LoadResult<std::vector<RaterAttributes>> load_attributes(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto cr = detail::require_column(t, path, "rater_id");
  for (const auto& h : t.header) {
    if (h.empty()) throw CsvError(path, 1, "empty axis name in header");
  }
  LoadResult<std::vector<RaterAttributes>> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    RaterAttributes a;
    a.rater_id = row.fields[cr];
    if (a.rater_id.empty()) throw CsvError(path, row.line_no, "empty rater_id");
    if (!seen.insert(a.rater_id).second) {
      throw CsvError(path, row.line_no, "duplicate rater_id '" + a.rater_id + "'");
    }
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (i == cr || row.fields[i].empty()) continue;
      a.attributes[t.header[i]] = row.fields[i];
    }
    out.value.push_back(std::move(a));
  }
  std::sort(out.value.begin(), out.value.end(),
            [](const auto& x, const auto& y) { return x.rater_id < y.rater_id; });
  return out;
}

// Loads `item_id,<tag1>,...` analogously to load_attributes.
inline LoadResult<std::vector<ItemMeta>> load_items(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto ci = detail::require_column(t, path, "item_id");
  LoadResult<std::vector<ItemMeta>> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    ItemMeta m;
    m.item_id = row.fields[ci];
    if (m.item_id.empty()) throw CsvError(path, row.line_no, "empty item_id");
    if (!seen.insert(m.item_id).second) {
      throw CsvError(path, row.line_no, "duplicate item_id '" + m.item_id + "'");
    }
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (i == ci || row.fields[i].empty()) continue;
      m.tags[t.header[i]] = row.fields[i];
    }
    out.value.push_back(std::move(m));
  }
  std::sort(out.value.begin(), out.value.end(),
            [](const auto& x, const auto& y) { return x.item_id < y.item_id; });
  return out;
}

// Raters matching every selector of the key. Attribute values are
// case-sensitive opaque strings; an unknown axis is an error.
inline std::set<std::string> select_raters(const std::vector<RaterAttributes>& attrs,
                                           const GroupKey& key) {
  std::set<std::string> axes_in_key;
  for (const auto& [axis, value] : key.selectors) {
    if (!axes_in_key.insert(axis).second) {
      throw ValidationError("group key repeats axis '" + axis + "'");
    }
  }
  std::set<std::string> known_axes;
  for (const auto& a : attrs) {
    for (const auto& [axis, value] : a.attributes) known_axes.insert(axis);
  }
  for (const auto& axis : axes_in_key) {
    if (!known_axes.contains(axis)) {
      throw ValidationError("unknown attribute axis '" + axis + "'");
    }
  }
  std::set<std::string> out;
  for (const auto& a : attrs) {
    bool match = true;
    for (const auto& [axis, value] : key.selectors) {
      auto it = a.attributes.find(axis);
      if (it == a.attributes.end() || it->second != value) {
        match = false;
        break;
      }
    }
    if (match) out.insert(a.rater_id);
  }
  return out;
}

// Canonical CSV exports. Round-trip with the loaders bit-exactly.
inline void save_ratings(std::ostream& os, const RatingTable& table) {
  os << "item_id,rater_id,score\n";
  for (const auto& r : table.records()) {
    csv::write_line(os, {r.item_id, r.rater_id, std::to_string(r.score)});
  }
}

inline void save_binary(std::ostream& os, const std::vector<BinaryRecord>& records) {
  os << "item_id,rater_id,label\n";
  for (const auto& r : records) {
    csv::write_line(os, {r.item_id, r.rater_id, std::to_string(r.label)});
  }
}

inline void save_attributes(std::ostream& os, const std::vector<RaterAttributes>& attrs) {
  std::set<std::string> axes;
  for (const auto& a : attrs) {
    for (const auto& [axis, value] : a.attributes) axes.insert(axis);
  }
  std::vector<std::string> header{"rater_id"};
  header.insert(header.end(), axes.begin(), axes.end());
  csv::write_line(os, header);
  for (const auto& a : attrs) {
    std::vector<std::string> row{a.rater_id};
    for (const auto& axis : axes) {
      auto it = a.attributes.find(axis);
      row.push_back(it == a.attributes.end() ? "" : it->second);
    }
    csv::write_line(os, row);
  }
}

inline void save_items(std::ostream& os, const std::vector<ItemMeta>& items) {
  std::set<std::string> tags;
  for (const auto& m : items) {
    for (const auto& [tag, value] : m.tags) tags.insert(tag);
  }
  std::vector<std::string> header{"item_id"};
  header.insert(header.end(), tags.begin(), tags.end());
  csv::write_line(os, header);
  for (const auto& m : items) {
    std::vector<std::string> row{m.item_id};
    for (const auto& tag : tags) {
      auto it = m.tags.find(tag);
      row.push_back(it == m.tags.end() ? "" : it->second);
    }
    csv::write_line(os, row);
  }
}

}  // namespace ordmet
