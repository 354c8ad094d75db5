#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ordmet/rng.hpp"

namespace ordmet {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// Round through 9 significant digits. All floats in reports pass through
// here so that serialization is byte-stable and re-ingestion is lossless.
inline double round9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return std::strtod(buf, nullptr);
}

inline std::string format9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

namespace detail {

inline void json_escape(const std::string& s, std::string& out) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

}  // namespace detail

// Deterministic dump of an ordered json tree: insertion-ordered keys, floats
// with 9 significant digits, two-space indentation. The library's own dump()
// is avoided only because of its float formatting.
inline void dump_json(const nlohmann::ordered_json& j, std::string& out, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad_in;
        detail::json_escape(it.key(), out);
        out += ": ";
        dump_json(it.value(), out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        dump_json(j[i], out, indent + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case nlohmann::json::value_t::string:
      detail::json_escape(j.get<std::string>(), out);
      return;
    case nlohmann::json::value_t::number_float:
      out += format9(j.get<double>());
      return;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      return;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      return;
    case nlohmann::json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    default:
      out += "null";
      return;
  }
}

inline std::string dump_json(const nlohmann::ordered_json& j) {
  std::string out;
  dump_json(j, out, 0);
  out += "\n";
  return out;
}

inline std::string config_hash_hex(const nlohmann::ordered_json& canonical) {
  const std::uint64_t h = fnv1a64(dump_json(canonical));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace ordmet
