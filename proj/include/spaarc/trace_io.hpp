#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spaarc/domain.hpp"

namespace spaarc {

// Shortest round-trip decimal form; keeps CSV output byte-stable.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view token, const std::string& context) {
  token = trim(token);
  double value = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument(context + ": expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

inline std::int64_t parse_int(std::string_view token, const std::string& context) {
  token = trim(token);
  std::int64_t value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument(context + ": expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return in;
}

}  // namespace detail

inline constexpr std::string_view kTraceCsvHeader = "time,user_id,object_id,x,y";
inline constexpr std::string_view kCatalogCsvHeader = "object_id,size_mb,x,y";

inline void write_trace_csv(std::ostream& out, std::span<const AccessEvent> trace) {
  out << kTraceCsvHeader << '\n';
  for (const AccessEvent& e : trace) {
    out << format_double(e.time) << ',' << e.user_id << ',' << e.object_id << ','
        << format_double(e.user_position.x) << ',' << format_double(e.user_position.y) << '\n';
  }
}

inline void write_trace_csv(const std::filesystem::path& path, std::span<const AccessEvent> trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  write_trace_csv(out, trace);
}

inline std::vector<AccessEvent> read_trace_csv(std::istream& in, const std::string& name = "trace") {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kTraceCsvHeader) {
    throw std::invalid_argument(name + ": missing header '" + std::string(kTraceCsvHeader) + "'");
  }
  std::vector<AccessEvent> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    const std::string ctx = name + " line " + std::to_string(line_no);
    if (fields.size() != 5) throw std::invalid_argument(ctx + ": expected 5 fields");
    AccessEvent e;
    e.time = detail::parse_double(fields[0], ctx);
    e.user_id = detail::parse_int(fields[1], ctx);
    e.object_id = detail::parse_int(fields[2], ctx);
    e.user_position.x = detail::parse_double(fields[3], ctx);
    e.user_position.y = detail::parse_double(fields[4], ctx);
    trace.push_back(e);
  }
  return trace;
}

inline std::vector<AccessEvent> read_trace_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_trace_csv(in, path.filename().string());
}

inline void write_catalog_csv(std::ostream& out, const Catalog& catalog) {
  out << kCatalogCsvHeader << '\n';
  for (const VirtualObject& obj : catalog.objects()) {
    out << obj.id << ',' << format_double(obj.size_mb) << ',' << format_double(obj.position.x)
        << ',' << format_double(obj.position.y) << '\n';
  }
}

inline void write_catalog_csv(const std::filesystem::path& path, const Catalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  write_catalog_csv(out, catalog);
}

inline Catalog read_catalog_csv(std::istream& in, const std::string& name = "catalog") {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCatalogCsvHeader) {
    throw std::invalid_argument(name + ": missing header '" + std::string(kCatalogCsvHeader) + "'");
  }
  std::vector<VirtualObject> objects;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    const std::string ctx = name + " line " + std::to_string(line_no);
    if (fields.size() != 4) throw std::invalid_argument(ctx + ": expected 4 fields");
    VirtualObject obj;
    obj.id = detail::parse_int(fields[0], ctx);
    obj.size_mb = detail::parse_double(fields[1], ctx);
    obj.position.x = detail::parse_double(fields[2], ctx);
    obj.position.y = detail::parse_double(fields[3], ctx);
    objects.push_back(obj);
  }
  return Catalog(std::move(objects));
}

inline Catalog read_catalog_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_catalog_csv(in, path.filename().string());
}

// SPMF transaction format: one transaction per line, whitespace-separated
// nonnegative integer item ids. Blank lines are skipped, duplicate items
// within a line collapse.
inline std::vector<Transaction> load_spmf(std::istream& in, const std::string& name = "spmf") {
  std::vector<Transaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::vector<ObjectId> items;
    std::string token;
    while (tokens >> token) {
      items.push_back(
          detail::parse_int(token, name + " line " + std::to_string(line_no)));
      if (items.back() < 0) {
        throw std::invalid_argument(name + " line " + std::to_string(line_no) +
                                    ": item ids must be nonnegative");
      }
    }
    if (items.empty()) continue;
    out.push_back(Transaction{static_cast<std::int64_t>(out.size()), make_itemset(std::move(items))});
  }
  return out;
}

inline std::vector<Transaction> load_spmf(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_spmf(in, path.filename().string());
}

inline void write_planted_itemsets(std::ostream& out, const std::vector<Itemset>& sets) {
  for (const Itemset& set : sets) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i > 0) out << ';';
      out << set[i];
    }
    out << '\n';
  }
}

inline void write_planted_itemsets(const std::filesystem::path& path,
                                   const std::vector<Itemset>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  write_planted_itemsets(out, sets);
}

}  // namespace spaarc
