#include "spce/report.hpp"

#include <cstdio>
#include <fstream>

#include "spce/errors.hpp"
#include "spce/version.hpp"

namespace spce {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ReportDoc::ReportDoc(const std::string& command) {
  lines_.emplace_back("report", "spce v1");
  lines_.emplace_back("tool_version", std::string(kToolVersion));
  lines_.emplace_back("command", command);
}

void ReportDoc::put(const std::string& key, const std::string& value) {
  lines_.emplace_back(key, value);
}
void ReportDoc::put(const std::string& key, const char* value) {
  lines_.emplace_back(key, value);
}
void ReportDoc::put(const std::string& key, double value) {
  lines_.emplace_back(key, fmt_double(value));
}
void ReportDoc::put(const std::string& key, bool value) {
  lines_.emplace_back(key, value ? "true" : "false");
}
void ReportDoc::put(const std::string& key, std::int64_t value) {
  lines_.emplace_back(key, std::to_string(value));
}
void ReportDoc::put(const std::string& key, std::uint64_t value) {
  lines_.emplace_back(key, std::to_string(value));
}
void ReportDoc::put(const std::string& key, int value) {
  lines_.emplace_back(key, std::to_string(value));
}

std::string ReportDoc::str() const {
  std::string out;
  for (const auto& [key, value] : lines_) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

void ReportDoc::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << str();
  if (!out) throw FormatError("write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace spce
