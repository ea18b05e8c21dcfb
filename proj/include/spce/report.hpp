#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spce {

// Deterministic formatting used everywhere a number reaches an output file:
// 17 significant digits round-trip doubles exactly, so identical inputs give
// byte-identical files.
std::string fmt_double(double v);

// Flat key = value document, keys emitted in insertion order. There is
// deliberately no timestamp field anywhere: a report must be reproducible
// byte-for-byte from (config, seed, tool version).
class ReportDoc {
 public:
  explicit ReportDoc(const std::string& command);

  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, const char* value);
  void put(const std::string& key, double value);
  void put(const std::string& key, bool value);
  void put(const std::string& key, std::int64_t value);
  void put(const std::string& key, std::uint64_t value);
  void put(const std::string& key, int value);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

// Minimal CSV writer for the plot-ready tables.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace spce
