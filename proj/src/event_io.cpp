#include "spce/event_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spce/errors.hpp"

namespace spce {

namespace {

constexpr const char* kHeader = "# spce-events v1";

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& what) {
  throw FormatError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void write_events(const std::string& path, const std::vector<EventRecord>& stream_a,
                  const std::vector<EventRecord>& stream_b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << kHeader << "\n";
  char buf[64];
  std::size_t i = 0, j = 0;
  auto emit = [&](const EventRecord& e, char side) {
    std::snprintf(buf, sizeof(buf), "%lld,%c,%d,%s\n",
                  static_cast<long long>(e.time_ns), side, e.setting,
                  e.outcome > 0 ? "+1" : "-1");
    out << buf;
  };
  while (i < stream_a.size() || j < stream_b.size()) {
    const bool take_a =
        j >= stream_b.size() ||
        (i < stream_a.size() && stream_a[i].time_ns <= stream_b[j].time_ns);
    if (take_a) {
      emit(stream_a[i++], 'A');
    } else {
      emit(stream_b[j++], 'B');
    }
  }
  if (!out) throw FormatError("write failed: " + path);
}

std::pair<std::vector<EventRecord>, std::vector<EventRecord>> read_events(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  ++line_no;
  if (line == std::string(kHeader) + "\r") line.pop_back();
  if (line != kHeader) fail(path, 1, "bad header, expected '" + std::string(kHeader) + "'");

  std::vector<EventRecord> stream_a, stream_b;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) fail(path, line_no, "empty record line");

    // time_ns,side,setting,outcome
    std::array<std::string_view, 4> fields;
    std::string_view rest = line;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos) fail(path, line_no, "expected 4 fields");
        fields[f] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) fail(path, line_no, "expected 4 fields");
        fields[f] = rest;
      }
    }

    EventRecord rec;
    {
      const auto [ptr, ec] = std::from_chars(
          fields[0].data(), fields[0].data() + fields[0].size(), rec.time_ns);
      if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
        fail(path, line_no, "bad time field '" + std::string(fields[0]) + "'");
      }
    }
    if (fields[1] == "A") {
      rec.side = Side::A;
    } else if (fields[1] == "B") {
      rec.side = Side::B;
    } else {
      fail(path, line_no, "bad side field '" + std::string(fields[1]) + "'");
    }
    if (fields[2] == "1") {
      rec.setting = 1;
    } else if (fields[2] == "2") {
      rec.setting = 2;
    } else {
      fail(path, line_no, "bad setting field '" + std::string(fields[2]) + "'");
    }
    if (fields[3] == "+1") {
      rec.outcome = +1;
    } else if (fields[3] == "-1") {
      rec.outcome = -1;
    } else {
      fail(path, line_no, "bad outcome field '" + std::string(fields[3]) + "'");
    }

    auto& stream = rec.side == Side::A ? stream_a : stream_b;
    if (!stream.empty() && rec.time_ns < stream.back().time_ns) {
      fail(path, line_no, "records out of time order within side");
    }
    stream.push_back(rec);
  }
  return {std::move(stream_a), std::move(stream_b)};
}

}  // namespace spce
