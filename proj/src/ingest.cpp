#include "loganvil/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace loganvil::ingest {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_pipe(const std::string& line) {
  std::vector<std::string> segs;
  size_t pos = 0;
  while (true) {
    size_t bar = line.find('|', pos);
    if (bar == std::string::npos) {
      segs.push_back(trim(line.substr(pos)));
      break;
    }
    segs.push_back(trim(line.substr(pos, bar - pos)));
    pos = bar + 1;
  }
  return segs;
}

}  // namespace

LogFormat log_format_from_string(const std::string& s) {
  if (s == "csv") return LogFormat::csv_style;
  if (s == "pipe") return LogFormat::pipe_style;
  if (s == "auto") return LogFormat::auto_detect;
  throw FormatError("unknown log format: " + s);
}

EventRecord parse_csv_line(const std::string& line) {
  // Only the first three commas separate fields.
  std::vector<size_t> commas;
  for (size_t i = 0; i < line.size() && commas.size() < 3; ++i)
    if (line[i] == ',') commas.push_back(i);
  if (commas.size() < 2)
    throw FormatError("csv line needs at least 3 fields: \"" + line + "\"");

  EventRecord r;
  r.timestamp = canonical_timestamp(trim(line.substr(0, commas[0])));
  r.event_id = trim(line.substr(commas[0] + 1, commas[1] - commas[0] - 1));
  if (commas.size() == 3) {
    r.source = trim(line.substr(commas[1] + 1, commas[2] - commas[1] - 1));
    std::string desc = line.substr(commas[2] + 1);
    size_t b = desc.find_first_not_of(" \t");
    r.description = b == std::string::npos ? "" : desc.substr(b);
    while (!r.description.empty() &&
           (r.description.back() == '\r' || r.description.back() == '\n'))
      r.description.pop_back();
  } else {
    r.source = trim(line.substr(commas[1] + 1));
    r.description = "";
  }
  validate(r);
  return r;
}

EventRecord parse_pipe_line(const std::string& line) {
  auto segs = split_pipe(line);
  if (segs.empty()) throw FormatError("empty pipe line");

  EventRecord r;
  r.timestamp = canonical_timestamp(segs[0]);
  r.source = "unknown";

  size_t id_seg = 0;
  for (size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].rfind("Machine=", 0) == 0 && !r.machine) {
      r.machine = segs[i].substr(8);
    } else if (segs[i].rfind("ID=", 0) == 0 && id_seg == 0) {
      r.event_id = segs[i].substr(3);
      id_seg = i;
    }
  }
  if (id_seg == 0 || r.event_id.empty())
    throw FormatError("pipe line missing ID segment: \"" + line + "\"");

  std::string desc;
  for (size_t i = id_seg + 1; i < segs.size(); ++i) {
    if (!desc.empty()) desc += " | ";
    desc += segs[i];
  }
  r.description = desc;
  validate(r);
  return r;
}

LogFile load_file(const std::string& path, LogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  LogFile file;
  file.path = path;
  file.format = format;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    if (file.format == LogFormat::auto_detect) {
      file.format = line.find(" | ") != std::string::npos
                        ? LogFormat::pipe_style
                        : LogFormat::csv_style;
    }
    try {
      file.records.push_back(file.format == LogFormat::pipe_style
                                 ? parse_pipe_line(line)
                                 : parse_csv_line(line));
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return file;
}

std::map<std::string, std::vector<EventRecord>> split_by_machine(
    const std::vector<EventRecord>& records, size_t cap) {
  if (cap < 1) throw FormatError("cap must be >= 1");

  std::map<std::string, std::vector<EventRecord>> by_machine;
  for (const auto& r : records)
    by_machine[r.machine.value_or("unknown")].push_back(r);

  std::map<std::string, std::vector<EventRecord>> out;
  for (auto& [machine, recs] : by_machine) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (recs.size() <= cap) {
      out[machine] = std::move(recs);
      continue;
    }
    std::vector<EventRecord> picked;
    picked.reserve(cap);
    const size_t n = recs.size();
    for (size_t i = 0; i < cap; ++i) picked.push_back(recs[i * n / cap]);
    out[machine] = std::move(picked);
  }
  return out;
}

}  // namespace loganvil::ingest
