#ifndef LOGANVIL_INGEST_HPP
#define LOGANVIL_INGEST_HPP

#include <map>
#include <string>
#include <vector>

#include "loganvil/core.hpp"

namespace loganvil::ingest {

enum class LogFormat { csv_style, pipe_style, auto_detect };

LogFormat log_format_from_string(const std::string& s);

struct LogFile {
  std::string path;
  LogFormat format = LogFormat::auto_detect;  // resolved format after load
  std::vector<EventRecord> records;           // file order
};

/// "ts, event_id, source, description..." — only the first three commas
/// separate fields; the description keeps any further commas.
EventRecord parse_csv_line(const std::string& line);

/// "ts | Machine=HOST | ID=62 | description" — Machine segment optional,
/// source defaults to "unknown".
EventRecord parse_pipe_line(const std::string& line);

/// Reads a UTF-8 text file, one event per non-blank line. auto_detect
/// sniffs the first non-blank line (" | " means pipe_style) and requires
/// the whole file to be homogeneous.
LogFile load_file(const std::string& path, LogFormat format);

/// Per-machine chronological splits capped at `cap` records each; records
/// without a machine fall under "unknown". Downsampling picks indices
/// floor(i*n/cap) over the sorted sequence so the full time range is kept.
std::map<std::string, std::vector<EventRecord>> split_by_machine(
    const std::vector<EventRecord>& records, size_t cap);

}  // namespace loganvil::ingest

#endif
