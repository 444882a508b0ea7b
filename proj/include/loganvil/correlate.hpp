#ifndef LOGANVIL_CORRELATE_HPP
#define LOGANVIL_CORRELATE_HPP

#include <utility>
#include <vector>

#include "loganvil/core.hpp"

namespace loganvil::correlate {

struct CorrelationConfig {
  int window_seconds = 60;
  bool link_on_source = true;
  bool link_on_machine = true;
  int repetition_threshold = 20;
};

void validate(const CorrelationConfig& cfg);

/// Undirected edges (i, j), i < j, between records within window_seconds
/// that share a source (other than "unknown") or a machine, per config.
/// Records must be sorted by timestamp.
std::vector<std::pair<size_t, size_t>> build_edges(
    const std::vector<EventRecord>& records, const CorrelationConfig& cfg);

/// Connected components of the build_edges graph as record indices,
/// emitted in order of earliest member.
std::vector<std::vector<size_t>> community_indices(
    const std::vector<EventRecord>& records, const CorrelationConfig& cfg);

/// Connected components of the build_edges graph, emitted in order of
/// earliest member. Stands in for graph-community log grouping over flat
/// log lines.
std::vector<LogGroup> communities(const std::vector<EventRecord>& records,
                                  const CorrelationConfig& cfg);

/// Marks basis=repetition on any group holding repetition_threshold or
/// more records with identical (event_id, description).
std::vector<LogGroup> flag_repetitions(std::vector<LogGroup> groups,
                                       const CorrelationConfig& cfg);

}  // namespace loganvil::correlate

#endif
