#include "loganvil/correlate.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

namespace loganvil::correlate {
namespace {

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  size_t find(size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

bool source_link(const EventRecord& a, const EventRecord& b,
                 const CorrelationConfig& cfg) {
  return cfg.link_on_source && a.source == b.source && a.source != "unknown";
}

bool machine_link(const EventRecord& a, const EventRecord& b,
                  const CorrelationConfig& cfg) {
  return cfg.link_on_machine && a.machine && b.machine &&
         *a.machine == *b.machine;
}

}  // namespace

void validate(const CorrelationConfig& cfg) {
  if (cfg.window_seconds < 1) throw FormatError("window_seconds must be >= 1");
  if (cfg.repetition_threshold < 2)
    throw FormatError("repetition_threshold must be >= 2");
}

std::vector<std::pair<size_t, size_t>> build_edges(
    const std::vector<EventRecord>& records, const CorrelationConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<size_t, size_t>> edges;
  for (size_t i = 0; i < records.size(); ++i) {
    for (size_t j = i + 1; j < records.size(); ++j) {
      const int64_t dt =
          records[j].timestamp.seconds() - records[i].timestamp.seconds();
      if (dt > cfg.window_seconds) break;  // sorted input
      if (source_link(records[i], records[j], cfg) ||
          machine_link(records[i], records[j], cfg))
        edges.emplace_back(i, j);
    }
  }
  return edges;
}

std::vector<std::vector<size_t>> community_indices(
    const std::vector<EventRecord>& records, const CorrelationConfig& cfg) {
  const auto edges = build_edges(records, cfg);

  UnionFind uf(records.size());
  for (const auto& [i, j] : edges) uf.unite(i, j);

  std::map<size_t, std::vector<size_t>> members;  // root -> indices
  for (size_t i = 0; i < records.size(); ++i)
    members[uf.find(i)].push_back(i);

  // Order groups by earliest member index (records are chronological).
  std::vector<std::vector<size_t>> ordered;
  for (auto& [root, idxs] : members) ordered.push_back(std::move(idxs));
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return ordered;
}

std::vector<LogGroup> communities(const std::vector<EventRecord>& records,
                                  const CorrelationConfig& cfg) {
  const auto edges = build_edges(records, cfg);

  UnionFind uf(records.size());
  for (const auto& [i, j] : edges) uf.unite(i, j);

  // A component is shared-source-window if any source edge contributed.
  std::vector<bool> has_source_edge(records.size(), false);
  for (const auto& [i, j] : edges)
    if (source_link(records[i], records[j], cfg))
      has_source_edge[uf.find(i)] = true;

  std::vector<LogGroup> groups;
  int next_id = 0;
  for (const auto& idxs : community_indices(records, cfg)) {
    LogGroup g;
    g.group_id = next_id++;
    for (size_t i : idxs) g.records.push_back(records[i]);
    if (idxs.size() == 1) {
      g.basis = GroupBasis::singleton;
    } else {
      g.basis = has_source_edge[uf.find(idxs.front())]
                    ? GroupBasis::shared_source_window
                    : GroupBasis::shared_machine_window;
    }
    validate(g);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<LogGroup> flag_repetitions(std::vector<LogGroup> groups,
                                       const CorrelationConfig& cfg) {
  validate(cfg);
  for (auto& g : groups) {
    std::map<std::pair<std::string, std::string>, int> counts;
    for (const auto& r : g.records)
      ++counts[{r.event_id, r.description}];
    for (const auto& [key, n] : counts) {
      if (n >= cfg.repetition_threshold) {
        g.basis = GroupBasis::repetition;
        break;
      }
    }
  }
  return groups;
}

}  // namespace loganvil::correlate
