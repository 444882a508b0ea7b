#ifndef LOGANVIL_TEST_UTIL_HPP
#define LOGANVIL_TEST_UTIL_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "loganvil/backend.hpp"
#include "loganvil/core.hpp"
#include "loganvil/correlate.hpp"
#include "loganvil/predetect.hpp"

namespace loganvil::testutil {

inline EventRecord make_record(const std::string& ts, std::string id,
                               std::string source, std::string desc,
                               std::optional<std::string> machine = {}) {
  EventRecord r;
  r.timestamp = canonical_timestamp(ts);
  r.event_id = std::move(id);
  r.source = std::move(source);
  r.machine = std::move(machine);
  r.description = std::move(desc);
  return r;
}

inline EventRecord at_seconds(int64_t s, std::string id, std::string source,
                              std::string desc,
                              std::optional<std::string> machine = {}) {
  EventRecord r;
  r.timestamp = Timestamp::from_epoch_seconds(s);
  r.event_id = std::move(id);
  r.source = std::move(source);
  r.machine = std::move(machine);
  r.description = std::move(desc);
  return r;
}

// RAII scratch directory under the system temp dir.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("loganvil-test-" + std::to_string(::getpid()) +
                               "-" + std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
  static inline int counter_ = 0;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Brute-force transitive-closure grouping: repeatedly merge any two
// clusters joined by a qualifying pair, independent of the union-find
// route in the implementation.
inline std::vector<std::vector<size_t>> closure_groups_oracle(
    const std::vector<EventRecord>& records,
    const correlate::CorrelationConfig& cfg) {
  const size_t n = records.size();
  std::vector<size_t> cluster(n);
  for (size_t i = 0; i < n; ++i) cluster[i] = i;

  auto linked = [&](size_t i, size_t j) {
    int64_t dt = records[j].timestamp.seconds() - records[i].timestamp.seconds();
    if (dt < 0) dt = -dt;
    if (dt > cfg.window_seconds) return false;
    if (cfg.link_on_source && records[i].source == records[j].source &&
        records[i].source != "unknown")
      return true;
    if (cfg.link_on_machine && records[i].machine && records[j].machine &&
        *records[i].machine == *records[j].machine)
      return true;
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (cluster[i] != cluster[j] && linked(i, j)) {
          const size_t from = cluster[j], to = cluster[i];
          for (size_t k = 0; k < n; ++k)
            if (cluster[k] == from) cluster[k] = to;
          changed = true;
        }
      }
    }
  }

  std::vector<std::vector<size_t>> groups;
  std::vector<bool> seen_cluster(n, false);
  for (size_t i = 0; i < n; ++i) {
    if (seen_cluster[cluster[i]]) continue;
    seen_cluster[cluster[i]] = true;
    std::vector<size_t> g;
    for (size_t j = 0; j < n; ++j)
      if (cluster[j] == cluster[i]) g.push_back(j);
    groups.push_back(std::move(g));
  }
  return groups;  // ordered by earliest member because i ascends
}

// Quadratic sliding-window oracle for the pre-detector: an index fires if
// any anchor window [t_a, t_a + W] holds >= min_count matches.
inline std::vector<Detection> scan_oracle(const LogGroup& group,
                                          const std::vector<predetect::Rule>& rules) {
  std::vector<Detection> detections;
  for (const auto& rule : rules) {
    std::set<size_t> fired;
    auto consider = [&](const std::vector<size_t>& matches) {
      for (size_t a = 0; a < matches.size(); ++a) {
        std::vector<size_t> in_window;
        const int64_t t0 = group.records[matches[a]].timestamp.seconds();
        for (size_t b = 0; b < matches.size(); ++b) {
          const int64_t t = group.records[matches[b]].timestamp.seconds();
          if (t >= t0 && t - t0 <= rule.window_seconds)
            in_window.push_back(matches[b]);
        }
        if (static_cast<int>(in_window.size()) >= rule.min_count)
          fired.insert(in_window.begin(), in_window.end());
      }
    };

    if (rule.category == DetectionCategory::repetition_flood) {
      std::set<std::pair<std::string, std::string>> keys;
      for (const auto& r : group.records)
        keys.insert({r.event_id, r.description});
      for (const auto& key : keys) {
        std::vector<size_t> matches;
        for (size_t i = 0; i < group.records.size(); ++i)
          if (predetect::rule_matches(rule, group.records[i]) &&
              group.records[i].event_id == key.first &&
              group.records[i].description == key.second)
            matches.push_back(i);
        consider(matches);
      }
    } else {
      std::vector<size_t> matches;
      for (size_t i = 0; i < group.records.size(); ++i)
        if (predetect::rule_matches(rule, group.records[i]))
          matches.push_back(i);
      consider(matches);
    }

    if (!fired.empty()) {
      Detection d;
      d.category = rule.category;
      d.rule_id = rule.rule_id;
      d.triggering_indices.assign(fired.begin(), fired.end());
      detections.push_back(std::move(d));
    }
  }
  std::sort(detections.begin(), detections.end(),
            [](const Detection& a, const Detection& b) {
              return a.rule_id < b.rule_id;
            });
  return detections;
}

// Scripted backend that records every request; response k is
// "Problem Identified: state k, How to resolve: 1) step k".
class RecordingBackend : public backend::Backend {
 public:
  std::vector<backend::ChatRequest> requests;
  std::vector<std::string> responses;

  backend::ChatResponse complete(const backend::ChatRequest& request) override {
    validate(request);
    requests.push_back(request);
    const size_t k = requests.size();
    std::string text = "Problem Identified: state " + std::to_string(k) +
                       "\nHow to resolve:\n1) step " + std::to_string(k);
    responses.push_back(text);
    return {text, 0, 0, 0};
  }
};

}  // namespace loganvil::testutil

#endif
