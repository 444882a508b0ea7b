#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "loganvil/analyze.hpp"
#include "loganvil/backend.hpp"
#include "loganvil/correlate.hpp"
#include "loganvil/core.hpp"
#include "loganvil/eval.hpp"
#include "loganvil/forge.hpp"
#include "loganvil/ingest.hpp"
#include "loganvil/predetect.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using loganvil::EventRecord;
using loganvil::LogGroup;

// Shared config file; flags override config values, config overrides
// built-in defaults.
nlohmann::json g_config = nlohmann::json::object();

void preload_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw loganvil::IoError(std::string("cannot open config ") +
                                       argv[i + 1]);
      in >> g_config;
      return;
    }
  }
}

template <typename T>
T cfg_or(const std::string& key, T fallback) {
  if (g_config.contains(key)) return g_config[key].get<T>();
  return fallback;
}

std::unique_ptr<loganvil::backend::Backend> make_backend(
    const std::string& spec, const std::string& endpoint_url,
    const std::string& model_id, int parallel) {
  if (spec.rfind("mock:", 0) == 0)
    return loganvil::backend::mock_from_fixture(spec.substr(5));
  if (spec == "http") {
    loganvil::backend::BackendConfig cfg;
    cfg.endpoint_url = endpoint_url;
    cfg.model_id = model_id;
    cfg.max_in_flight = parallel;
    if (cfg.endpoint_url.empty())
      throw loganvil::FormatError("http backend requires --endpoint-url");
    return std::make_unique<loganvil::backend::HttpBackend>(cfg);
  }
  throw loganvil::FormatError("backend must be http or mock:<fixture.json>");
}

nlohmann::ordered_json record_to_json(const EventRecord& r) {
  nlohmann::ordered_json j;
  j["timestamp"] = r.timestamp.to_string();
  j["event_id"] = r.event_id;
  j["source"] = r.source;
  if (r.machine) j["machine"] = *r.machine;
  j["description"] = r.description;
  return j;
}

nlohmann::ordered_json report_to_json(const LogGroup& group,
                                      const loganvil::AnalysisReport& report) {
  nlohmann::ordered_json j;
  j["group_id"] = group.group_id;
  j["basis"] = to_string(group.basis);
  j["problem_identified"] = report.problem_identified();
  j["problem"] = report.problem();
  j["remediation"] = report.remediation();
  j["chunks_used"] = report.chunks_used();
  nlohmann::ordered_json dets = nlohmann::ordered_json::array();
  for (const auto& d : report.detections()) {
    nlohmann::ordered_json dj;
    dj["rule_id"] = d.rule_id;
    dj["category"] = to_string(d.category);
    dj["triggering_indices"] = d.triggering_indices;
    dets.push_back(dj);
  }
  j["detections"] = dets;
  j["raw_final_response"] = report.raw_final_response();
  return j;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw loganvil::IoError("cannot write " + path);
  out << content;
}

std::vector<loganvil::predetect::Rule> rules_for(const std::string& path) {
  return path.empty() ? loganvil::predetect::default_rules()
                      : loganvil::predetect::load_rules(path);
}

int run(int argc, char** argv) {
  CLI::App app{"loganvil: Windows event log analysis pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "shared JSON configuration file");

  std::string in_path, out_path, format_str, rules_path, backend_spec;
  std::string endpoint_url, model_id;
  int window = cfg_or("window_seconds", 60);
  int rep_threshold = cfg_or("repetition_threshold", 20);
  int chunk_size = cfg_or("chunk_size", 7);
  int parallel = cfg_or("parallel", 4);
  long long cap = 0;
  format_str = cfg_or<std::string>("format", "auto");
  rules_path = cfg_or<std::string>("rules", "");
  backend_spec = cfg_or<std::string>("backend", "");
  endpoint_url = cfg_or<std::string>("endpoint_url", "");
  model_id = cfg_or<std::string>("model_id", "");

  // ingest
  auto* c_ingest = app.add_subcommand("ingest", "parse logs, optionally split per machine");
  c_ingest->add_option("--input", in_path)->required();
  c_ingest->add_option("--format", format_str)->check(CLI::IsMember({"csv", "pipe", "auto"}));
  c_ingest->add_option("--cap", cap, "per-machine size cap; 0 = no split");
  c_ingest->add_option("--out", out_path);

  // correlate
  auto* c_corr = app.add_subcommand("correlate", "group related logs");
  c_corr->add_option("--input", in_path)->required();
  c_corr->add_option("--format", format_str);
  c_corr->add_option("--window", window);
  c_corr->add_option("--repetition-threshold", rep_threshold);
  c_corr->add_option("--out", out_path);

  // detect
  auto* c_detect = app.add_subcommand("detect", "rule-based pre-detection scan");
  c_detect->add_option("--input", in_path)->required();
  c_detect->add_option("--format", format_str);
  c_detect->add_option("--rules", rules_path);
  c_detect->add_option("--window", window);
  c_detect->add_option("--repetition-threshold", rep_threshold);
  c_detect->add_option("--out", out_path);

  // analyze
  auto* c_analyze = app.add_subcommand("analyze", "model analysis per correlated group");
  c_analyze->add_option("--input", in_path)->required();
  c_analyze->add_option("--format", format_str);
  c_analyze->add_option("--rules", rules_path);
  c_analyze->add_option("--backend", backend_spec);
  c_analyze->add_option("--endpoint-url", endpoint_url);
  c_analyze->add_option("--model-id", model_id);
  c_analyze->add_option("--chunk-size", chunk_size);
  c_analyze->add_option("--window", window);
  c_analyze->add_option("--repetition-threshold", rep_threshold);
  c_analyze->add_option("--parallel", parallel);
  c_analyze->add_option("--out", out_path);

  // gen-dataset
  long long target = cfg_or("target_count", 10000);
  int gen_batch = cfg_or("generation_batch", 50);
  int tail_groups = cfg_or("correlated_tail_groups", 4);
  std::string examples_path, instruction = cfg_or<std::string>(
      "instruction", loganvil::forge::kDefaultInstruction);
  auto* c_gen = app.add_subcommand("gen-dataset", "build the fine-tuning JSONL dataset");
  c_gen->add_option("--target", target);
  c_gen->add_option("--batch", gen_batch);
  c_gen->add_option("--tail-groups", tail_groups);
  c_gen->add_option("--examples", examples_path)->required();
  c_gen->add_option("--instruction", instruction);
  c_gen->add_option("--backend", backend_spec);
  c_gen->add_option("--endpoint-url", endpoint_url);
  c_gen->add_option("--model-id", model_id);
  c_gen->add_option("--out", out_path)->required();

  // label
  bool label_group = false;
  auto* c_label = app.add_subcommand("label", "label logs with the analysis grammar");
  c_label->add_option("--input", in_path)->required();
  c_label->add_flag("--group", label_group, "label the whole file as one group");
  c_label->add_option("--backend", backend_spec);
  c_label->add_option("--endpoint-url", endpoint_url);
  c_label->add_option("--model-id", model_id);
  c_label->add_option("--out", out_path);

  // validate
  long long min_count = cfg_or("min_count", 5000);
  auto* c_validate = app.add_subcommand("validate", "validate a JSONL dataset");
  c_validate->add_option("--input", in_path)->required();
  c_validate->add_option("--min-count", min_count);

  // emit-config
  std::string model_name, model_class_str = "slm";
  int max_tokens = 4096;
  auto* c_emit = app.add_subcommand("emit-config", "emit a training configuration");
  c_emit->add_option("--model", model_name)->required();
  c_emit->add_option("--class", model_class_str)->check(CLI::IsMember({"slm", "llm"}));
  c_emit->add_option("--max-tokens", max_tokens);
  c_emit->add_option("--out", out_path);

  // evaluate
  std::string responses_path, models_csv, csv_prefix;
  auto* c_eval = app.add_subcommand("evaluate", "aggregate expert questionnaire responses");
  c_eval->add_option("--responses", responses_path)->required();
  c_eval->add_option("--models", models_csv)->required();
  c_eval->add_option("--out", out_path);
  c_eval->add_option("--csv", csv_prefix, "also write <prefix>-table{1,2,3}.csv");

  // estimate
  long long items = 0;
  double seconds_per = cfg_or("seconds_per_request", 1.0);
  double dollars_per = cfg_or("dollars_per_request", 0.0);
  auto* c_estimate = app.add_subcommand("estimate", "linear cost/time projection");
  c_estimate->add_option("--items", items)->required();
  c_estimate->add_option("--seconds-per", seconds_per);
  c_estimate->add_option("--dollars-per", dollars_per);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto format = loganvil::ingest::log_format_from_string(format_str);

  if (*c_ingest) {
    auto file = loganvil::ingest::load_file(in_path, format);
    nlohmann::ordered_json j;
    if (cap > 0) {
      auto splits = loganvil::ingest::split_by_machine(
          file.records, static_cast<size_t>(cap));
      j = nlohmann::ordered_json::object();
      for (const auto& [machine, recs] : splits) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : recs) arr.push_back(record_to_json(r));
        j[machine] = arr;
      }
    } else {
      j = nlohmann::ordered_json::array();
      for (const auto& r : file.records) j.push_back(record_to_json(r));
    }
    write_output(out_path, j.dump(2) + "\n");
    return 0;
  }

  if (*c_corr) {
    auto file = loganvil::ingest::load_file(in_path, format);
    loganvil::correlate::CorrelationConfig ccfg;
    ccfg.window_seconds = window;
    ccfg.repetition_threshold = rep_threshold;
    auto idx_groups = loganvil::correlate::community_indices(file.records, ccfg);
    auto groups = loganvil::correlate::flag_repetitions(
        loganvil::correlate::communities(file.records, ccfg), ccfg);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (size_t g = 0; g < groups.size(); ++g) {
      nlohmann::ordered_json gj;
      gj["group_id"] = groups[g].group_id;
      gj["basis"] = to_string(groups[g].basis);
      gj["indices"] = idx_groups[g];
      j.push_back(gj);
    }
    write_output(out_path, j.dump(2) + "\n");
    return 0;
  }

  if (*c_detect) {
    auto file = loganvil::ingest::load_file(in_path, format);
    loganvil::correlate::CorrelationConfig ccfg;
    ccfg.window_seconds = window;
    ccfg.repetition_threshold = rep_threshold;
    auto groups = loganvil::correlate::flag_repetitions(
        loganvil::correlate::communities(file.records, ccfg), ccfg);
    auto rules = rules_for(rules_path);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
      auto detections = loganvil::predetect::scan(g, rules);
      nlohmann::ordered_json gj;
      gj["group_id"] = g.group_id;
      auto arr = nlohmann::ordered_json::array();
      for (const auto& d : detections) {
        nlohmann::ordered_json dj;
        dj["rule_id"] = d.rule_id;
        dj["category"] = to_string(d.category);
        dj["triggering_indices"] = d.triggering_indices;
        arr.push_back(dj);
      }
      gj["detections"] = arr;
      j.push_back(gj);
    }
    write_output(out_path, j.dump(2) + "\n");
    return 0;
  }

  if (*c_analyze) {
    auto file = loganvil::ingest::load_file(in_path, format);
    loganvil::correlate::CorrelationConfig ccfg;
    ccfg.window_seconds = window;
    ccfg.repetition_threshold = rep_threshold;
    auto groups = loganvil::correlate::flag_repetitions(
        loganvil::correlate::communities(file.records, ccfg), ccfg);
    auto rules = rules_for(rules_path);
    auto backend = make_backend(backend_spec, endpoint_url, model_id, parallel);

    loganvil::analyze::AnalysisConfig acfg;
    acfg.chunk_size = chunk_size;

    std::vector<nlohmann::ordered_json> results(groups.size());
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (size_t g; (g = next.fetch_add(1)) < groups.size();) {
        try {
          auto report =
              loganvil::analyze::analyze_group(groups[g], *backend, rules, acfg);
          results[g] = report_to_json(groups[g], report);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    const size_t n_workers =
        std::min<size_t>(std::max(parallel, 1), std::max<size_t>(groups.size(), 1));
    std::vector<std::thread> pool;
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (auto& r : results) j.push_back(std::move(r));
    write_output(out_path, j.dump(2) + "\n");
    return 0;
  }

  if (*c_gen) {
    auto backend = make_backend(backend_spec, endpoint_url, model_id, parallel);
    loganvil::forge::ForgeConfig fcfg;
    fcfg.target_count = static_cast<int>(target);
    fcfg.generation_batch = gen_batch;
    fcfg.correlated_tail_groups = tail_groups;
    fcfg.instruction_text = instruction;
    fcfg.example_logs =
        loganvil::ingest::load_file(examples_path, format).records;

    auto records = loganvil::forge::stage1_generate(*backend, fcfg);

    // Tail groups come from correlating the generated logs; prefer
    // multi-record communities.
    auto sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    loganvil::correlate::CorrelationConfig ccfg;
    auto all_groups = loganvil::correlate::communities(sorted, ccfg);
    std::stable_partition(all_groups.begin(), all_groups.end(),
                          [](const LogGroup& g) { return g.records.size() > 1; });
    if (all_groups.size() < static_cast<size_t>(tail_groups))
      throw loganvil::FormatError(
          "not enough correlated groups in generated data for the tail");
    std::vector<LogGroup> tail(all_groups.begin(),
                               all_groups.begin() + tail_groups);

    std::map<std::string, std::string> outputs;
    for (const auto& r : records) {
      const std::string input = loganvil::canonical_render(r);
      if (!outputs.count(input))
        outputs[input] = loganvil::forge::stage2_label(*backend, input);
    }
    for (const auto& g : tail) {
      std::string input;
      for (size_t i = 0; i < g.records.size(); ++i) {
        if (i) input += "\n";
        input += loganvil::canonical_render(g.records[i]);
      }
      if (!outputs.count(input))
        outputs[input] = loganvil::forge::stage2_label(*backend, input);
    }

    auto examples = loganvil::forge::assemble_dataset(records, tail, outputs, fcfg);
    auto count = loganvil::forge::write_jsonl(examples, out_path);
    std::cout << "wrote " << count << " examples to " << out_path << "\n";
    return 0;
  }

  if (*c_label) {
    auto backend = make_backend(backend_spec, endpoint_url, model_id, parallel);
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw loganvil::IoError("cannot open " + in_path);
    std::ostringstream result;
    if (label_group) {
      std::stringstream buf;
      buf << in.rdbuf();
      std::string content = buf.str();
      while (!content.empty() &&
             (content.back() == '\n' || content.back() == '\r'))
        content.pop_back();
      result << loganvil::forge::stage2_label(*backend, content) << "\n";
    } else {
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        result << loganvil::forge::stage2_label(*backend, line) << "\n";
      }
    }
    write_output(out_path, result.str());
    return 0;
  }

  if (*c_validate) {
    auto report = loganvil::forge::validate_dataset(
        in_path, static_cast<size_t>(min_count));
    std::cout << report.example_count << " examples, "
              << report.violations.size() << " violations\n";
    for (const auto& v : report.violations)
      std::cout << (v.line ? "line " + std::to_string(v.line) : "file") << ": "
                << v.check << ": " << v.detail << "\n";
    return report.ok() ? 0 : 1;
  }

  if (*c_emit) {
    auto cfg = loganvil::forge::emit_training_config(
        model_name, loganvil::model_class_from_string(model_class_str),
        max_tokens);
    nlohmann::ordered_json j;
    j["model_name"] = cfg.model_name;
    j["model_class"] = to_string(cfg.model_class);
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["method"] = cfg.method;
    j["max_token_length"] = cfg.max_token_length;
    write_output(out_path, j.dump(2) + "\n");
    return 0;
  }

  if (*c_eval) {
    auto responses = loganvil::eval::load_responses(responses_path);
    std::vector<std::string> models;
    std::stringstream ms(models_csv);
    std::string m;
    while (std::getline(ms, m, ','))
      if (!m.empty()) models.push_back(m);
    write_output(out_path, loganvil::eval::render_report(responses, models));
    if (!csv_prefix.empty()) {
      auto tables = loganvil::eval::render_csv(responses, models);
      for (size_t i = 0; i < tables.size(); ++i)
        write_output(csv_prefix + "-table" + std::to_string(i + 1) + ".csv",
                     tables[i]);
    }
    return 0;
  }

  if (*c_estimate) {
    loganvil::analyze::CostModel model{seconds_per, dollars_per};
    auto est = loganvil::analyze::estimate_cost(items, model);
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "items: %lld\ntime: %.0f s (%.1f days)\ncost: $%.2f\n", items,
                  est.seconds, est.seconds / 86400.0, est.dollars);
    std::cout << buf;
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    preload_config(argc, argv);
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
