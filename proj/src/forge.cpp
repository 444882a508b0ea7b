#include "loganvil/forge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loganvil/analyze.hpp"
#include "loganvil/ingest.hpp"

namespace loganvil::forge {

const char kDefaultInstruction[] =
    "You are a Windows event log analyser. Analyse the event log(s) in the "
    "input. Identify any security, system-health, or operational issues and "
    "explain how to resolve them.";

const char kNoProblemOutput[] = "No problem identified.";

const char kLabelSystemPrompt[] =
    "You are an event log analyser. Reply only with the text to fill in the "
    "output field. Reply only in the format: Problem Identified..., How to "
    "resolve: \xE2\x80\xA6,";

namespace {

std::string with_thousands(int n) {
  std::string digits = std::to_string(n);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.insert(out.begin(), ',');
    out.insert(out.begin(), *it);
    ++count;
  }
  return out;
}

// Pulls EventRecords out of a stage-1 reply: either a JSON array of log
// objects or one JSON object per line.
std::vector<EventRecord> parse_generated(const std::string& text) {
  std::vector<nlohmann::json> objects;
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.is_array())
      objects.assign(doc.begin(), doc.end());
    else if (doc.is_object())
      objects.push_back(doc);
  } catch (const nlohmann::json::exception&) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find('{') == std::string::npos) continue;
      try {
        objects.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception&) {
      }
    }
  }

  std::vector<EventRecord> records;
  for (const auto& obj : objects) {
    if (!obj.is_object()) continue;
    try {
      EventRecord r;
      r.timestamp = canonical_timestamp(obj.at("Date/Time").get<std::string>());
      r.event_id = obj.at("Event ID").is_string()
                       ? obj["Event ID"].get<std::string>()
                       : std::to_string(obj["Event ID"].get<long long>());
      r.source = obj.at("Application").get<std::string>();
      r.description = obj.at("Description").get<std::string>();
      validate(r);
      records.push_back(std::move(r));
    } catch (const std::exception&) {
      // Malformed entries are skipped; an all-bad batch counts toward the
      // failure budget.
    }
  }
  return records;
}

}  // namespace

std::string generation_prompt(int count) {
  return "You are a Windows event log generator. Generate " +
         with_thousands(count) +
         " realistic Windows event logs (including performance from "
         "performance monitor, system logs, and application events) as JSON "
         "objects. Each log entry should always have the following fields: "
         "Date/Time, Event ID, Application and Description. All columns "
         "should not include any commas. Include logs as separate entries "
         "and do not add additional columns.";
}

void validate(const ForgeConfig& cfg) {
  if (cfg.target_count < 1) throw FormatError("target_count must be >= 1");
  if (cfg.generation_batch < 1)
    throw FormatError("generation_batch must be >= 1");
  if (cfg.correlated_tail_groups < 0)
    throw FormatError("correlated_tail_groups must be >= 0");
}

std::vector<EventRecord> stage1_generate(backend::Backend& backend,
                                         const ForgeConfig& cfg) {
  validate(cfg);

  std::string examples_text;
  for (size_t i = 0; i < cfg.example_logs.size(); ++i) {
    if (i) examples_text += "\n";
    examples_text += canonical_render(cfg.example_logs[i]);
  }
  if (examples_text.empty()) examples_text = "(no example logs provided)";

  std::vector<EventRecord> accumulated;
  std::set<std::tuple<int64_t, std::string, std::string>> seen;
  int consecutive_failures = 0;

  while (accumulated.size() < static_cast<size_t>(cfg.target_count)) {
    backend::ChatRequest req;
    req.system_prompt = generation_prompt(cfg.generation_batch);
    req.user_content = examples_text;
    auto resp = backend.complete(req);

    auto batch = parse_generated(resp.text);
    if (batch.empty()) {
      if (++consecutive_failures >= 10)
        throw GenerationExhausted(
            "10 consecutive unparseable generation batches");
      continue;
    }
    consecutive_failures = 0;
    for (auto& r : batch) {
      auto key = std::make_tuple(r.timestamp.seconds(), r.event_id,
                                 r.description);
      if (seen.insert(key).second) accumulated.push_back(std::move(r));
    }
  }
  accumulated.resize(cfg.target_count);
  return accumulated;
}

std::string stage2_label(backend::Backend& backend,
                         const std::string& input_text) {
  if (input_text.empty()) throw FormatError("input_text must be non-empty");

  for (int attempt = 0; attempt < 3; ++attempt) {  // initial + 2 relabels
    backend::ChatRequest req;
    req.system_prompt = kLabelSystemPrompt;
    req.user_content = input_text;
    auto resp = backend.complete(req);
    try {
      auto parsed = analyze::parse_model_output(resp.text);
      if (!parsed.problem_identified) return kNoProblemOutput;
      std::string text = resp.text;
      size_t b = text.find_first_not_of(" \t\r\n");
      size_t e = text.find_last_not_of(" \t\r\n");
      return text.substr(b, e - b + 1);
    } catch (const UnparseableOutput&) {
      // relabel
    }
  }
  throw UnparseableOutput("label output failed grammar after 2 relabels");
}

std::vector<FineTuneExample> assemble_dataset(
    const std::vector<EventRecord>& records,
    const std::vector<LogGroup>& groups,
    const std::map<std::string, std::string>& outputs,
    const ForgeConfig& cfg) {
  validate(cfg);
  if (groups.size() < static_cast<size_t>(cfg.correlated_tail_groups))
    throw FormatError("fewer groups than correlated_tail_groups");

  auto lookup = [&](const std::string& input) -> const std::string& {
    auto it = outputs.find(input);
    if (it == outputs.end()) throw MissingLabel("no label for input: " + input);
    return it->second;
  };

  std::vector<FineTuneExample> examples;
  for (const auto& r : records) {
    const std::string input = canonical_render(r);
    examples.push_back({cfg.instruction_text, input, lookup(input)});
  }
  for (int g = 0; g < cfg.correlated_tail_groups; ++g) {
    std::string input;
    for (size_t i = 0; i < groups[g].records.size(); ++i) {
      if (i) input += "\n";
      input += canonical_render(groups[g].records[i]);
    }
    examples.push_back({cfg.instruction_text, input, lookup(input)});
  }
  return examples;
}

size_t write_jsonl(const std::vector<FineTuneExample>& examples,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (size_t i = 0; i < examples.size(); ++i) {
    nlohmann::ordered_json j;
    j["instruction"] = examples[i].instruction;
    j["input"] = examples[i].input;
    j["output"] = examples[i].output;
    if (i) out << "\n";
    out << j.dump();
  }
  if (!examples.empty()) out << "\n";
  if (!out) throw IoError("write failed for " + path);
  return examples.size();
}

std::vector<FineTuneExample> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<FineTuneExample> examples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    examples.push_back({j.at("instruction").get<std::string>(),
                        j.at("input").get<std::string>(),
                        j.at("output").get<std::string>()});
  }
  return examples;
}

ValidationReport validate_dataset(const std::string& path, size_t min_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  ValidationReport report;
  std::string line;
  size_t line_no = 0;
  std::string first_instruction;
  bool have_instruction = false;
  bool seen_group_input = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      report.violations.push_back({line_no, "json", e.what()});
      continue;
    }
    ++report.example_count;

    if (!j.is_object() || j.size() != 3 || !j.contains("instruction") ||
        !j.contains("input") || !j.contains("output") ||
        !j["instruction"].is_string() || !j["input"].is_string() ||
        !j["output"].is_string()) {
      report.violations.push_back(
          {line_no, "keys",
           "expected exactly string keys instruction/input/output"});
      continue;
    }

    const std::string instruction = j["instruction"].get<std::string>();
    const std::string input = j["input"].get<std::string>();
    const std::string output = j["output"].get<std::string>();

    if (!have_instruction) {
      first_instruction = instruction;
      have_instruction = true;
    } else if (instruction != first_instruction) {
      report.violations.push_back(
          {line_no, "instruction-uniformity",
           "instruction differs from the first example"});
    }

    try {
      analyze::parse_model_output(output);
    } catch (const UnparseableOutput& e) {
      report.violations.push_back({line_no, "output-grammar", e.what()});
    }

    const bool group_input = input.find('\n') != std::string::npos;
    if (group_input) {
      seen_group_input = true;
    } else {
      if (seen_group_input)
        report.violations.push_back(
            {line_no, "group-placement",
             "single-log example after a correlated-group example"});
      // Generated single logs must keep their first three columns
      // comma-free and csv-parseable.
      try {
        ingest::parse_csv_line(input);
      } catch (const FormatError& e) {
        report.violations.push_back({line_no, "comma-rule", e.what()});
      }
    }
  }

  if (report.example_count < min_count)
    report.violations.push_back(
        {0, "size", "dataset has " + std::to_string(report.example_count) +
                        " examples, need >= " + std::to_string(min_count)});
  return report;
}

TrainingConfig emit_training_config(const std::string& model_name,
                                    ModelClass model_class,
                                    int max_token_length) {
  std::string normalized;
  for (char c : model_name) {
    if (c == ' ' || c == '_') {
      normalized += '-';
    } else {
      normalized +=
          static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }

  TrainingConfig cfg;
  cfg.model_name = model_name;
  cfg.model_class = model_class;
  cfg.epochs = 3;
  cfg.method = "lora";
  cfg.max_token_length = max_token_length;
  if (normalized == "bloom-7b")
    cfg.batch_size = 2;
  else
    cfg.batch_size = model_class == ModelClass::slm ? 16 : 4;
  validate(cfg);
  return cfg;
}

}  // namespace loganvil::forge
