#include "loganvil/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace loganvil::backend {
namespace {

int count_tokens(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int n = 0;
  while (in >> word) ++n;
  return n;
}

HttpBackend::TransportReply default_transport(const BackendConfig& cfg,
                                              const std::string& body) {
  // Split endpoint_url into host part and path.
  std::string url = cfg.endpoint_url;
  std::string scheme_host = url;
  std::string path = "/";
  size_t scheme = url.find("://");
  size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    scheme_host = url.substr(0, slash);
    path = url.substr(slash);
  }

  httplib::Client client(scheme_host);
  client.set_connection_timeout(cfg.timeout_seconds, 0);
  client.set_read_timeout(cfg.timeout_seconds, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv("LOGANVIL_API_KEY"))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    if (res.error() == httplib::Error::ConnectionTimeout ||
        res.error() == httplib::Error::Read)
      throw TimeoutError("request to " + url + " timed out");
    throw TransportError("request to " + url + " failed: " +
                         httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace

void validate(const ChatRequest& r) {
  if (r.user_content.empty()) throw FormatError("user_content must be non-empty");
  if (r.max_new_tokens < 1) throw FormatError("max_new_tokens must be positive");
  if (r.temperature < 0.0 || r.temperature > 2.0)
    throw FormatError("temperature must be within [0, 2]");
}

void validate(const BackendConfig& c) {
  if (c.timeout_seconds < 1) throw FormatError("timeout_seconds must be positive");
  if (c.max_retries < 0) throw FormatError("max_retries must be >= 0");
  if (c.max_in_flight < 1) throw FormatError("max_in_flight must be >= 1");
}

MockBackend::MockBackend(std::map<std::string, std::string> fixture,
                         std::string default_text)
    : fixture_(std::move(fixture)), default_text_(std::move(default_text)) {}

ChatResponse MockBackend::complete(const ChatRequest& request) {
  validate(request);
  const std::string* text = &default_text_;
  for (const auto& [key, value] : fixture_) {  // map is key-ordered
    if (request.user_content.find(key) != std::string::npos) {
      text = &value;
      break;
    }
  }
  ChatResponse resp;
  resp.text = *text;
  resp.prompt_tokens =
      count_tokens(request.system_prompt) + count_tokens(request.user_content);
  resp.completion_tokens = count_tokens(resp.text);
  resp.latency_ms = 0;
  return resp;
}

std::unique_ptr<MockBackend> mock_from_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (!doc.is_object())
    throw FormatError(path + ": fixture must be a JSON object");
  std::map<std::string, std::string> fixture;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string())
      throw FormatError(path + ": fixture values must be strings");
    fixture[key] = value.get<std::string>();
  }
  return std::make_unique<MockBackend>(std::move(fixture));
}

HttpBackend::HttpBackend(BackendConfig config, Transport transport,
                         Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
  validate(config_);
  if (!transport_)
    transport_ = [this](const std::string& body) {
      return default_transport(config_, body);
    };
  if (!sleeper_)
    sleeper_ = [](int seconds) {
      std::this_thread::sleep_for(std::chrono::seconds(seconds));
    };
}

std::string HttpBackend::wire_body(const ChatRequest& request,
                                   const std::string& model_id) {
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  if (request.prior_response)
    messages.push_back(
        {{"role", "assistant"}, {"content", *request.prior_response}});
  messages.push_back({{"role", "user"}, {"content", request.user_content}});

  nlohmann::ordered_json body;
  body["model"] = model_id;
  body["messages"] = messages;
  body["max_tokens"] = request.max_new_tokens;
  body["temperature"] = request.temperature;
  return body.dump();
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  validate(request);

  {
    std::unique_lock lock(gate_mutex_);
    gate_cv_.wait(lock, [this] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    HttpBackend* self;
    ~Release() {
      {
        std::lock_guard lock(self->gate_mutex_);
        --self->in_flight_;
      }
      self->gate_cv_.notify_one();
    }
  } release{this};

  const std::string body = wire_body(request, config_.model_id);
  const auto start = std::chrono::steady_clock::now();

  int attempt = 0;
  int backoff = 1;  // 1 s, 2 s, 4 s, ...
  while (true) {
    try {
      TransportReply reply = transport_(body);
      if (reply.status >= 500)
        throw TransportError("endpoint returned HTTP " +
                             std::to_string(reply.status));
      if (reply.status != 200)
        throw ProtocolError("endpoint returned HTTP " +
                            std::to_string(reply.status));

      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(reply.body);
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed endpoint reply: ") +
                            e.what());
      }
      ChatResponse resp;
      try {
        resp.text = doc.at("choices").at(0).at("message").at("content")
                        .get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("reply missing choices[0].message.content");
      }
      if (doc.contains("usage")) {
        resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
        resp.completion_tokens = doc["usage"].value("completion_tokens", 0);
      }
      resp.latency_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::steady_clock::now() - start)
              .count());
      return resp;
    } catch (const TransportError&) {
      if (attempt >= config_.max_retries) throw;
      sleeper_(backoff);
      backoff *= 2;
      ++attempt;
    }
  }
}

}  // namespace loganvil::backend
