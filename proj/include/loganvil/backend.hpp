#ifndef LOGANVIL_BACKEND_HPP
#define LOGANVIL_BACKEND_HPP

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "loganvil/core.hpp"

namespace loganvil::backend {

struct ChatRequest {
  std::string system_prompt;
  std::string user_content;
  std::optional<std::string> prior_response;
  int max_new_tokens = 1024;
  double temperature = 0.0;
};

void validate(const ChatRequest& r);

struct ChatResponse {
  std::string text;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int latency_ms = 0;
};

struct BackendConfig {
  std::string endpoint_url;
  std::string model_id;
  int timeout_seconds = 120;
  int max_retries = 3;
  int max_in_flight = 4;
};

void validate(const BackendConfig& c);

class Backend {
 public:
  virtual ~Backend() = default;

  /// Thread-safe. When prior_response is present it is embedded in the
  /// transmitted conversation as an assistant turn before user_content.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Deterministic backend: responses come from a substring -> text map.
/// The lexicographically smallest key contained in user_content wins;
/// unmatched requests get the default text.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::map<std::string, std::string> fixture,
                       std::string default_text = "No problem identified.");

  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::map<std::string, std::string> fixture_;
  std::string default_text_;
};

/// Loads a MockBackend from a JSON object file mapping substrings to
/// response texts.
std::unique_ptr<MockBackend> mock_from_fixture(const std::string& path);

/// Generic chat-completion HTTP backend. POSTs an OpenAI-style JSON body
/// and reads choices[0].message.content back. Bearer token, when needed,
/// comes from the LOGANVIL_API_KEY environment variable.
class HttpBackend : public Backend {
 public:
  struct TransportReply {
    int status = 0;
    std::string body;
  };
  // Returns the HTTP reply or throws TransportError/TimeoutError.
  using Transport = std::function<TransportReply(const std::string& body)>;
  using Sleeper = std::function<void(int seconds)>;

  explicit HttpBackend(BackendConfig config, Transport transport = {},
                       Sleeper sleeper = {});

  ChatResponse complete(const ChatRequest& request) override;

  /// The exact wire body sent for a request (stable key order).
  static std::string wire_body(const ChatRequest& request,
                               const std::string& model_id);

 private:
  BackendConfig config_;
  Transport transport_;
  Sleeper sleeper_;

  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  int in_flight_ = 0;
};

}  // namespace loganvil::backend

#endif
