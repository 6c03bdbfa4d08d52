#pragma once

// Chat-completion access behind one interface: an OpenAI-compatible remote
// endpoint, a scripted mock, or a replay cache. Responses from live
// backends are cached by request digest so any run can be replayed.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmad {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::string tag;  // transcript label; not part of the digest

  /// Throws InvalidInput on empty messages/content or a bad max_tokens.
  void validate() const;
};

enum class ResponseSource { remote, mock, cache };

std::string_view to_string(ResponseSource s);

struct ChatResponse {
  std::string content;
  ResponseSource backend = ResponseSource::mock;
  std::int64_t latency_ms = 0;
  std::string request_digest;
};

enum class BackendKind { remote, mock, replay };

std::string_view to_string(BackendKind k);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string api_base;     // required for remote, e.g. https://api.openai.com/v1
  std::string api_key_env;  // name of the variable holding the key
  std::optional<std::filesystem::path> cache_dir;
  int max_retries = 3;
  int backoff_base_ms = 500;
  int max_in_flight = 4;
  int timeout_s = 120;

  void validate() const;
};

/// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::string_view data);

/// Hex SHA-256 over the canonical JSON of (model_id, messages, temperature,
/// max_tokens). The tag is excluded.
std::string request_digest(const ChatRequest& req);

/// Scripted responses for the mock backend. Lookup order: digest entries
/// (reusable), then the per-tag queue, then the global ordered queue.
/// Queue entries are consumed.
class MockScript {
 public:
  MockScript() = default;
  MockScript(const MockScript& other);
  MockScript& operator=(const MockScript& other);

  void add_for_digest(std::string digest, std::string response);
  void add_for_tag(std::string tag, std::string response);
  void add_ordered(std::string response);

  /// JSON lines, each {"response": ...} plus optionally "digest" or "tag".
  static MockScript load_jsonl(const std::filesystem::path& path);

  /// Throws ScriptMissError when nothing matches.
  std::string next(const ChatRequest& req, const std::string& digest);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_digest_;
  std::map<std::string, std::deque<std::string>> by_tag_;
  std::deque<std::string> ordered_;
};

class Gateway {
 public:
  struct Stats {
    std::int64_t calls = 0;
    std::int64_t cache_hits = 0;
    std::int64_t remote_calls = 0;
    std::int64_t mock_calls = 0;
    std::int64_t retries = 0;
    int peak_in_flight = 0;
  };

  explicit Gateway(BackendConfig cfg, MockScript script = {});

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Safe to call concurrently; at most max_in_flight backend requests run
  /// at once.
  ChatResponse complete(const ChatRequest& req);

  Stats stats() const;
  const BackendConfig& config() const { return cfg_; }

 private:
  std::optional<std::string> cache_lookup(const std::string& digest);
  void cache_store(const ChatRequest& req, const std::string& digest, const std::string& content);
  std::string call_remote(const ChatRequest& req);

  BackendConfig cfg_;
  MockScript script_;

  mutable std::mutex cache_mu_;
  std::map<std::string, std::string> memory_cache_;

  mutable std::mutex stats_mu_;
  Stats stats_;

  std::mutex slot_mu_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;
};

/// Identity of one agent call. The rendered tag is what mock scripts key on.
struct CallTag {
  std::string unit;       // UnitKey::str()
  std::string stage;      // stage1, stage2, stage3, gemba, eaprompt
  std::string dimension;  // empty when not per-dimension
  int round = 0;
  std::string speaker;    // annotator, pro, con, checker, reviewer, judge, repair

  std::string str() const;
};

struct CallRecord {
  CallTag tag;
  std::string request_digest;
  std::vector<ChatMessage> messages;
  std::string response_content;
  ResponseSource source = ResponseSource::mock;
};

struct RequestDefaults {
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  std::optional<int> max_tokens;
};

/// Per-unit call helper: stamps defaults onto requests and records every
/// call for the transcript. Not thread-safe; one per worker.
class AgentSession {
 public:
  AgentSession(Gateway& gateway, RequestDefaults defaults, std::string unit_tag);

  std::string ask(std::vector<ChatMessage> messages, CallTag tag);

  const std::vector<CallRecord>& records() const { return records_; }
  std::vector<CallRecord> take_records() { return std::exchange(records_, {}); }
  const std::string& unit_tag() const { return unit_tag_; }

  /// Non-fatal problems (parse degradations, validation warnings).
  std::vector<std::string>& warnings() { return warnings_; }
  /// Degradations that the run reports as errors (e.g. stage fallbacks).
  std::vector<std::string>& errors() { return errors_; }

 private:
  Gateway& gateway_;
  RequestDefaults defaults_;
  std::string unit_tag_;
  std::vector<CallRecord> records_;
  std::vector<std::string> warnings_;
  std::vector<std::string> errors_;
};

}  // namespace mmad
