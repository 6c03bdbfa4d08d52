#include "mmad/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mmad/error.hpp"

namespace mmad {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "system") return Role::system;
  if (text == "user") return Role::user;
  if (text == "assistant") return Role::assistant;
  return std::nullopt;
}

std::string_view to_string(ResponseSource s) {
  switch (s) {
    case ResponseSource::remote: return "remote";
    case ResponseSource::mock: return "mock";
    case ResponseSource::cache: return "cache";
  }
  return "mock";
}

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::remote: return "remote";
    case BackendKind::mock: return "mock";
    case BackendKind::replay: return "replay";
  }
  return "mock";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "remote") return BackendKind::remote;
  if (text == "mock") return BackendKind::mock;
  if (text == "replay") return BackendKind::replay;
  return std::nullopt;
}

void ChatRequest::validate() const {
  if (model_id.empty()) throw InvalidInput("chat request without model id");
  if (messages.empty()) throw InvalidInput("chat request without messages");
  for (const auto& m : messages) {
    if (m.content.empty()) throw InvalidInput("chat message with empty content (tag " + tag + ")");
  }
  if (max_tokens && *max_tokens <= 0) throw InvalidInput("max_tokens must be positive");
}

void BackendConfig::validate() const {
  if (kind == BackendKind::remote && api_base.empty()) throw InvalidInput("remote backend requires api_base");
  if (kind == BackendKind::replay && !cache_dir) throw InvalidInput("replay backend requires cache_dir");
  if (max_retries < 0) throw InvalidInput("max_retries must be >= 0");
  if (backoff_base_ms < 0) throw InvalidInput("backoff_base_ms must be >= 0");
  if (max_in_flight < 1) throw InvalidInput("max_in_flight must be positive");
}

namespace {

ordered_json canonical_request(const ChatRequest& req) {
  ordered_json j;
  j["model"] = req.model_id;
  ordered_json msgs = ordered_json::array();
  for (const auto& m : req.messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  j["messages"] = std::move(msgs);
  j["temperature"] = req.temperature;
  if (req.max_tokens) {
    j["max_tokens"] = *req.max_tokens;
  } else {
    j["max_tokens"] = nullptr;
  }
  return j;
}

struct EndpointParts {
  std::string scheme_host_port;
  std::string path_prefix;
};

EndpointParts split_api_base(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw InvalidInput("api_base needs a scheme: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  EndpointParts parts;
  if (path_start == std::string::npos) {
    parts.scheme_host_port = base;
  } else {
    parts.scheme_host_port = base.substr(0, path_start);
    parts.path_prefix = base.substr(path_start);
  }
  while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/') parts.path_prefix.pop_back();
  return parts;
}

bool is_transient(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string request_digest(const ChatRequest& req) { return sha256_hex(canonical_request(req).dump()); }

MockScript::MockScript(const MockScript& other) {
  std::lock_guard lock(other.mu_);
  by_digest_ = other.by_digest_;
  by_tag_ = other.by_tag_;
  ordered_ = other.ordered_;
}

MockScript& MockScript::operator=(const MockScript& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  by_digest_ = other.by_digest_;
  by_tag_ = other.by_tag_;
  ordered_ = other.ordered_;
  return *this;
}

void MockScript::add_for_digest(std::string digest, std::string response) {
  std::lock_guard lock(mu_);
  by_digest_[std::move(digest)] = std::move(response);
}

void MockScript::add_for_tag(std::string tag, std::string response) {
  std::lock_guard lock(mu_);
  by_tag_[std::move(tag)].push_back(std::move(response));
}

void MockScript::add_ordered(std::string response) {
  std::lock_guard lock(mu_);
  ordered_.push_back(std::move(response));
}

MockScript MockScript::load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script " + path.string());
  MockScript script;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("mock script " + path.string() + ": " + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("response") || !j["response"].is_string()) {
      throw IoError("mock script " + path.string() + ": entry needs a string \"response\"", lineno);
    }
    std::string response = j["response"].get<std::string>();
    if (j.contains("digest")) {
      script.add_for_digest(j["digest"].get<std::string>(), std::move(response));
    } else if (j.contains("tag")) {
      script.add_for_tag(j["tag"].get<std::string>(), std::move(response));
    } else {
      script.add_ordered(std::move(response));
    }
  }
  return script;
}

std::string MockScript::next(const ChatRequest& req, const std::string& digest) {
  std::lock_guard lock(mu_);
  if (auto it = by_digest_.find(digest); it != by_digest_.end()) return it->second;
  if (auto it = by_tag_.find(req.tag); it != by_tag_.end()) {
    if (it->second.empty()) throw ScriptMissError("mock script exhausted for tag " + req.tag);
    std::string out = std::move(it->second.front());
    it->second.pop_front();
    return out;
  }
  if (!ordered_.empty()) {
    std::string out = std::move(ordered_.front());
    ordered_.pop_front();
    return out;
  }
  throw ScriptMissError("mock script has no response for tag " + req.tag + " (digest " + digest + ")");
}

Gateway::Gateway(BackendConfig cfg, MockScript script) : cfg_(std::move(cfg)), script_(std::move(script)) {
  cfg_.validate();
  if (cfg_.cache_dir) std::filesystem::create_directories(*cfg_.cache_dir);
}

Gateway::Stats Gateway::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

std::optional<std::string> Gateway::cache_lookup(const std::string& digest) {
  std::lock_guard lock(cache_mu_);
  if (auto it = memory_cache_.find(digest); it != memory_cache_.end()) return it->second;
  if (!cfg_.cache_dir) return std::nullopt;
  const auto file = *cfg_.cache_dir / (digest + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.contains("response") || !j["response"].contains("content")) return std::nullopt;
  std::string content = j["response"]["content"].get<std::string>();
  memory_cache_[digest] = content;
  return content;
}

void Gateway::cache_store(const ChatRequest& req, const std::string& digest, const std::string& content) {
  std::lock_guard lock(cache_mu_);
  memory_cache_[digest] = content;
  if (!cfg_.cache_dir) return;
  ordered_json entry;
  entry["digest"] = digest;
  entry["request"] = canonical_request(req);
  entry["response"] = {{"content", content}};
  const auto final_path = *cfg_.cache_dir / (digest + ".json");
  auto tmp_path = final_path;
  tmp_path += ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp_path.string());
    out << entry.dump(2) << '\n';
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::string Gateway::call_remote(const ChatRequest& req) {
  std::string api_key;
  if (!cfg_.api_key_env.empty()) {
    const char* v = std::getenv(cfg_.api_key_env.c_str());
    if (!v || !*v) throw InvalidInput("environment variable " + cfg_.api_key_env + " is not set");
    api_key = v;
  }
  const EndpointParts ep = split_api_base(cfg_.api_base);

  ordered_json body;
  body["model"] = req.model_id;
  body["messages"] = canonical_request(req)["messages"];
  body["temperature"] = req.temperature;
  if (req.max_tokens) body["max_tokens"] = *req.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  int last_status = -1;
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      {
        std::lock_guard lock(stats_mu_);
        ++stats_.retries;
      }
      const auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(cfg_.backoff_base_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(ep.scheme_host_port);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    client.set_write_timeout(cfg_.timeout_s, 0);
    auto res = client.Post(ep.path_prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_status = -1;
      last_error = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status == 200) {
      try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat-completion response: ") + e.what(), res->status);
      }
    }
    if (!is_transient(res->status)) {
      throw TransportError("chat-completion request rejected with status " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 500),
                           res->status);
    }
    last_error = "status " + std::to_string(res->status);
  }
  throw TransportError("retries exhausted after " + std::to_string(cfg_.max_retries + 1) +
                           " attempts; last error: " + last_error,
                       last_status);
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  req.validate();
  const auto started = std::chrono::steady_clock::now();
  ChatResponse resp;
  resp.request_digest = request_digest(req);
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.calls;
  }
  const auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  };

  if (auto hit = cache_lookup(resp.request_digest)) {
    std::lock_guard lock(stats_mu_);
    ++stats_.cache_hits;
    resp.content = std::move(*hit);
    resp.backend = ResponseSource::cache;
    resp.latency_ms = elapsed_ms();
    return resp;
  }
  if (cfg_.kind == BackendKind::replay) throw CacheMissError(resp.request_digest);

  {
    std::unique_lock lock(slot_mu_);
    slot_cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
    ++in_flight_;
    std::lock_guard slock(stats_mu_);
    stats_.peak_in_flight = std::max(stats_.peak_in_flight, in_flight_);
  }
  struct SlotRelease {
    Gateway* g;
    ~SlotRelease() {
      {
        std::lock_guard lock(g->slot_mu_);
        --g->in_flight_;
      }
      g->slot_cv_.notify_one();
    }
  } release{this};

  if (cfg_.kind == BackendKind::remote) {
    resp.content = call_remote(req);
    resp.backend = ResponseSource::remote;
    std::lock_guard lock(stats_mu_);
    ++stats_.remote_calls;
  } else {
    resp.content = script_.next(req, resp.request_digest);
    resp.backend = ResponseSource::mock;
    std::lock_guard lock(stats_mu_);
    ++stats_.mock_calls;
  }
  cache_store(req, resp.request_digest, resp.content);
  resp.latency_ms = elapsed_ms();
  return resp;
}

std::string CallTag::str() const {
  return unit + "|" + stage + "|" + dimension + "|" + std::to_string(round) + "|" + speaker;
}

AgentSession::AgentSession(Gateway& gateway, RequestDefaults defaults, std::string unit_tag)
    : gateway_(gateway), defaults_(std::move(defaults)), unit_tag_(std::move(unit_tag)) {}

std::string AgentSession::ask(std::vector<ChatMessage> messages, CallTag tag) {
  tag.unit = unit_tag_;
  ChatRequest req;
  req.model_id = defaults_.model_id;
  req.temperature = defaults_.temperature;
  req.max_tokens = defaults_.max_tokens;
  req.messages = std::move(messages);
  req.tag = tag.str();
  ChatResponse resp = gateway_.complete(req);
  records_.push_back(CallRecord{std::move(tag), resp.request_digest, std::move(req.messages), resp.content, resp.backend});
  return resp.content;
}

}  // namespace mmad
