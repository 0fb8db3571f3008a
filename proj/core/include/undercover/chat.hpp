#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace undercover {

enum class ChatRole { System, User, Assistant };
std::string_view to_string(ChatRole role);

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// Where a live agent's model lives. Decoding is greedy: temperature is
// pinned to zero and validate() rejects anything else.
struct ChatBackendRef {
  std::string base_url;
  std::string model;
  std::string auth_env;  // name of the env var holding the API key
  double temperature = 0.0;

  void validate() const;
};

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::vector<ChatMessage> messages;
};

// Stable digest of the request content; keys the scripted backend.
std::string request_hash(const ChatRequest& request);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the assistant reply. Throws Error(BackendUnavailable).
  virtual std::string complete(const ChatRequest& request) = 0;
};

// OpenAI-compatible chat-completions client (POST {base_url}/chat/completions).
// Safe for concurrent calls: every call opens its own connection.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(ChatBackendRef ref, int timeout_seconds = 120);
  std::string complete(const ChatRequest& request) override;

 private:
  ChatBackendRef ref_;
  int timeout_seconds_;
};

// Canned replies keyed by request_hash(). Backed by a JSON file of the form
// {"entries": [{"hash": "...", "reply": "..."}]}.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend() = default;
  static std::shared_ptr<ScriptedBackend> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add(const ChatRequest& request, std::string reply);
  void add_hash(std::string hash, std::string reply);
  std::size_t size() const;
  std::string complete(const ChatRequest& request) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> replies_;
};

// Replies in order; throws BackendUnavailable once exhausted.
class SequenceBackend final : public ChatBackend {
 public:
  explicit SequenceBackend(std::vector<std::string> replies);
  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

class FunctionBackend final : public ChatBackend {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const ChatRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

// Wraps a backend and keeps every exchange; used for prompt-capture checks
// and for recording scripted fixtures.
class RecordingBackend final : public ChatBackend {
 public:
  struct Exchange {
    ChatRequest request;
    std::string reply;
  };

  explicit RecordingBackend(std::shared_ptr<ChatBackend> inner);
  std::string complete(const ChatRequest& request) override;
  std::vector<Exchange> exchanges() const;
  std::shared_ptr<ScriptedBackend> to_scripted() const;

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mu_;
  std::vector<Exchange> exchanges_;
};

// A backend plus the model name to put in requests.
struct LlmHandle {
  std::shared_ptr<ChatBackend> backend;
  std::string model;

  std::string complete(std::vector<ChatMessage> messages) const;
};

}  // namespace undercover
