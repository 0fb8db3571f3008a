#include "undercover/chat.hpp"

#include <fstream>

#include "undercover/error.hpp"
#include "undercover/hash.hpp"
#include "undercover/serialize.hpp"

namespace undercover {

std::string_view to_string(ChatRole role) {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

void ChatBackendRef::validate() const {
  if (temperature != 0.0) {
    fail(ErrorCode::InvalidConfig,
         "chat backends decode greedily; temperature must be 0");
  }
  if (model.empty()) fail(ErrorCode::InvalidConfig, "chat backend has no model");
}

std::string request_hash(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  const Json j = {{"model", request.model}, {"messages", std::move(messages)}};
  return digest_hex(canonical(j));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open scripted backend file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  auto backend = std::make_shared<ScriptedBackend>();
  for (const auto& e : j.at("entries")) {
    backend->add_hash(e.at("hash").get<std::string>(), e.at("reply").get<std::string>());
  }
  return backend;
}

void ScriptedBackend::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  Json entries = Json::array();
  for (const auto& [hash, reply] : replies_) {
    entries.push_back({{"hash", hash}, {"reply", reply}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << Json{{"entries", entries}}.dump(2) << "\n";
}

void ScriptedBackend::add(const ChatRequest& request, std::string reply) {
  add_hash(request_hash(request), std::move(reply));
}

void ScriptedBackend::add_hash(std::string hash, std::string reply) {
  std::lock_guard lock(mu_);
  replies_[std::move(hash)] = std::move(reply);
}

std::size_t ScriptedBackend::size() const {
  std::lock_guard lock(mu_);
  return replies_.size();
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  const std::string key = request_hash(request);
  std::lock_guard lock(mu_);
  auto it = replies_.find(key);
  if (it == replies_.end()) {
    fail(ErrorCode::BackendUnavailable, "no scripted reply for request " + key);
  }
  return it->second;
}

SequenceBackend::SequenceBackend(std::vector<std::string> replies)
    : replies_(std::move(replies)) {}

std::string SequenceBackend::complete(const ChatRequest&) {
  std::lock_guard lock(mu_);
  if (next_ >= replies_.size()) {
    fail(ErrorCode::BackendUnavailable, "sequence backend exhausted after " +
                                            std::to_string(replies_.size()) +
                                            " replies");
  }
  return replies_[next_++];
}

std::size_t SequenceBackend::calls() const {
  std::lock_guard lock(mu_);
  return next_;
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner)
    : inner_(std::move(inner)) {}

std::string RecordingBackend::complete(const ChatRequest& request) {
  std::string reply = inner_->complete(request);
  std::lock_guard lock(mu_);
  exchanges_.push_back(Exchange{request, reply});
  return reply;
}

std::vector<RecordingBackend::Exchange> RecordingBackend::exchanges() const {
  std::lock_guard lock(mu_);
  return exchanges_;
}

std::shared_ptr<ScriptedBackend> RecordingBackend::to_scripted() const {
  auto out = std::make_shared<ScriptedBackend>();
  for (const auto& e : exchanges()) out->add(e.request, e.reply);
  return out;
}

std::string LlmHandle::complete(std::vector<ChatMessage> messages) const {
  if (!backend) fail(ErrorCode::BackendUnavailable, "no chat backend configured");
  ChatRequest request;
  request.model = model;
  request.temperature = 0.0;
  request.messages = std::move(messages);
  return backend->complete(request);
}

}  // namespace undercover
