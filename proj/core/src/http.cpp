#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <chrono>
#include <cstdlib>

#include "json.hpp"
#include "undercover/chat.hpp"
#include "undercover/error.hpp"
#include "undercover/prover.hpp"
#include "undercover/service.hpp"
#include "undercover/similarity.hpp"

namespace undercover {
namespace {

using Json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint split_url(const std::string& url, ErrorCode code) {
  const auto scheme = url.find("://");
  const std::string proto = scheme == std::string::npos ? "" : url.substr(0, scheme);
  if (proto != "http" && proto != "https") {
    fail(code, "expected an http(s) URL, got '" + url + "'");
  }
  const auto slash = url.find('/', scheme + 3);
  Endpoint ep;
  ep.origin = url.substr(0, slash);
  if (slash != std::string::npos) ep.prefix = url.substr(slash);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  return ep;
}

httplib::Client make_client(const Endpoint& ep, double timeout_s) {
  httplib::Client cli(ep.origin);
  const auto t = std::chrono::duration<double>(timeout_s);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(t);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(t - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  return cli;
}

Json post_json(const std::string& url, const std::string& path, const Json& body, double timeout_s,
               ErrorCode code, const httplib::Headers& headers = {}, int* status_out = nullptr) {
  const Endpoint ep = split_url(url, code);
  httplib::Client cli = make_client(ep, timeout_s);
  auto res = cli.Post(ep.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    fail(code, "POST " + url + path + " failed: " + httplib::to_string(res.error()));
  }
  if (status_out) *status_out = res->status;
  if (res->status != 200 && !status_out) {
    fail(code, "POST " + url + path + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception&) {
    if (status_out && res->status != 200) return Json();
    fail(code, "POST " + url + path + " returned a non-JSON body");
  }
}

}  // namespace

HttpChatBackend::HttpChatBackend(ChatBackendRef ref, int timeout_seconds)
    : ref_(std::move(ref)), timeout_seconds_(timeout_seconds) {
  ref_.validate();
  if (ref_.base_url.empty()) fail(ErrorCode::InvalidConfig, "backend base_url is empty");
}

HttpProver::HttpProver(std::string base_url, double timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {}

ServiceEmbeddingProvider::ServiceEmbeddingProvider(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  const Json body = {{"model", request.model.empty() ? ref_.model : request.model},
                     {"temperature", request.temperature},
                     {"messages", messages}};
  httplib::Headers headers;
  if (!ref_.auth_env.empty()) {
    const char* key = std::getenv(ref_.auth_env.c_str());
    if (!key || !*key) {
      fail(ErrorCode::BackendUnavailable, "environment variable " + ref_.auth_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  constexpr int kAttempts = 3;
  std::string last_error;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << attempt));
    const Endpoint ep = split_url(ref_.base_url, ErrorCode::BackendUnavailable);
    httplib::Client cli = make_client(ep, timeout_seconds_);
    auto res = cli.Post(ep.prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      fail(ErrorCode::BackendUnavailable, "chat endpoint returned HTTP " +
                                              std::to_string(res->status) + ": " + res->body);
    }
    try {
      const Json reply = Json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      fail(ErrorCode::BackendUnavailable, std::string("malformed chat reply: ") + e.what());
    }
  }
  fail(ErrorCode::BackendUnavailable, "chat endpoint unavailable after retries: " + last_error);
}

ProverResponse HttpProver::check(const std::string& theory) {
  std::lock_guard lock(mu_);
  int status = 0;
  const Json reply = post_json(base_url_, "/prove", {{"theory", theory}, {"timeout_s", timeout_s_}},
                               timeout_s_ + 5.0, ErrorCode::ProverUnavailable, {}, &status);
  if (status == 504) {
    ProverResponse r;
    r.status = Verdict::Invalid;
    r.messages = {"prover timed out after " + std::to_string(timeout_s_) + " s"};
    if (reply.is_object() && reply.contains("messages")) {
      for (const auto& m : reply.at("messages")) {
        if (m.is_string()) r.messages.push_back(m.get<std::string>());
      }
    }
    return r;
  }
  if (status != 200) {
    fail(ErrorCode::ProverUnavailable, "prover returned HTTP " + std::to_string(status));
  }
  try {
    ProverResponse r;
    r.status = verdict_from_string(reply.at("status").get<std::string>());
    r.messages = reply.at("messages").get<std::vector<std::string>>();
    return r;
  } catch (const std::exception& e) {
    fail(ErrorCode::ProverUnavailable, std::string("malformed prover reply: ") + e.what());
  }
}

std::vector<EmbeddingVector> ServiceEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  const Json reply = post_json(base_url_, "/embed", {{"texts", texts}}, timeout_seconds_,
                               ErrorCode::ProviderUnavailable);
  std::vector<EmbeddingVector> vectors;
  int dim = 0;
  std::string model;
  try {
    vectors = reply.at("vectors").get<std::vector<EmbeddingVector>>();
    dim = reply.at("dim").get<int>();
    model = reply.at("model_id").get<std::string>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::ProviderUnavailable, std::string("malformed embed reply: ") + e.what());
  }
  if (vectors.size() != texts.size()) {
    fail(ErrorCode::ProviderUnavailable, "embed reply has " + std::to_string(vectors.size()) +
                                             " vectors for " + std::to_string(texts.size()) +
                                             " texts");
  }
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != dim) {
      fail(ErrorCode::ProviderUnavailable, "embed reply vector length differs from dim");
    }
  }
  std::unique_lock lock(mu_);
  dim_ = dim;
  model_id_ = model;
  return vectors;
}

int ServiceEmbeddingProvider::dim() const {
  {
    std::shared_lock lock(mu_);
    if (dim_ > 0) return dim_;
  }
  const_cast<ServiceEmbeddingProvider*>(this)->embed_batch({"health check"});
  std::shared_lock lock(mu_);
  return dim_;
}

std::string ServiceEmbeddingProvider::model_id() const {
  dim();
  std::shared_lock lock(mu_);
  return model_id_;
}

bool ServiceEmbeddingProvider::healthy() const {
  try {
    const Endpoint ep = split_url(base_url_, ErrorCode::ProviderUnavailable);
    httplib::Client cli = make_client(ep, timeout_seconds_);
    auto res = cli.Get(ep.prefix + "/health");
    return res && res->status == 200;
  } catch (const Error&) {
    return false;
  }
}

ServiceServer::ServiceServer(std::shared_ptr<EmbeddingProvider> provider,
                             std::shared_ptr<Prover> prover)
    : provider_(std::move(provider)),
      prover_(std::move(prover)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ServiceServer::~ServiceServer() { stop(); }

void ServiceServer::install_routes() {
  auto reply = [](httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };

  server_->Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"},
                     {"embedder", provider_ ? provider_->model_id() : ""},
                     {"prover", prover_ != nullptr}});
  });

  server_->Post("/embed", [this, reply](const httplib::Request& req, httplib::Response& res) {
    if (!provider_) return reply(res, 503, {{"error", "no embedding model loaded"}});
    std::vector<std::string> texts;
    try {
      texts = Json::parse(req.body).at("texts").get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      return reply(res, 400, {{"error", e.what()}});
    }
    if (texts.empty()) return reply(res, 400, {{"error", "texts must not be empty"}});
    try {
      auto vectors = provider_->embed_batch(texts);
      for (auto& v : vectors) v = normalized(std::move(v));
      reply(res, 200, {{"vectors", vectors}, {"dim", provider_->dim()},
                       {"model_id", provider_->model_id()}});
    } catch (const Error& e) {
      reply(res, 503, {{"error", e.what()}});
    }
  });

  server_->Post("/prove", [this, reply](const httplib::Request& req, httplib::Response& res) {
    if (!prover_) return reply(res, 503, {{"error", "no prover session"}});
    std::string theory;
    try {
      theory = Json::parse(req.body).at("theory").get<std::string>();
    } catch (const Json::exception& e) {
      return reply(res, 400, {{"error", e.what()}});
    }
    try {
      const ProverResponse r = prover_->check(theory);
      reply(res, 200, {{"status", std::string(to_string(r.status))}, {"messages", r.messages}});
    } catch (const Error& e) {
      reply(res, 503, {{"error", e.what()}});
    }
  });
}

int ServiceServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void ServiceServer::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    fail(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ServiceServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ServiceServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace undercover
