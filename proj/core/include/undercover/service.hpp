#pragma once

#include <memory>
#include <string>
#include <thread>

#include "undercover/prover.hpp"
#include "undercover/similarity.hpp"

namespace httplib {
class Server;
}

namespace undercover {

// In-process server speaking the sidecar protocol: POST /embed, POST /prove,
// GET /health. Backed by whatever provider and prover it is given.
class ServiceServer {
 public:
  ServiceServer(std::shared_ptr<EmbeddingProvider> provider, std::shared_ptr<Prover> prover);
  ~ServiceServer();
  ServiceServer(const ServiceServer&) = delete;
  ServiceServer& operator=(const ServiceServer&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop() is called from elsewhere.
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }
  std::string url() const;

 private:
  void install_routes();

  std::shared_ptr<EmbeddingProvider> provider_;
  std::shared_ptr<Prover> prover_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

}  // namespace undercover
