#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pivotmodel/engine.hpp"

namespace httplib {
class Server;
}

namespace pivotmodel {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_dir;  // empty = in-memory only
  std::size_t max_body_bytes = 64u << 20;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::map<std::string, std::string>;

// In-memory model registry behind the HTTP API. Requests against one model
// share its lock: reads run concurrently, mutations are exclusive and bump the
// model version. Requests against different models never block each other.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Reloads every model persisted under the model directory (model.json,
  // data.csv, overrides.csv) and recalculates it. Returns the number loaded.
  std::size_t load_persisted();

  // Routes one request. `path` excludes the query string.
  ApiResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                     std::string_view body);

  // Installs the routes on a server; used by serve() and by tests that bind
  // their own port.
  void install(httplib::Server& server);

  // Blocks until stop() is called. Returns false when the address cannot be bound.
  bool serve();
  void stop();

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Entry {
    std::shared_mutex mutex;
    std::unique_ptr<Model> model;
    std::uint64_t version = 1;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::string add_model(std::string id, std::unique_ptr<Model> model);
  void persist(const std::string& id, const Entry& entry, bool structure_changed) const;

  ApiResponse route(std::string_view method, const std::vector<std::string>& parts, const QueryParams& query,
                    std::string_view body);

  ServiceConfig config_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> models_;
  std::uint64_t next_id_ = 1;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace pivotmodel
