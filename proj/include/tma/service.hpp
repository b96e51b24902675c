// HTTP/JSON service over one workspace: documents, session, the prove and
// compute workflows, proof jobs with event streams, and preferences.
#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "json.hpp"
#include "tma/i18n.hpp"
#include "tma/presenter.hpp"
#include "tma/session.hpp"

namespace httplib {
class Server;
}

namespace tma {

struct ServiceOptions {
  std::string lang_dir = default_lang_dir();
  std::string language = "en";
};

/// Entry as the service and the CLI print it.
nlohmann::json entry_to_json(const FormulaEntry& e);
nlohmann::json compute_to_json(const ComputeResult& r);

class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Registers every route under /api/v1.
  void install(httplib::Server& server);

  /// Direct access for embedding; callers must hold lock().
  Session& session();
  std::unique_lock<std::mutex> lock();

  /// Blocks until every running proof job has finished.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "host:port" (port alone binds 127.0.0.1). Throws std::invalid_argument.
std::pair<std::string, int> parse_address(const std::string& address);

/// Serves until the server is stopped. `on_ready` receives the bound port.
void serve(const std::string& address, ServiceOptions options, const std::function<void(int)>& on_ready = {});

}  // namespace tma
