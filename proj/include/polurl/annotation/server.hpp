#pragma once

#include <map>
#include <memory>
#include <string>

#include "polurl/annotation/store.hpp"

namespace httplib {
class Server;
}

namespace polurl::annotation {

inline constexpr int kSchemaVersion = 1;

// JSON API over an AnnotationStore:
//   GET  /api/next?coder=<id>   next unlabeled item, blinded
//   POST /api/decision          {item_id, coder_id, label}
//   GET  /api/disagreements     adjudication queue with both primary labels
//   POST /api/adjudication      {item_id, adjudicator_id, label}
//   GET  /api/progress          counts per status
//   GET  /api/intercoder        IntercoderStats
// Errors map to 400 (invalid), 403 (forbidden), 404 (not found), 409 (conflict).
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, std::map<std::string, BlindedPayload> payloads,
                   std::string static_dir = {});
  ~AnnotationServer();

  // Binds to an ephemeral port on `host`; returns the port.
  int bind_any(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  AnnotationStore& store_;
  std::map<std::string, BlindedPayload> payloads_;
  std::string static_dir_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace polurl::annotation
