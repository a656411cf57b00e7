#include "polurl/annotation/server.hpp"

#include <httplib.h>

namespace polurl::annotation {

namespace {

void send_json(httplib::Response& res, int status, nlohmann::json body) {
  body["schema_version"] = kSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

int status_for(AnnotationError::Kind k) {
  switch (k) {
    case AnnotationError::Kind::conflict: return 409;
    case AnnotationError::Kind::not_found: return 404;
    case AnnotationError::Kind::forbidden: return 403;
    case AnnotationError::Kind::invalid: return 400;
  }
  return 500;
}

std::string required_string(const nlohmann::json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string())
    throw AnnotationError(AnnotationError::Kind::invalid,
                          std::string("field \"") + key + "\" must be a string");
  return body.at(key).get<std::string>();
}

Label required_label(const nlohmann::json& body) {
  const auto l = parse_label(required_string(body, "label"));
  if (!l) throw AnnotationError(AnnotationError::Kind::invalid, "label must be POL or NON");
  return *l;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const AnnotationError& e) {
      send_error(res, status_for(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, std::string("bad request body: ") + e.what());
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  auto body = nlohmann::json::parse(req.body);
  if (!body.is_object())
    throw AnnotationError(AnnotationError::Kind::invalid, "request body must be a JSON object");
  return body;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store,
                                   std::map<std::string, BlindedPayload> payloads,
                                   std::string static_dir)
    : store_(store),
      payloads_(std::move(payloads)),
      static_dir_(std::move(static_dir)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
  auto& s = *server_;
  if (!static_dir_.empty()) s.set_mount_point("/", static_dir_);

  s.Get("/api/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string coder = req.get_param_value("coder");
    if (coder.empty()) throw AnnotationError(AnnotationError::Kind::invalid, "missing ?coder=");
    const auto next = store_.next_item(coder);
    nlohmann::json body = {{"coder_id", coder}, {"item", nullptr}};
    if (next) {
      const auto it = payloads_.find(*next);
      const BlindedPayload p = it == payloads_.end() ? BlindedPayload{"text", ""} : it->second;
      body["item"] = {{"item_id", *next}, {"kind", p.kind}, {"text", p.text}};
    }
    const auto progress = store_.progress();
    body["done"] = progress.decisions_by_coder.count(coder) ? progress.decisions_by_coder.at(coder) : 0;
    body["total"] = progress.pending + progress.agreed + progress.adjudicated;
    send_json(res, 200, body);
  }));

  s.Post("/api/decision", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    CoderDecision d;
    d.item_id = required_string(body, "item_id");
    d.coder_id = required_string(body, "coder_id");
    d.label = required_label(body);
    d.decided_at = utc_now();
    const auto g = store_.record_decision(d);
    // The other coder's label is not echoed back during primary coding.
    send_json(res, 200, {{"item_id", g.item_id}, {"recorded", true}});
  }));

  s.Get("/api/disagreements", guarded([this](const httplib::Request&, httplib::Response& res) {
    auto items = nlohmann::json::array();
    for (const auto& g : store_.disagreements()) {
      const auto it = payloads_.find(g.item_id);
      nlohmann::json row = to_json(g);
      if (it != payloads_.end()) row["payload"] = {{"kind", it->second.kind}, {"text", it->second.text}};
      items.push_back(std::move(row));
    }
    send_json(res, 200, {{"items", items}, {"count", items.size()}});
  }));

  s.Post("/api/adjudication", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto g = store_.adjudicate(required_string(body, "item_id"),
                                     required_string(body, "adjudicator_id"), required_label(body));
    send_json(res, 200, {{"gold", to_json(g)}});
  }));

  s.Get("/api/progress", guarded([this](const httplib::Request&, httplib::Response& res) {
    const auto p = store_.progress();
    send_json(res, 200,
              {{"pending", p.pending},
               {"agreed", p.agreed},
               {"adjudicated", p.adjudicated},
               {"disagreements", p.disagreements},
               {"total", p.pending + p.agreed + p.adjudicated},
               {"decisions_by_coder", p.decisions_by_coder}});
  }));

  s.Get("/api/intercoder", guarded([this](const httplib::Request&, httplib::Response& res) {
    try {
      send_json(res, 200, to_json(intercoder_agreement(store_.gold_labels())));
    } catch (const AnnotationError& e) {
      send_error(res, 409, e.what());
    }
  }));
}

int AnnotationServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool AnnotationServer::bind(const std::string& host, int port) {
  return server_->bind_to_port(host, port);
}

void AnnotationServer::serve() { server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace polurl::annotation
