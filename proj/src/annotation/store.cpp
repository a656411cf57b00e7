#include "polurl/annotation/store.hpp"

#include <filesystem>
#include <mutex>
#include <random>
#include <set>

#include "polurl/random.hpp"
#include "polurl/urlkit/url.hpp"

namespace polurl::annotation {

namespace {

void mask_all(std::string& text, const std::string& needle) {
  if (needle.size() < 3) return;
  const std::string n = to_lower_ascii(needle);
  std::string lower = to_lower_ascii(text);
  std::size_t pos = 0;
  constexpr std::string_view kMask = "[source]";
  while ((pos = lower.find(n, pos)) != std::string::npos) {
    text.replace(pos, n.size(), kMask);
    lower.replace(pos, n.size(), kMask);
    pos += kMask.size();
  }
}

Label label_or_throw(const std::string& s) {
  const auto l = parse_label(s);
  if (!l) throw AnnotationError(AnnotationError::Kind::invalid, "label must be POL or NON");
  return *l;
}

}  // namespace

BlindedPayload make_blinded_payload(const corpus::ArticleRecord& item) {
  std::vector<std::string> needles;
  std::optional<urlkit::CanonicalUrl> url;
  try {
    url = urlkit::canonicalize(item.url);
    needles = {url->host, url->registered_domain};
    const auto dot = url->registered_domain.find('.');
    needles.push_back(url->registered_domain.substr(0, dot));
  } catch (const urlkit::UrlError&) {
  }
  BlindedPayload p;
  if (item.fetch_status == corpus::FetchStatus::ok && item.body_text) {
    p.kind = "text";
    p.text = *item.body_text;
  } else {
    p.kind = "url_tokens";
    if (url) {
      const auto tokens = urlkit::tokenize_path(*url);
      for (const auto& t : tokens.tokens) {
        if (!p.text.empty()) p.text.push_back(' ');
        p.text += t;
      }
    }
  }
  for (const auto& n : needles) mask_all(p.text, n);
  return p;
}

std::string_view to_string(GoldStatus s) {
  switch (s) {
    case GoldStatus::pending: return "pending";
    case GoldStatus::agreed: return "agreed";
    case GoldStatus::adjudicated: return "adjudicated";
  }
  return "?";
}

namespace {

nlohmann::json opt_label(const std::optional<Label>& l) {
  return l ? nlohmann::json(std::string(to_string(*l))) : nlohmann::json(nullptr);
}

std::optional<Label> read_opt_label(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto l = parse_label(j.at(key).get<std::string>());
  if (!l) throw DataError(std::string("gold label: bad ") + key);
  return l;
}

}  // namespace

nlohmann::json to_json(const GoldLabel& g) {
  return {{"item_id", g.item_id},
          {"coder_a", opt_label(g.coder_a)},
          {"coder_b", opt_label(g.coder_b)},
          {"adjudicated", opt_label(g.adjudicated)},
          {"final", opt_label(g.final_label)},
          {"status", to_string(g.status)}};
}

GoldLabel gold_from_json(const nlohmann::json& j) {
  try {
    GoldLabel g;
    g.item_id = j.at("item_id").get<std::string>();
    g.coder_a = read_opt_label(j, "coder_a");
    g.coder_b = read_opt_label(j, "coder_b");
    g.adjudicated = read_opt_label(j, "adjudicated");
    g.final_label = read_opt_label(j, "final");
    const std::string status = j.value("status", std::string(g.final_label ? "agreed" : "pending"));
    if (status == "pending") {
      g.status = GoldStatus::pending;
    } else if (status == "agreed") {
      g.status = GoldStatus::agreed;
    } else if (status == "adjudicated") {
      g.status = GoldStatus::adjudicated;
    } else {
      throw DataError("gold label " + g.item_id + ": bad status " + status);
    }
    if ((g.status == GoldStatus::pending) == g.final_label.has_value())
      throw DataError("gold label " + g.item_id + ": final must be set iff status is not pending");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("gold label: ") + e.what());
  }
}

std::vector<std::string> presentation_order(const std::vector<std::string>& items,
                                            std::uint64_t seed) {
  std::vector<std::string> out = items;
  std::mt19937_64 rng(seed);
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[uniform_below(rng, i)]);
  return out;
}

nlohmann::json to_json(const IntercoderStats& s) {
  return {{"percent_agreement", s.percent_agreement},
          {"kappa", metrics::to_json(s.kappa)},
          {"z_statistic", metrics::to_json(s.z_statistic)},
          {"n_items", s.n_items},
          {"n_agreed", s.n_agreed}};
}

IntercoderStats intercoder_agreement(const std::vector<GoldLabel>& labels) {
  metrics::ConfusionMatrix m;
  for (const auto& g : labels) {
    if (!g.coder_a || !g.coder_b) continue;
    m.add(*g.coder_a == Label::POL ? metrics::Outcome::yes : metrics::Outcome::no, *g.coder_b);
  }
  if (m.n() < 2)
    throw AnnotationError(AnnotationError::Kind::invalid,
                          "intercoder agreement needs at least 2 double-coded items");
  IntercoderStats s;
  s.n_items = static_cast<std::size_t>(m.n());
  s.n_agreed = static_cast<std::size_t>(m.tp + m.tn);
  s.percent_agreement = *metrics::accuracy(m);
  const auto k = metrics::cohen_kappa(m);
  s.kappa = k.kappa;
  s.z_statistic = k.z;
  return s;
}

AnnotationStore::AnnotationStore(std::string log_path) : log_path_(std::move(log_path)) {
  namespace fs = std::filesystem;
  if (fs::exists(log_path_)) {
    for (const auto& e : corpus::read_jsonl(log_path_)) {
      try {
        apply(e);
      } catch (const AnnotationError& err) {
        throw DataError(log_path_ + ": event does not replay: " + err.what());
      } catch (const nlohmann::json::exception& err) {
        throw DataError(log_path_ + ": malformed event: " + err.what());
      }
    }
  } else if (fs::path(log_path_).has_parent_path()) {
    fs::create_directories(fs::path(log_path_).parent_path());
  }
  log_.open(log_path_, std::ios::app | std::ios::binary);
  if (!log_) throw DataError("cannot open annotation log " + log_path_);
}

std::unique_ptr<AnnotationStore> AnnotationStore::replay(const std::vector<nlohmann::json>& events) {
  auto store = std::make_unique<AnnotationStore>();
  for (const auto& e : events) store->apply(e);
  return store;
}

GoldLabel& AnnotationStore::label_for(const std::string& item_id) {
  const auto it = labels_.find(item_id);
  if (it == labels_.end())
    throw AnnotationError(AnnotationError::Kind::not_found, "unknown item " + item_id);
  return it->second;
}

void AnnotationStore::apply(const nlohmann::json& e) {
  using K = AnnotationError::Kind;
  const std::string type = e.at("type").get<std::string>();
  if (type == "assign") {
    if (assignment_) throw AnnotationError(K::conflict, "items are already assigned");
    Assignment a;
    a.coder_a = e.at("coder_a").get<std::string>();
    a.coder_b = e.at("coder_b").get<std::string>();
    if (a.coder_a.empty() || a.coder_b.empty())
      throw AnnotationError(K::invalid, "coder ids must be non-empty");
    if (a.coder_a == a.coder_b)
      throw AnnotationError(K::invalid, "primary coders must be distinct, got " + a.coder_a + " twice");
    a.seed_a = e.at("seed_a").get<std::uint64_t>();
    a.seed_b = e.at("seed_b").get<std::uint64_t>();
    const auto items = e.at("items").get<std::vector<std::string>>();
    std::set<std::string> seen;
    for (const auto& id : items)
      if (!seen.insert(id).second) throw AnnotationError(K::invalid, "duplicate item " + id);
    a.order_a = presentation_order(items, a.seed_a);
    a.order_b = presentation_order(items, a.seed_b);
    items_ = items;
    for (const auto& id : items) labels_[id].item_id = id;
    assignment_ = std::move(a);
  } else if (type == "decision") {
    if (!assignment_) throw AnnotationError(K::conflict, "no items assigned yet");
    const std::string coder = e.at("coder_id").get<std::string>();
    const Label label = label_or_throw(e.at("label").get<std::string>());
    GoldLabel& g = label_for(e.at("item_id").get<std::string>());
    std::optional<Label>* slot = nullptr;
    if (coder == assignment_->coder_a) {
      slot = &g.coder_a;
    } else if (coder == assignment_->coder_b) {
      slot = &g.coder_b;
    } else {
      throw AnnotationError(K::forbidden, "coder " + coder + " is not assigned to " + g.item_id);
    }
    if (slot->has_value())
      throw AnnotationError(K::conflict, "coder " + coder + " already decided " + g.item_id);
    *slot = label;
    ++decision_count_[coder];
    if (g.coder_a && g.coder_b && *g.coder_a == *g.coder_b) {
      g.final_label = g.coder_a;
      g.status = GoldStatus::agreed;
    }
  } else if (type == "adjudication") {
    if (!assignment_) throw AnnotationError(K::conflict, "no items assigned yet");
    const std::string adj = e.at("adjudicator_id").get<std::string>();
    const Label label = label_or_throw(e.at("label").get<std::string>());
    GoldLabel& g = label_for(e.at("item_id").get<std::string>());
    if (adj.empty() || adj == assignment_->coder_a || adj == assignment_->coder_b)
      throw AnnotationError(K::forbidden, "adjudicator must differ from both primary coders");
    if (!g.in_disagreement() || g.status != GoldStatus::pending)
      throw AnnotationError(K::conflict, "item " + g.item_id + " is not in the disagreement queue");
    g.adjudicated = label;
    g.final_label = label;
    g.status = GoldStatus::adjudicated;
  } else {
    throw AnnotationError(K::invalid, "unknown event type " + type);
  }
  events_.push_back(e);
}

void AnnotationStore::append(const nlohmann::json& event) {
  if (log_.is_open()) {
    log_ << event.dump() << '\n';
    log_.flush();
  }
}

const Assignment& AnnotationStore::assign_blind(const std::vector<std::string>& items,
                                                const std::string& coder_a,
                                                const std::string& coder_b, std::uint64_t seed_a,
                                                std::uint64_t seed_b) {
  const nlohmann::json e = {{"type", "assign"},  {"items", items},   {"coder_a", coder_a},
                            {"coder_b", coder_b}, {"seed_a", seed_a}, {"seed_b", seed_b}};
  std::unique_lock lock(mu_);
  apply(e);
  append(e);
  return *assignment_;
}

GoldLabel AnnotationStore::record_decision(const CoderDecision& d) {
  const nlohmann::json e = {{"type", "decision"},
                            {"item_id", d.item_id},
                            {"coder_id", d.coder_id},
                            {"label", to_string(d.label)},
                            {"decided_at", format_rfc3339(d.decided_at)}};
  std::unique_lock lock(mu_);
  apply(e);
  append(e);
  return labels_.at(d.item_id);
}

GoldLabel AnnotationStore::adjudicate(const std::string& item_id, const std::string& adjudicator,
                                      Label label, UtcInstant at) {
  const nlohmann::json e = {{"type", "adjudication"},
                            {"item_id", item_id},
                            {"adjudicator_id", adjudicator},
                            {"label", to_string(label)},
                            {"decided_at", format_rfc3339(at)}};
  std::unique_lock lock(mu_);
  apply(e);
  append(e);
  return labels_.at(item_id);
}

bool AnnotationStore::assigned() const {
  std::shared_lock lock(mu_);
  return assignment_.has_value();
}

Assignment AnnotationStore::assignment() const {
  std::shared_lock lock(mu_);
  if (!assignment_) throw AnnotationError(AnnotationError::Kind::conflict, "no items assigned yet");
  return *assignment_;
}

std::optional<std::string> AnnotationStore::next_item(const std::string& coder_id) const {
  std::shared_lock lock(mu_);
  if (!assignment_) throw AnnotationError(AnnotationError::Kind::conflict, "no items assigned yet");
  const bool is_a = coder_id == assignment_->coder_a;
  if (!is_a && coder_id != assignment_->coder_b)
    throw AnnotationError(AnnotationError::Kind::forbidden, "coder " + coder_id + " has no assignment");
  for (const auto& id : is_a ? assignment_->order_a : assignment_->order_b) {
    const auto& g = labels_.at(id);
    if (!(is_a ? g.coder_a : g.coder_b)) return id;
  }
  return std::nullopt;
}

std::vector<GoldLabel> AnnotationStore::disagreements() const {
  std::shared_lock lock(mu_);
  std::vector<GoldLabel> out;
  for (const auto& id : items_) {
    const auto& g = labels_.at(id);
    if (g.in_disagreement() && g.status == GoldStatus::pending) out.push_back(g);
  }
  return out;
}

std::vector<GoldLabel> AnnotationStore::gold_labels() const {
  std::shared_lock lock(mu_);
  std::vector<GoldLabel> out;
  out.reserve(items_.size());
  for (const auto& id : items_) out.push_back(labels_.at(id));
  return out;
}

std::optional<GoldLabel> AnnotationStore::gold(const std::string& item_id) const {
  std::shared_lock lock(mu_);
  const auto it = labels_.find(item_id);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

Progress AnnotationStore::progress() const {
  std::shared_lock lock(mu_);
  Progress p;
  for (const auto& [id, g] : labels_) {
    switch (g.status) {
      case GoldStatus::pending: ++p.pending; break;
      case GoldStatus::agreed: ++p.agreed; break;
      case GoldStatus::adjudicated: ++p.adjudicated; break;
    }
    if (g.in_disagreement() && g.status == GoldStatus::pending) ++p.disagreements;
  }
  if (assignment_) {
    p.decisions_by_coder[assignment_->coder_a] = 0;
    p.decisions_by_coder[assignment_->coder_b] = 0;
  }
  for (const auto& [coder, n] : decision_count_) p.decisions_by_coder[coder] = n;
  return p;
}

std::vector<nlohmann::json> AnnotationStore::events() const {
  std::shared_lock lock(mu_);
  return events_;
}

}  // namespace polurl::annotation
