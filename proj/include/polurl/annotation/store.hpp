#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polurl/common.hpp"
#include "polurl/corpus/dataset.hpp"
#include "polurl/metrics/metrics.hpp"

namespace polurl::annotation {

// What a coder sees: body text, or URL path tokens for unfetched items.
// Never the outlet name or the full URL.
struct BlindedPayload {
  std::string kind;  // "text" or "url_tokens"
  std::string text;
};

// Masks the registered domain and its brand label ("[source]").
BlindedPayload make_blinded_payload(const corpus::ArticleRecord& item);

struct CoderDecision {
  std::string item_id;
  std::string coder_id;
  Label label = Label::NON;
  UtcInstant decided_at{};
};

enum class GoldStatus { pending, agreed, adjudicated };
std::string_view to_string(GoldStatus s);

struct GoldLabel {
  std::string item_id;
  std::optional<Label> coder_a;
  std::optional<Label> coder_b;
  std::optional<Label> adjudicated;
  std::optional<Label> final_label;
  GoldStatus status = GoldStatus::pending;

  bool in_disagreement() const { return coder_a && coder_b && *coder_a != *coder_b; }
  bool operator==(const GoldLabel&) const = default;
};

nlohmann::json to_json(const GoldLabel& g);
GoldLabel gold_from_json(const nlohmann::json& j);

struct Assignment {
  std::string coder_a, coder_b;
  std::uint64_t seed_a = 0, seed_b = 0;
  std::vector<std::string> order_a, order_b;  // per-coder presentation order
};

// Seeded Fisher-Yates permutation of `items`.
std::vector<std::string> presentation_order(const std::vector<std::string>& items,
                                            std::uint64_t seed);

class AnnotationError : public std::runtime_error {
 public:
  enum class Kind { conflict, not_found, forbidden, invalid };
  AnnotationError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Progress {
  std::size_t pending = 0, agreed = 0, adjudicated = 0;
  std::size_t disagreements = 0;  // queued for adjudication
  std::map<std::string, std::size_t> decisions_by_coder;
};

struct IntercoderStats {
  double percent_agreement = 0;
  metrics::Metric kappa;
  metrics::Metric z_statistic;
  std::size_t n_items = 0;
  std::size_t n_agreed = 0;
};

nlohmann::json to_json(const IntercoderStats& s);

// Over items with both primary decisions; throws AnnotationError(invalid)
// for fewer than two such items.
IntercoderStats intercoder_agreement(const std::vector<GoldLabel>& labels);

// Event-sourced store: assign, decision and adjudication events appended to
// an optional JSONL log; state is a fold over the events.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  // Replays an existing log, then appends to it.
  explicit AnnotationStore(std::string log_path);

  const Assignment& assign_blind(const std::vector<std::string>& items, const std::string& coder_a,
                                 const std::string& coder_b, std::uint64_t seed_a,
                                 std::uint64_t seed_b);
  GoldLabel record_decision(const CoderDecision& d);
  GoldLabel adjudicate(const std::string& item_id, const std::string& adjudicator, Label label,
                       UtcInstant at = utc_now());

  bool assigned() const;
  Assignment assignment() const;
  std::optional<std::string> next_item(const std::string& coder_id) const;
  std::vector<GoldLabel> disagreements() const;
  std::vector<GoldLabel> gold_labels() const;  // item order of the assignment
  std::optional<GoldLabel> gold(const std::string& item_id) const;
  Progress progress() const;
  std::vector<nlohmann::json> events() const;

  // Rebuilds a store from an event list (no log file).
  static std::unique_ptr<AnnotationStore> replay(const std::vector<nlohmann::json>& events);

 private:
  void apply(const nlohmann::json& event);
  void append(const nlohmann::json& event);
  GoldLabel& label_for(const std::string& item_id);

  mutable std::shared_mutex mu_;
  std::optional<Assignment> assignment_;
  std::vector<std::string> items_;
  std::map<std::string, GoldLabel> labels_;
  std::map<std::string, std::size_t> decision_count_;
  std::vector<nlohmann::json> events_;
  std::string log_path_;
  std::ofstream log_;
};

}  // namespace polurl::annotation
