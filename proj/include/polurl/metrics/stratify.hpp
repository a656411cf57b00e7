#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "polurl/metrics/metrics.hpp"

namespace polurl::metrics {

// One scored item with the strata it belongs to.
struct StratItem {
  std::string item_id;
  Outcome predicted = Outcome::no;
  Label gold = Label::NON;
  Country country = Country::US;
  std::optional<int> text_position;  // from the full-text run, 1..10
};

struct PositionCell {
  Metric agreement;
  std::int64_t count = 0;
};

struct PositionCurve {
  std::array<PositionCell, 10> cells;  // index p-1
  Metric raw_mean;       // unweighted mean over positions with items
  Metric weighted_mean;  // count-weighted mean
};

struct StratifiedAgreement {
  std::map<std::string, Metric> by_class;    // "POL" -> sensitivity, "NON" -> specificity
  std::map<Country, Metric> by_country;      // balanced accuracy per country
  PositionCurve by_position;
  Metric filtered_balanced;                  // text positions 4..6 removed
  Metric unfiltered_balanced;
  std::vector<std::string> warnings;         // omitted strata
};

// Class-wise agreement; an empty class is omitted with a warning.
std::map<std::string, Metric> agreement_by_class(const std::vector<StratItem>& items,
                                                 std::vector<std::string>* warnings = nullptr);
// Balanced accuracy within each country present.
std::map<Country, Metric> agreement_by_country(const std::vector<StratItem>& items,
                                               std::vector<std::string>* warnings = nullptr);

class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Share of correct verdicts among scored items at each text-run position.
// Throws DiagnosticError when more than half of the gold-POL items have no
// text-run position.
PositionCurve agreement_by_position(const std::vector<StratItem>& items);

// Balanced accuracy after dropping items whose text-run position is 4, 5 or 6.
Metric filtered_balanced_agreement(const std::vector<StratItem>& items);

StratifiedAgreement stratify(const std::vector<StratItem>& items);

nlohmann::json to_json(const PositionCurve& c);
nlohmann::json to_json(const StratifiedAgreement& s);
StratifiedAgreement strata_from_json(const nlohmann::json& j);

}  // namespace polurl::metrics
