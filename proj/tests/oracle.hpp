#pragma once

// Reference implementations used only by tests. They recount everything from
// raw label pairs and share no code with the library.

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

// predicted: 1 yes, 0 no. gold: 1 POL, 0 NON.
struct Pair {
  int predicted = 0;
  int gold = 0;
};

struct Metrics {
  std::optional<double> accuracy, sensitivity, specificity, precision, balanced, f1, mcc, kappa;
  std::optional<double> kappa_from_probabilities, mcc_pearson;
};

inline Metrics recount(const std::vector<Pair>& pairs) {
  std::int64_t yes_pol = 0, yes_non = 0, no_pol = 0, no_non = 0;
  for (const auto& p : pairs) {
    if (p.predicted == 1 && p.gold == 1) yes_pol++;
    if (p.predicted == 1 && p.gold == 0) yes_non++;
    if (p.predicted == 0 && p.gold == 1) no_pol++;
    if (p.predicted == 0 && p.gold == 0) no_non++;
  }
  const std::int64_t n = static_cast<std::int64_t>(pairs.size());
  auto frac = [](std::int64_t a, std::int64_t b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return double(a) / double(b);
  };
  Metrics m;
  m.accuracy = frac(yes_pol + no_non, n);
  m.sensitivity = frac(yes_pol, yes_pol + no_pol);
  m.specificity = frac(no_non, no_non + yes_non);
  m.precision = frac(yes_pol, yes_pol + yes_non);
  if (m.sensitivity && m.specificity) m.balanced = (*m.sensitivity + *m.specificity) / 2;
  m.f1 = frac(yes_pol + yes_pol, yes_pol + yes_pol + yes_non + no_pol);

  const std::int64_t pred_yes = yes_pol + yes_non, pred_no = no_pol + no_non;
  const std::int64_t gold_pol = yes_pol + no_pol, gold_non = yes_non + no_non;
  const std::int64_t prod = pred_yes * pred_no * gold_pol * gold_non;
  if (prod != 0) {
    m.mcc = double(yes_pol * no_non - yes_non * no_pol) / std::sqrt(double(prod));
    // Pearson correlation of the 0/1 vectors.
    double mx = 0, my = 0;
    for (const auto& p : pairs) {
      mx += p.predicted;
      my += p.gold;
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& p : pairs) {
      sxy += (p.predicted - mx) * (p.gold - my);
      sxx += (p.predicted - mx) * (p.predicted - mx);
      syy += (p.gold - my) * (p.gold - my);
    }
    m.mcc_pearson = sxy / std::sqrt(sxx * syy);
  }

  // Kappa is defined only when both raters used both labels.
  if (n >= 2 && pred_yes > 0 && pred_no > 0 && gold_pol > 0 && gold_non > 0) {
    const std::int64_t agree = yes_pol + no_non;
    const std::int64_t chance = pred_yes * gold_pol + pred_no * gold_non;
    m.kappa = double(n * agree - chance) / double(n * n - chance);
    const double p_o = double(agree) / double(n);
    const double p_e = (double(pred_yes) / double(n)) * (double(gold_pol) / double(n)) +
                       (double(pred_no) / double(n)) * (double(gold_non) / double(n));
    m.kappa_from_probabilities = (p_o - p_e) / (1 - p_e);
  }
  return m;
}

// z for the diagonal count of a 2x2 table [[a, b], [c, d]] under the exact
// conditional (hypergeometric) null with fixed margins.
inline double hypergeometric_agreement_z(std::int64_t a, std::int64_t b, std::int64_t c,
                                         std::int64_t d) {
  const double n = double(a + b + c + d);
  const double r1 = double(a + b), r2 = double(c + d), c1 = double(a + c), c2 = double(b + d);
  const double mean_a = r1 * c1 / n;
  const double var_a = r1 * r2 * c1 * c2 / (n * n * (n - 1));
  // a + d = 2a + (r2 - c1), so the agreement count has mean 2E[a] + (r2 - c1)
  // and variance 4 Var[a].
  const double agree = double(a + d);
  const double mean_agree = 2 * mean_a + (r2 - c1);
  return (agree - mean_agree) / (2 * std::sqrt(var_a));
}

}  // namespace oracle
