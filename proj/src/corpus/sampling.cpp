#include "polurl/corpus/sampling.hpp"

#include <numeric>
#include <random>

#include "polurl/random.hpp"

namespace polurl::corpus {

std::vector<VisitRecord> sample_visits(const std::vector<VisitRecord>& visits, std::size_t n,
                                       std::uint64_t seed) {
  if (n > visits.size())
    throw DataError("sample size " + std::to_string(n) + " exceeds population of " +
                    std::to_string(visits.size()));
  std::vector<std::size_t> idx(visits.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<VisitRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + uniform_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(visits[idx[i]]);
  }
  return out;
}

std::vector<VisitRecord> sample_visits_stratified(const std::vector<VisitRecord>& visits,
                                                  std::size_t per_country, std::uint64_t seed,
                                                  bool allow_short) {
  std::vector<VisitRecord> out;
  for (Country c : kAllCountries) {
    std::vector<VisitRecord> stratum;
    for (const auto& v : visits) {
      if (v.country == c) stratum.push_back(v);
    }
    if (stratum.empty()) continue;
    std::size_t take = per_country;
    if (take > stratum.size()) {
      if (!allow_short)
        throw DataError("country " + std::string(to_string(c)) + " has only " +
                        std::to_string(stratum.size()) + " visits, " +
                        std::to_string(per_country) + " requested");
      take = stratum.size();
    }
    auto part = sample_visits(stratum, take, mix_seed(seed, static_cast<std::uint64_t>(c)));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace polurl::corpus
