#pragma once

#include <cstdint>
#include <vector>

#include "polurl/corpus/visits.hpp"

namespace polurl::corpus {

// Uniform sample without replacement (partial Fisher-Yates). The output order
// is the draw order, a pure function of (input order, n, seed). Throws
// DataError when n exceeds the population.
std::vector<VisitRecord> sample_visits(const std::vector<VisitRecord>& visits, std::size_t n,
                                       std::uint64_t seed);

// Draws up to `per_country` visits independently within each country (each
// stratum uses its own derived seed) and concatenates the strata in country
// order. Throws DataError when a country has fewer visits than requested and
// `allow_short` is false.
std::vector<VisitRecord> sample_visits_stratified(const std::vector<VisitRecord>& visits,
                                                  std::size_t per_country, std::uint64_t seed,
                                                  bool allow_short = false);

}  // namespace polurl::corpus
