#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "polurl/common.hpp"
#include "polurl/corpus/visits.hpp"

namespace polurl::corpus {

struct OutletList {
  Country country = Country::US;
  std::set<std::string> domains;  // lowercase, no scheme, no path
  std::string provenance;
};

using OutletLists = std::map<Country, OutletList>;

// Lowercases and strips scheme, "www.", port and path. Returns empty for
// strings that hold no host.
std::string normalize_domain(std::string_view entry);

// One domain per line; '#' starts a comment (whole line or trailing).
// Throws DataError when unreadable or when no domain remains.
OutletList load_outlet_list(const std::string& path, Country country);

// True when the host is a listed domain or a subdomain of one. Listed
// entries above the registered domain (bare public suffixes) never match.
bool host_matches_outlets(std::string_view host, const OutletList& outlets);

// Keeps visits whose host belongs to the outlet list of the visit's country.
std::vector<VisitRecord> filter_by_outlets(const std::vector<VisitRecord>& visits,
                                           const OutletLists& outlets);

}  // namespace polurl::corpus
