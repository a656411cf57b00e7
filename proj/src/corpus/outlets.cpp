#include "polurl/corpus/outlets.hpp"

#include <fstream>

#include "polurl/urlkit/public_suffix.hpp"
#include "polurl/urlkit/url.hpp"

namespace polurl::corpus {

std::string normalize_domain(std::string_view entry) {
  std::string d = to_lower_ascii(trim(entry));
  if (const auto p = d.find("://"); p != std::string::npos) d.erase(0, p + 3);
  if (const auto p = d.find_first_of("/?#"); p != std::string::npos) d.resize(p);
  if (const auto p = d.find(':'); p != std::string::npos) d.resize(p);
  while (!d.empty() && d.back() == '.') d.pop_back();
  if (d.rfind("www.", 0) == 0) d.erase(0, 4);
  return d;
}

OutletList load_outlet_list(const std::string& path, Country country) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read outlet list: " + path);
  OutletList list;
  list.country = country;
  list.provenance = path;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const std::string d = normalize_domain(line);
    if (!d.empty()) list.domains.insert(d);
  }
  if (list.domains.empty())
    throw DataError("outlet list for " + std::string(to_string(country)) + " is empty: " + path);
  return list;
}

bool host_matches_outlets(std::string_view host_in, const OutletList& outlets) {
  const std::string host = normalize_domain(host_in);
  const std::string registered = urlkit::PublicSuffixList::bundled().registered_domain(host);
  if (registered.empty()) return false;
  // Candidate suffixes from the full host down to the registered domain.
  std::string_view cand = host;
  while (true) {
    if (outlets.domains.count(std::string(cand))) return true;
    if (cand.size() <= registered.size()) break;
    const auto dot = cand.find('.');
    if (dot == std::string_view::npos) break;
    cand.remove_prefix(dot + 1);
  }
  return false;
}

std::vector<VisitRecord> filter_by_outlets(const std::vector<VisitRecord>& visits,
                                           const OutletLists& outlets) {
  std::vector<VisitRecord> out;
  for (const auto& v : visits) {
    const auto it = outlets.find(v.country);
    if (it == outlets.end()) continue;
    std::string host;
    try {
      host = urlkit::canonicalize(v.url).host;
    } catch (const urlkit::UrlError&) {
      continue;
    }
    if (host_matches_outlets(host, it->second)) out.push_back(v);
  }
  return out;
}

}  // namespace polurl::corpus
