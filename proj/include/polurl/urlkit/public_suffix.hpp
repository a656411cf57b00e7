#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace polurl::urlkit {

// Public suffix rules in the publicsuffix.org list format: plain rules,
// wildcard rules ("*.ck") and exception rules ("!www.ck").
class PublicSuffixList {
 public:
  // Snapshot of the ICANN rules covering the generic TLDs and the country
  // TLDs relevant to the five tracked countries.
  static const PublicSuffixList& bundled();

  // Parses list text; comment lines start with "//".
  static PublicSuffixList parse(std::string_view text);

  // Longest matching public suffix of a lowercase host. Hosts with an
  // unknown TLD fall back to the implicit "*" rule (the last label).
  std::string public_suffix(std::string_view host) const;

  // Public suffix plus one label, or empty when the host is itself a suffix.
  std::string registered_domain(std::string_view host) const;

  std::size_t size() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // stored without the "*."
  std::unordered_set<std::string> exceptions_;  // stored without the "!"
};

}  // namespace polurl::urlkit
