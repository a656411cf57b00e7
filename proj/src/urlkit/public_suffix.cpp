#include "polurl/urlkit/public_suffix.hpp"

#include "polurl/common.hpp"

namespace polurl::urlkit {

namespace {

// Subset of the ICANN section of publicsuffix.org (snapshot 2025-03).
constexpr std::string_view kSnapshot = R"(// generic
com
org
net
edu
gov
int
mil
info
biz
name
pro
io
co
tv
me
news
media
online
site
eu
// fr
fr
asso.fr
com.fr
gouv.fr
nom.fr
prd.fr
presse.fr
tm.fr
// de
de
// es
es
com.es
edu.es
gob.es
nom.es
org.es
// uk
uk
ac.uk
co.uk
gov.uk
ltd.uk
me.uk
net.uk
nhs.uk
org.uk
plc.uk
police.uk
sch.uk
*.sch.uk
// us
us
dni.us
fed.us
isa.us
kids.us
nsn.us
ak.us
al.us
ar.us
az.us
ca.us
co.us
ct.us
dc.us
de.us
fl.us
ga.us
il.us
ma.us
md.us
mi.us
mn.us
ny.us
oh.us
pa.us
tx.us
va.us
wa.us
k12.ny.us
k12.ca.us
// misc, exercised by the wildcard and exception rules
ck
*.ck
!www.ck
jp
co.jp
ne.jp
or.jp
au
com.au
net.au
org.au
ch
at
co.at
it
nl
be
pt
ie
ca
)";

}  // namespace

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList list = parse(kSnapshot);
  return list;
}

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  for (const auto& raw : split(text, '\n')) {
    std::string line = trim(raw);
    // Rules end at the first whitespace.
    if (auto ws = line.find_first_of(" \t"); ws != std::string::npos) line.resize(ws);
    if (line.empty() || line.rfind("//", 0) == 0) continue;
    line = to_lower_ascii(line);
    if (line.rfind("*.", 0) == 0) {
      psl.wildcards_.insert(line.substr(2));
    } else if (line[0] == '!') {
      psl.exceptions_.insert(line.substr(1));
    } else {
      psl.rules_.insert(line);
    }
  }
  return psl;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  std::string h = to_lower_ascii(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (h.empty()) return {};
  const auto labels = split(h, '.');
  const std::size_t n = labels.size();

  auto join_from = [&](std::size_t i) {
    std::string s;
    for (std::size_t k = i; k < n; ++k) {
      if (!s.empty()) s.push_back('.');
      s += labels[k];
    }
    return s;
  };

  // Walk candidate suffixes from longest to shortest; the first (longest)
  // match wins, with exception rules taking priority.
  for (std::size_t i = 0; i < n; ++i) {
    const std::string cand = join_from(i);
    if (exceptions_.count(cand)) return join_from(i + 1);
    if (rules_.count(cand)) return cand;
    if (i + 1 < n && wildcards_.count(join_from(i + 1))) return cand;
  }
  return labels.back();
}

std::string PublicSuffixList::registered_domain(std::string_view host) const {
  std::string h = to_lower_ascii(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  const std::string suffix = public_suffix(h);
  if (suffix.empty() || h.size() <= suffix.size()) return {};
  const std::string_view rest(h.data(), h.size() - suffix.size() - 1);
  const auto dot = rest.rfind('.');
  const std::string_view label = dot == std::string_view::npos ? rest : rest.substr(dot + 1);
  if (label.empty()) return {};
  return std::string(label) + "." + suffix;
}

}  // namespace polurl::urlkit
