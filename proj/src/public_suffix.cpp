#include "dibets/public_suffix.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dibets/error.hpp"

namespace dibets {
namespace {

// Trimmed snapshot of the public suffix list. Enough for Indian news sites and
// the usual tracker domains; load the full upstream file for anything wider.
constexpr std::string_view kBuiltinRules = R"(
// generic
com
net
org
edu
gov
mil
int
info
biz
name
pro
mobi
asia
tel
travel
jobs
app
dev
io
ai
co
me
tv
cc
ly
to
gl
fm
am
news
live
media
online
site
xyz
top
club
today
world
tech
cloud
store
blog
link
click
agency
digital
network
global
// india
in
co.in
firm.in
net.in
org.in
gen.in
ind.in
ac.in
edu.in
res.in
gov.in
mil.in
nic.in
// country codes seen in tracker traffic
uk
co.uk
org.uk
ac.uk
gov.uk
ltd.uk
plc.uk
me.uk
net.uk
us
ca
de
fr
nl
be
ch
at
es
it
se
no
dk
fi
pl
ru
eu
ie
jp
co.jp
ne.jp
or.jp
ac.jp
cn
com.cn
net.cn
org.cn
gov.cn
au
com.au
net.au
org.au
edu.au
gov.au
nz
co.nz
br
com.br
sg
com.sg
hk
com.hk
kr
co.kr
tw
com.tw
za
co.za
ae
sa
com.sa
pk
com.pk
bd
com.bd
lk
np
com.np
id
co.id
my
com.my
ph
com.ph
vn
il
co.il
tr
com.tr
mx
com.mx
ar
com.ar
// private registries
blogspot.com
github.io
herokuapp.com
appspot.com
azurewebsites.net
cloudfront.net
netlify.app
vercel.app
)";

bool is_ip_literal(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[') return true;
  return std::all_of(host.begin(), host.end(),
                     [](char c) { return (c >= '0' && c <= '9') || c == '.'; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
  PublicSuffixList psl;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.starts_with("//")) continue;
    // Rules end at the first whitespace.
    line = line.substr(0, line.find_first_of(" \t"));
    std::string rule(line);
    std::transform(rule.begin(), rule.end(), rule.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (rule.starts_with("!")) {
      psl.exceptions_.insert(rule.substr(1));
    } else if (rule.starts_with("*.")) {
      psl.wildcards_.insert(rule.substr(2));
    } else {
      psl.rules_.insert(rule);
    }
  }
  return psl;
}

PublicSuffixList PublicSuffixList::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open public suffix list " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const PublicSuffixList& PublicSuffixList::builtin() {
  static const PublicSuffixList list = parse(kBuiltinRules);
  return list;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    std::size_t dot = host.find('.', start);
    if (dot == std::string_view::npos) dot = host.size();
    labels.push_back(host.substr(start, dot - start));
    start = dot + 1;
  }
  // Longest matching rule wins; exceptions trump everything.
  std::size_t best = 1;  // implicit "*"
  for (std::size_t n = labels.size(); n >= 1; --n) {
    std::size_t offset = labels.size() - n;
    std::string_view candidate = host.substr(static_cast<std::size_t>(labels[offset].data() - host.data()));
    std::string key(candidate);
    if (exceptions_.count(key)) {
      best = n - 1;
      break;
    }
    if (rules_.count(key)) {
      best = std::max(best, n);
      break;
    }
    if (n >= 2) {
      std::string parent(host.substr(static_cast<std::size_t>(labels[offset + 1].data() - host.data())));
      if (wildcards_.count(parent)) {
        best = std::max(best, n);
        break;
      }
    }
  }
  if (best == 0) best = 1;
  std::size_t offset = labels.size() - std::min(best, labels.size());
  return std::string(host.substr(static_cast<std::size_t>(labels[offset].data() - host.data())));
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
  if (host.empty() || is_ip_literal(host) || host.find('.') == std::string_view::npos) {
    return std::string(host);
  }
  std::string suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return std::string(host);
  // One more label to the left of the suffix.
  std::string_view rest = host.substr(0, host.size() - suffix.size() - 1);
  std::size_t dot = rest.rfind('.');
  std::string_view label = dot == std::string_view::npos ? rest : rest.substr(dot + 1);
  return std::string(label) + "." + suffix;
}

}  // namespace dibets
