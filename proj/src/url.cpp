#include "dibets/url.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <json.hpp>

#include "dibets/error.hpp"
#include "dibets/html.hpp"

namespace dibets {
namespace {

using json = nlohmann::json;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void malformed(std::string_view raw, std::string_view why) {
  throw Error(Errc::MalformedUrl, "'" + std::string(raw) + "' (" + std::string(why) + ")");
}

// Characters never legal in a URL, raw or percent-encoded.
bool forbidden_char(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u < 0x20 || u == 0x7F) return true;
  switch (c) {
    case ' ': case '<': case '>': case '"': case '{': case '}':
    case '|': case '\\': case '^': case '`':
      return true;
    default:
      return false;
  }
}

struct Parts {
  std::string scheme;
  std::string host;
  std::string port;
  std::string path;  // may be relative (no leading '/') only during resolution
};

// Splits the scheme off an absolute reference; empty when `ref` is relative.
std::string scheme_of(std::string_view ref) {
  if (ref.empty() || !std::isalpha(static_cast<unsigned char>(ref[0]))) return {};
  for (std::size_t i = 1; i < ref.size(); ++i) {
    char c = ref[i];
    if (c == ':') return to_lower(ref.substr(0, i));
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return {};
  }
  return {};
}

std::string_view strip_query_fragment(std::string_view s) {
  std::size_t cut = s.find_first_of("?#");
  return cut == std::string_view::npos ? s : s.substr(0, cut);
}

// Parses "//authority/path" (the part after "scheme:").
Parts parse_hierarchical(std::string_view raw, std::string scheme, std::string_view rest) {
  if (!rest.starts_with("//")) malformed(raw, "missing authority");
  rest.remove_prefix(2);
  std::size_t auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view path = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

  Parts parts;
  parts.scheme = std::move(scheme);
  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    std::size_t close = authority.find(']');
    if (close == std::string_view::npos) malformed(raw, "unterminated IPv6 literal");
    host = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') malformed(raw, "junk after IPv6 literal");
      parts.port = std::string(after.substr(1));
    }
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    parts.port = std::string(authority.substr(colon + 1));
  }
  if (!std::all_of(parts.port.begin(), parts.port.end(), [](unsigned char c) { return std::isdigit(c); })) {
    malformed(raw, "bad port");
  }
  std::string h = to_lower(host);
  while (!h.empty() && h.back() == '.') h.pop_back();
  if (h.empty()) malformed(raw, "empty host");
  if (h.front() != '[') {
    for (char c : h) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_';
      if (!ok) malformed(raw, "invalid host character");
    }
    if (h.front() == '.' || h.find("..") != std::string::npos) malformed(raw, "empty host label");
  }
  parts.host = std::move(h);
  if ((parts.scheme == "http" && parts.port == "80") || (parts.scheme == "https" && parts.port == "443")) {
    parts.port.clear();
  }
  parts.path = std::string(strip_query_fragment(path));
  return parts;
}

std::vector<std::string> clean_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t slash = path.find('/', pos);
    if (slash == std::string_view::npos) slash = path.size();
    std::string_view seg = path.substr(pos, slash - pos);
    pos = slash + 1;
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (!out.empty()) out.pop_back();
      continue;
    }
    out.emplace_back(seg);
  }
  return out;
}

PageUrl build(std::string_view raw, const Parts& parts, const PublicSuffixList& psl) {
  for (char c : parts.path) {
    if (forbidden_char(c)) malformed(raw, "invalid path character");
  }
  PageUrl u;
  u.raw = std::string(raw);
  u.host = parts.host;
  u.domain = psl.registrable_domain(parts.host);
  u.subpaths = clean_segments(parts.path);
  u.normalized = parts.scheme + "://" + parts.host;
  if (!parts.port.empty()) u.normalized += ":" + parts.port;
  u.normalized += "/";
  for (const auto& seg : u.subpaths) {
    u.normalized += seg;
    u.normalized += "/";
  }
  return u;
}

Parts parts_of(const PageUrl& base) {
  // base.normalized is always scheme://authority/segments/
  std::string scheme = scheme_of(base.normalized);
  return parse_hierarchical(base.normalized, scheme, std::string_view(base.normalized).substr(scheme.size() + 1));
}

}  // namespace

PageUrl normalize(std::string_view raw_in, const PageUrl* base, const PublicSuffixList& psl) {
  std::string_view raw = trim(raw_in);
  if (raw.empty()) malformed(raw_in, "empty");
  std::string scheme = scheme_of(raw);
  if (!scheme.empty()) {
    if (scheme != "http" && scheme != "https") malformed(raw, "unsupported scheme");
    return build(raw_in, parse_hierarchical(raw, scheme, raw.substr(scheme.size() + 1)), psl);
  }
  if (base == nullptr) malformed(raw, "relative reference without base");

  Parts b = parts_of(*base);
  if (raw.starts_with("//")) return build(raw_in, parse_hierarchical(raw, b.scheme, raw), psl);

  std::string_view ref = strip_query_fragment(raw);
  Parts resolved = b;
  if (ref.empty()) {
    // "?q" or "#f": same document.
  } else if (ref.front() == '/') {
    resolved.path = std::string(ref);
  } else {
    // Merge with the base directory; normalized bases always end in '/'.
    resolved.path = b.path + std::string(ref);
  }
  return build(raw_in, resolved, psl);
}

LinkPartition extract_links(std::string_view html_doc, const PageUrl& base, const PublicSuffixList& psl) {
  LinkPartition out;
  std::unordered_set<std::string> seen;
  for (const std::string& href : html::href_values(html_doc)) {
    std::string_view h = trim(href);
    if (h.empty() || h.front() == '#') continue;
    std::string scheme = scheme_of(h);
    if (scheme == "javascript" || scheme == "mailto") continue;
    PageUrl u;
    try {
      u = normalize(h, &base, psl);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    if (!seen.insert(u.normalized).second) continue;
    if (u.domain == base.domain) {
      out.internal.push_back(std::move(u));
    } else {
      out.external.push_back(std::move(u));
    }
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

UrlMetrics url_metrics(const PageUrl& u) {
  UrlMetrics m;
  m.url_length = utf8_length(u.normalized);
  for (const auto& seg : u.subpaths) {
    m.max_subpath_length = std::max(m.max_subpath_length, utf8_length(seg));
    m.max_hyphens = std::max(m.max_hyphens, static_cast<std::size_t>(std::count(seg.begin(), seg.end(), '-')));
  }
  return m;
}

std::string to_jsonl(const std::vector<SiteUrl>& rows) {
  std::string out;
  for (const auto& row : rows) {
    json j;
    j["raw"] = row.url.raw;
    j["normalized"] = row.url.normalized;
    j["domain"] = row.url.domain;
    j["subpaths"] = row.url.subpaths;
    j["site"] = row.site;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<SiteUrl> parse_url_list(std::string_view text, const PublicSuffixList& psl) {
  std::vector<SiteUrl> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    SiteUrl row;
    if (line.front() == '{') {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::MalformedDocument, "URL list line " + std::to_string(line_no) + " is not JSON");
      }
      std::string source = j.value("normalized", j.value("raw", std::string{}));
      if (source.empty()) {
        throw Error(Errc::MalformedDocument, "URL list line " + std::to_string(line_no) + " has no URL");
      }
      row.url = normalize(source, nullptr, psl);
      row.url.raw = j.value("raw", source);
      row.site = j.value("site", row.url.domain);
    } else {
      row.url = normalize(line, nullptr, psl);
      row.site = row.url.domain;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dibets
