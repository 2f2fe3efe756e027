#include "dibets/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_map>

namespace dibets::html {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> table = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
      {"nbsp", 0xA0},   {"ndash", 0x2013}, {"mdash", 0x2014}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
      {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"hellip", 0x2026}, {"copy", 0xA9},  {"reg", 0xAE},
      {"trade", 0x2122}, {"middot", 0xB7}, {"bull", 0x2022},  {"laquo", 0xAB},   {"raquo", 0xBB},
      {"rupee", 0x20B9}, {"euro", 0x20AC}, {"pound", 0xA3},
  };
  return table;
}

// Raw-text elements whose bodies are never markup or visible text.
bool is_raw_text(std::string_view tag) {
  return iequals(tag, "script") || iequals(tag, "style") || iequals(tag, "noscript") ||
         iequals(tag, "template") || iequals(tag, "textarea");
}

bool is_inline(std::string_view tag) {
  static constexpr std::array<std::string_view, 25> kInline = {
      "a",    "abbr", "b",    "bdi",  "bdo",  "cite", "code",   "data", "dfn",
      "em",   "i",    "kbd",  "mark", "q",    "s",    "samp",   "small", "span",
      "strong", "sub", "sup", "time", "u",    "var",  "font"};
  return std::any_of(kInline.begin(), kInline.end(), [&](std::string_view t) { return iequals(t, tag); });
}

struct Attribute {
  std::string_view name;
  std::string_view value;
};

struct Tag {
  std::string_view name;
  bool closing = false;
  std::vector<Attribute> attributes;
  std::size_t end = 0;  // index one past '>'
};

// Parses the tag starting at doc[pos] == '<'. Returns false for stray '<'.
bool parse_tag(std::string_view doc, std::size_t pos, Tag& tag) {
  std::size_t i = pos + 1;
  if (i < doc.size() && doc[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t name_start = i;
  while (i < doc.size() && (std::isalnum(static_cast<unsigned char>(doc[i])) || doc[i] == '-' || doc[i] == ':')) ++i;
  if (i == name_start) return false;
  tag.name = doc.substr(name_start, i - name_start);
  while (i < doc.size()) {
    while (i < doc.size() && (is_space(doc[i]) || doc[i] == '/')) ++i;
    if (i >= doc.size()) break;
    if (doc[i] == '>') {
      tag.end = i + 1;
      return true;
    }
    std::size_t an = i;
    while (i < doc.size() && !is_space(doc[i]) && doc[i] != '=' && doc[i] != '>' && doc[i] != '/') ++i;
    Attribute attr{doc.substr(an, i - an), {}};
    while (i < doc.size() && is_space(doc[i])) ++i;
    if (i < doc.size() && doc[i] == '=') {
      ++i;
      while (i < doc.size() && is_space(doc[i])) ++i;
      if (i < doc.size() && (doc[i] == '"' || doc[i] == '\'')) {
        char quote = doc[i++];
        std::size_t vs = i;
        std::size_t ve = doc.find(quote, vs);
        if (ve == std::string_view::npos) ve = doc.size();
        attr.value = doc.substr(vs, ve - vs);
        i = std::min(ve + 1, doc.size());
      } else {
        std::size_t vs = i;
        while (i < doc.size() && !is_space(doc[i]) && doc[i] != '>') ++i;
        attr.value = doc.substr(vs, i - vs);
      }
    }
    if (attr.name.empty()) {
      ++i;
      continue;
    }
    tag.attributes.push_back(attr);
  }
  tag.end = doc.size();
  return true;
}

// Index just past the closing tag of a raw-text element opened before `from`.
std::size_t skip_raw_text(std::string_view doc, std::size_t from, std::string_view name) {
  std::size_t i = from;
  while (true) {
    std::size_t lt = doc.find("</", i);
    if (lt == std::string_view::npos) return doc.size();
    std::string_view rest = doc.substr(lt + 2);
    if (rest.size() >= name.size() && iequals(rest.substr(0, name.size()), name)) {
      std::size_t gt = doc.find('>', lt);
      return gt == std::string_view::npos ? doc.size() : gt + 1;
    }
    i = lt + 2;
  }
}

// Walks the document, calling on_text for character data and on_tag for tags.
template <typename TextFn, typename TagFn>
void walk(std::string_view doc, TextFn on_text, TagFn on_tag) {
  std::size_t i = 0;
  std::size_t text_start = 0;
  while (i < doc.size()) {
    if (doc[i] != '<') {
      ++i;
      continue;
    }
    if (doc.substr(i).starts_with("<!--")) {
      on_text(doc.substr(text_start, i - text_start));
      std::size_t end = doc.find("-->", i + 4);
      i = end == std::string_view::npos ? doc.size() : end + 3;
      text_start = i;
      continue;
    }
    if (doc.substr(i).starts_with("<!") || doc.substr(i).starts_with("<?")) {
      on_text(doc.substr(text_start, i - text_start));
      std::size_t end = doc.find('>', i);
      i = end == std::string_view::npos ? doc.size() : end + 1;
      text_start = i;
      continue;
    }
    Tag tag;
    if (!parse_tag(doc, i, tag)) {
      ++i;
      continue;
    }
    on_text(doc.substr(text_start, i - text_start));
    on_tag(tag);
    i = tag.end;
    if (!tag.closing && is_raw_text(tag.name)) i = skip_raw_text(doc, i, tag.name);
    text_start = i;
  }
  on_text(doc.substr(text_start));
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view body = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() >= 2 && body[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = body[1] == 'x' || body[1] == 'X';
      std::string_view digits = body.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) { ok = false; break; }
      }
      if (ok) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      auto it = named_entities().find(body);
      if (it != named_entities().end()) {
        append_utf8(out, it->second);
        decoded = true;
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::vector<std::string> href_values(std::string_view document) {
  std::vector<std::string> out;
  walk(
      document, [](std::string_view) {},
      [&](const Tag& tag) {
        if (tag.closing) return;
        for (const auto& attr : tag.attributes) {
          if (iequals(attr.name, "href")) out.push_back(decode_entities(attr.value));
        }
      });
  return out;
}

std::string visible_text(std::string_view document) {
  std::string raw;
  walk(
      document, [&](std::string_view text) { raw += decode_entities(text); },
      [&](const Tag& tag) {
        if (!is_inline(tag.name)) raw.push_back(' ');
      });
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    bool space = is_space(c) || c == '\v';
    // U+00A0 (C2 A0) also collapses.
    if (!space && static_cast<unsigned char>(c) == 0xC2 && i + 1 < raw.size() &&
        static_cast<unsigned char>(raw[i + 1]) == 0xA0) {
      space = true;
      ++i;
    }
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto cont = [&](std::size_t k) {
    return k < bytes.size() && (static_cast<unsigned char>(bytes[k]) & 0xC0) == 0x80;
  };
  while (i < bytes.size()) {
    auto b = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (b < 0x80) {
      len = 1;
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4;
      cp = b & 0x07;
    }
    bool ok = len > 0;
    for (std::size_t k = 1; ok && k < len; ++k) {
      if (!cont(i + k)) ok = false;
      else cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    if (ok && ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
               (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)) {
      ok = false;
    }
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      append_utf8(out, 0xFFFD);
      ++i;
    }
  }
  return out;
}

}  // namespace dibets::html
