#include "dibets/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "dibets/error.hpp"
#include "dibets/io.hpp"

namespace dibets {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingModel EmbeddingModel::parse(std::string_view document) {
  auto rows = io::lines(document);
  if (rows.empty()) throw Error(Errc::MalformedHeader, "empty embedding file");
  auto header = split_ws(rows.front().second);
  std::size_t vocab = 0, dim = 0;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), vocab).ec != std::errc() ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc() || dim == 0) {
    throw Error(Errc::MalformedHeader, "expected 'vocab_count dimension' on line 1");
  }
  EmbeddingModel model(dim);
  std::size_t expected = std::min(vocab, rows.size() - 1);
  model.index_.reserve(expected);
  model.data_.reserve(expected * dim);
  std::vector<double> vec(dim);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto [line_no, line] = rows[r];
    auto fields = split_ws(line);
    if (fields.size() != dim + 1) {
      throw Error(Errc::DimensionMismatch, "line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.empty() ? 0 : fields.size() - 1) +
                                               " values, expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], vec[k])) {
        throw Error(Errc::DimensionMismatch, "line " + std::to_string(line_no) + ": bad number '" +
                                                 std::string(fields[k + 1]) + "'");
      }
    }
    std::string token(fields[0]);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    model.add(std::move(token), vec);
  }
  return model;
}

std::span<const double> EmbeddingModel::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dimension_, dimension_};
}

bool EmbeddingModel::add(std::string token, std::span<const double> vector) {
  if (vector.size() != dimension_) throw Error(Errc::DimensionMismatch, "vector for '" + token + "'");
  auto [it, inserted] = index_.emplace(std::move(token), index_.size());
  if (!inserted) return false;
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

EmbeddingModel EmbeddingModel::scaled(double factor) const {
  EmbeddingModel out = *this;
  for (double& v : out.data_) v *= factor;
  return out;
}

std::vector<std::string> tokenize_subpath(std::string_view subpath, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.count(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : subpath) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vector combined_embedding(std::span<const std::string> tokens, const EmbeddingSource& model) {
  Vector sum(model.dimension(), 0.0);
  for (const auto& t : tokens) {
    auto v = model.find(t);
    if (v.empty()) continue;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
  }
  return sum;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "cosine of vectors with different lengths");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace dibets
