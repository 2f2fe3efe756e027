#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dibets/stopwords.hpp"

namespace dibets {

using Vector = std::vector<double>;

// Read access to token vectors. The classifier depends only on this, so
// lookups can be observed or served from another store.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual std::size_t dimension() const = 0;
  // Empty span for out-of-vocabulary tokens.
  virtual std::span<const double> find(std::string_view token) const = 0;
};

/// In-memory word2vec text model. Tokens are lowercased at load; the first
/// occurrence of a duplicate token wins.
class EmbeddingModel final : public EmbeddingSource {
 public:
  EmbeddingModel() = default;
  explicit EmbeddingModel(std::size_t dimension) : dimension_(dimension) {}

  /// Header "vocab_count dimension" then "token v1 ... vd" rows. Throws
  /// MalformedHeader or DimensionMismatch (with the 1-based line number).
  static EmbeddingModel parse(std::string_view document);

  std::size_t dimension() const override { return dimension_; }
  std::span<const double> find(std::string_view token) const override;
  std::size_t size() const { return index_.size(); }

  // Returns false (and keeps the old vector) when the token already exists.
  bool add(std::string token, std::span<const double> vector);
  EmbeddingModel scaled(double factor) const;

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Splits on '-' and every other non-alphanumeric ASCII character, lowercases,
/// and drops stopwords and empty tokens. Non-ASCII bytes are kept as token
/// characters.
std::vector<std::string> tokenize_subpath(std::string_view subpath, const StopwordSet& stopwords);

/// Element-wise sum of in-vocabulary token vectors; zero vector when none hit.
Vector combined_embedding(std::span<const std::string> tokens, const EmbeddingSource& model);

/// dot(a,b)/(|a||b|), defined as 0 when either norm is 0.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace dibets
