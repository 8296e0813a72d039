#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace updown {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::string_view kNumberToken = "<num>";

// Pre-trained word vectors. Out-of-vocabulary tokens map to the all-zero
// vector; with `map_numbers` set, numeric tokens are looked up as "<num>".
class WordEmbeddings {
 public:
  WordEmbeddings() = default;
  WordEmbeddings(std::vector<std::string> tokens, RowMatrix matrix);

  std::size_t vocab_size() const { return tokens_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.cols()); }
  const RowMatrix& matrix() const { return matrix_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<std::size_t> index(std::string_view token) const;
  bool contains(std::string_view token) const { return index(token).has_value(); }
  Vector lookup(std::string_view token) const;

  bool map_numbers() const { return map_numbers_; }
  void set_map_numbers(bool on) { map_numbers_ = on; }

  // Lines dropped because their token had already been seen.
  std::size_t duplicate_count() const { return duplicate_count_; }
  // Dimensions that had zero variance when standardized (left at 0).
  const std::vector<std::size_t>& zero_variance_dims() const { return zero_variance_dims_; }

 private:
  friend WordEmbeddings parse_embeddings(std::istream&, std::optional<std::size_t>);
  friend WordEmbeddings standardize(const WordEmbeddings&);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  RowMatrix matrix_;
  bool map_numbers_ = false;
  std::size_t duplicate_count_ = 0;
  std::vector<std::size_t> zero_variance_dims_;
};

bool is_numeric_token(std::string_view token);

// Text format "token v1 ... vK", one entry per line. An optional leading
// "V K" header line (word2vec convention) is skipped. First occurrence of a
// duplicated token wins. Throws Error{DimensionMismatch | MalformedNumber |
// EmptyFile} with the 1-based line number.
WordEmbeddings parse_embeddings(std::istream& in,
                                std::optional<std::size_t> expected_dim = std::nullopt);
WordEmbeddings load_embeddings(const std::string& path,
                               std::optional<std::size_t> expected_dim = std::nullopt);

// Shortest round-trip decimal form, so reloading is bit-exact.
void write_embeddings(std::ostream& out, const WordEmbeddings& emb);
void save_embeddings(const std::string& path, const WordEmbeddings& emb);

// Per dimension: subtract the vocabulary mean and divide by the population
// standard deviation. Zero-variance dimensions become all-zero and are
// reported in zero_variance_dims(). Throws Error{TooFewRows} when V < 2.
WordEmbeddings standardize(const WordEmbeddings& emb);

}  // namespace updown
