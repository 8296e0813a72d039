#include "updown/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "updown/error.hpp"

namespace updown {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_count(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

WordEmbeddings::WordEmbeddings(std::vector<std::string> tokens, RowMatrix matrix)
    : matrix_(std::move(matrix)) {
  if (static_cast<Eigen::Index>(tokens.size()) != matrix_.rows())
    throw Error(ErrorCode::DimensionMismatch, "token count differs from matrix rows");
  RowMatrix kept(matrix_.rows(), matrix_.cols());
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (index_.contains(tokens[i])) {
      ++duplicate_count_;
      continue;
    }
    index_.emplace(tokens[i], tokens_.size());
    tokens_.push_back(std::move(tokens[i]));
    kept.row(row++) = matrix_.row(static_cast<Eigen::Index>(i));
  }
  kept.conservativeResize(row, matrix_.cols());
  matrix_ = std::move(kept);
}

std::optional<std::size_t> WordEmbeddings::index(std::string_view token) const {
  const std::string key = map_numbers_ && is_numeric_token(token)
                              ? std::string(kNumberToken)
                              : std::string(token);
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vector WordEmbeddings::lookup(std::string_view token) const {
  if (const auto row = index(token))
    return matrix_.row(static_cast<Eigen::Index>(*row)).transpose();
  return Vector::Zero(matrix_.cols());
}

bool is_numeric_token(std::string_view token) {
  bool digit = false;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const char c = token[i];
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c == '.' || c == ',' || ((c == '-' || c == '+') && i == 0)) {
      continue;
    } else {
      return false;
    }
  }
  return digit;
}

WordEmbeddings parse_embeddings(std::istream& in,
                                std::optional<std::size_t> expected_dim) {
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::optional<std::size_t> dim = expected_dim;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (first_content) {
      first_content = false;
      if (fields.size() == 2 && is_count(fields[0]) && is_count(fields[1]) &&
          std::stoul(std::string(fields[1])) != 1)
        continue;  // "V K" header
    }
    const std::size_t k = fields.size() - 1;
    if (k == 0 || (dim && *dim != k))
      throw Error(ErrorCode::DimensionMismatch,
                  "expected " + std::to_string(dim.value_or(1)) +
                      " values, found " + std::to_string(k),
                  line_no);
    dim = k;
    tokens.emplace_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const auto v = parse_double(fields[j]);
      if (!v)
        throw Error(ErrorCode::MalformedNumber,
                    "cannot parse '" + std::string(fields[j]) + "'", line_no);
      values.push_back(*v);
    }
  }
  if (tokens.empty()) throw Error(ErrorCode::EmptyFile, "no embedding rows");
  RowMatrix m(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(*dim));
  std::copy(values.begin(), values.end(), m.data());
  return WordEmbeddings(std::move(tokens), std::move(m));
}

WordEmbeddings load_embeddings(const std::string& path,
                               std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open embeddings file " + path);
  return parse_embeddings(in, expected_dim);
}

void write_embeddings(std::ostream& out, const WordEmbeddings& emb) {
  char buf[64];
  const auto& m = emb.matrix();
  for (std::size_t i = 0; i < emb.vocab_size(); ++i) {
    out << emb.tokens()[i];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, m(static_cast<Eigen::Index>(i), j));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

void save_embeddings(const std::string& path, const WordEmbeddings& emb) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_embeddings(out, emb);
}

WordEmbeddings standardize(const WordEmbeddings& emb) {
  const auto rows = static_cast<double>(emb.vocab_size());
  if (emb.vocab_size() < 2)
    throw Error(ErrorCode::TooFewRows, "standardization needs at least 2 rows");
  WordEmbeddings out = emb;
  out.zero_variance_dims_.clear();
  RowMatrix& m = out.matrix_;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    auto col = m.col(j);
    const double mean = col.sum() / rows;
    col.array() -= mean;
    const double var = col.squaredNorm() / rows;
    if (var == 0.0 || !std::isfinite(var)) {
      col.setZero();
      out.zero_variance_dims_.push_back(static_cast<std::size_t>(j));
      continue;
    }
    col /= std::sqrt(var);
  }
  return out;
}

}  // namespace updown
