#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "updown/embeddings.hpp"
#include "updown/error.hpp"
#include "updown/instance.hpp"

namespace updown::testing {

inline std::filesystem::path tmp_dir(const std::string& name) {
  auto dir = std::filesystem::path(UPDOWN_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline WordEmbeddings make_embeddings(const std::vector<std::string>& tokens,
                                      const std::vector<std::vector<double>>& rows) {
  RowMatrix m(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return WordEmbeddings(tokens, m);
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected updown::Error");
}

}  // namespace updown::testing
