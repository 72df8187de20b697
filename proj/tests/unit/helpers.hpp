#pragma once

#include <initializer_list>

#include <doctest.h>

#include "proxtd/error.hpp"
#include "proxtd/linalg.hpp"

namespace testing {

inline proxtd::Vector vec(std::initializer_list<double> values) {
  proxtd::Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline proxtd::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  proxtd::Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline double dist(const proxtd::Vector& a, const proxtd::Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

template <class F>
proxtd::ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const proxtd::Error& e) {
    return e.code();
  }
  FAIL("no proxtd::Error thrown");
  return proxtd::ErrorCode::BadParams;
}

}  // namespace testing
