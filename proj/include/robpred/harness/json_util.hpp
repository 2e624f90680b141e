// JSON has no literal for infinities or NaN; they are written as the strings
// "inf", "-inf" and "nan" and decoded back to the same doubles.
#pragma once

#include <robpred/core/types.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace robpred::harness {

using Json = nlohmann::json;

inline Json encode_number(double x) {
  if (std::isnan(x)) return "nan";
  if (x == kInf) return "inf";
  if (x == kNegInf) return "-inf";
  return x;
}

inline double decode_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    if (s == "-inf") return kNegInf;
  }
  throw ConfigError("expected a number, got " + j.dump());
}

inline Json encode_vector(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(encode_number(v(i)));
  return out;
}

inline Json encode_vector(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(encode_number(x));
  return out;
}

inline std::vector<double> decode_vector(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(decode_number(x));
  return out;
}

inline Json encode_matrix(const Matrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(encode_number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace robpred::harness
