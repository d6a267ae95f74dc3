// Copyright 2026 The Hypertune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hypertune/param_space.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace hypertune {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail_dim(const std::string& name, const std::string& what) {
  throw std::invalid_argument("dimension '" + name + "': " + what);
}

}  // namespace

const char* to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kLinear: return "linear";
    case ParamKind::kPow10Affine: return "pow10_affine";
    case ParamKind::kPow2Affine: return "pow2_affine";
    case ParamKind::kDoubleExp10: return "double_exp10";
    case ParamKind::kOneMinusPow10: return "one_minus_pow10";
  }
  return "?";
}

ParamKind param_kind_from_string(const std::string& s) {
  if (s == "linear") return ParamKind::kLinear;
  if (s == "pow10_affine") return ParamKind::kPow10Affine;
  if (s == "pow2_affine") return ParamKind::kPow2Affine;
  if (s == "double_exp10") return ParamKind::kDoubleExp10;
  if (s == "one_minus_pow10") return ParamKind::kOneMinusPow10;
  throw std::invalid_argument("unknown kind '" + s + "'");
}

double transform_continuous(const ParamSpec& spec, double x) {
  switch (spec.kind) {
    case ParamKind::kLinear:
      return spec.a + spec.b * x;
    case ParamKind::kPow10Affine:
      return std::pow(10.0, spec.a + spec.b * x);
    case ParamKind::kPow2Affine:
      return std::exp2(spec.a + spec.b * x);
    case ParamKind::kDoubleExp10:
      return std::pow(10.0, spec.a + std::pow(10.0, spec.b * x));
    case ParamKind::kOneMinusPow10:
      return 1.0 - std::pow(10.0, spec.a + spec.b * x);
  }
  throw std::logic_error("unreachable");
}

double transform_value(const ParamSpec& spec, double x) {
  const double v = transform_continuous(spec, x);
  return spec.integer_round ? std::floor(v + 0.5) : v;
}

double inverse_value(const ParamSpec& spec, double value) {
  const auto [vlo, vhi] = value_interval(spec);
  if (!(value >= vlo && value <= vhi)) {
    fail_dim(spec.name, "value " + format_double(value) +
                            " outside the admissible interval [" +
                            format_double(vlo) + ", " + format_double(vhi) + "]");
  }
  switch (spec.kind) {
    case ParamKind::kLinear:
      return (value - spec.a) / spec.b;
    case ParamKind::kPow10Affine:
      return (std::log10(value) - spec.a) / spec.b;
    case ParamKind::kPow2Affine:
      return (std::log2(value) - spec.a) / spec.b;
    case ParamKind::kDoubleExp10:
      return std::log10(std::log10(value) - spec.a) / spec.b;
    case ParamKind::kOneMinusPow10:
      return (std::log10(1.0 - value) - spec.a) / spec.b;
  }
  throw std::logic_error("unreachable");
}

std::pair<double, double> value_interval(const ParamSpec& spec) {
  const double v0 = transform_continuous(spec, 0.0);
  const double v1 = transform_continuous(spec, 1.0);
  return {std::min(v0, v1), std::max(v0, v1)};
}

std::vector<double> transform(const SearchSpace& space, const Eigen::VectorXd& genotype) {
  if (genotype.size() != space.dim_count()) {
    throw std::invalid_argument("genotype dimension mismatch");
  }
  std::vector<double> out(space.dims.size());
  for (size_t i = 0; i < space.dims.size(); ++i) {
    const double x = genotype[static_cast<Eigen::Index>(i)];
    if (!(x >= 0.0 && x <= 1.0)) {
      fail_dim(space.dims[i].name, "genotype coordinate " + format_double(x) +
                                       " outside [0,1]");
    }
    out[i] = transform_value(space.dims[i], x);
  }
  return out;
}

Eigen::VectorXd inverse_transform(const SearchSpace& space,
                                  const std::map<std::string, double>& values) {
  if (values.size() != space.dims.size()) {
    throw std::invalid_argument("value map has " + std::to_string(values.size()) +
                                " entries, space has " +
                                std::to_string(space.dims.size()));
  }
  Eigen::VectorXd x(space.dim_count());
  for (size_t i = 0; i < space.dims.size(); ++i) {
    const auto it = values.find(space.dims[i].name);
    if (it == values.end()) {
      fail_dim(space.dims[i].name, "missing from the value map");
    }
    x[static_cast<Eigen::Index>(i)] = inverse_value(space.dims[i], it->second);
  }
  return x;
}

void validate_space(const SearchSpace& space) {
  if (space.dims.empty()) {
    throw std::invalid_argument("space has no dimensions");
  }
  std::set<std::string> names;
  for (const ParamSpec& d : space.dims) {
    if (d.name.empty()) throw std::invalid_argument("dimension with empty name");
    if (!names.insert(d.name).second) fail_dim(d.name, "duplicate name");
    if (d.b == 0.0) fail_dim(d.name, "b must be nonzero");
    if (!(d.lo < d.hi)) fail_dim(d.name, "declared range requires lo < hi");
    if (d.kind != ParamKind::kDoubleExp10) {
      const auto [vlo, vhi] = value_interval(d);
      const double scale = std::max({std::abs(d.lo), std::abs(d.hi), 1e-300});
      if (std::abs(vlo - d.lo) > 1e-9 * scale || std::abs(vhi - d.hi) > 1e-9 * scale) {
        fail_dim(d.name, "transform endpoints [" + format_double(vlo) + ", " +
                             format_double(vhi) +
                             "] disagree with the declared range [" +
                             format_double(d.lo) + ", " + format_double(d.hi) + "]");
      }
    }
  }
}

namespace {

// One "dim" record per line, key=value fields. The serializer always emits
// the canonical order name, kind, a, b, integer_round, lo, hi; the parser
// accepts the fields in any order.
constexpr char kFieldOrder[][14] = {"name", "kind", "a", "b", "integer_round", "lo", "hi"};

double parse_number(const std::string& text, int line_no, const std::string& field) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": field '" +
                                field + "': not a number: '" + text + "'");
  }
}

}  // namespace

SearchSpace parse_space(const std::string& text) {
  SearchSpace space;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head != "dim") {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected a 'dim' record, got '" + head + "'");
    }
    ParamSpec spec;
    std::set<std::string> present;
    std::string token;
    while (fields >> token) {
      const size_t eq = token.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": malformed field '" + token +
                                    "' (expected key=value)");
      }
      const std::string key = token.substr(0, eq);
      const std::string val = token.substr(eq + 1);
      if (!present.insert(key).second) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": field '" + key + "' given twice");
      }
      if (key == "name") {
        spec.name = val;
      } else if (key == "kind") {
        try {
          spec.kind = param_kind_from_string(val);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                      e.what());
        }
      } else if (key == "a") {
        spec.a = parse_number(val, line_no, key);
      } else if (key == "b") {
        spec.b = parse_number(val, line_no, key);
      } else if (key == "integer_round") {
        if (val != "0" && val != "1") {
          throw std::invalid_argument("line " + std::to_string(line_no) +
                                      ": field 'integer_round' must be 0 or 1");
        }
        spec.integer_round = val == "1";
      } else if (key == "lo") {
        spec.lo = parse_number(val, line_no, key);
      } else if (key == "hi") {
        spec.hi = parse_number(val, line_no, key);
      } else {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": unknown field '" + key + "'");
      }
    }
    for (const auto& required : kFieldOrder) {
      if (!present.count(required)) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": missing field '" + std::string(required) + "'");
      }
    }
    space.dims.push_back(std::move(spec));
  }
  if (space.dims.empty()) {
    throw std::invalid_argument("space file contains no dimensions");
  }
  try {
    validate_space(space);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("invalid space: ") + e.what());
  }
  return space;
}

std::string serialize_space(const SearchSpace& space) {
  std::string out;
  for (const ParamSpec& d : space.dims) {
    out += "dim name=" + d.name + " kind=" + to_string(d.kind) +
           " a=" + format_double(d.a) + " b=" + format_double(d.b) +
           " integer_round=" + (d.integer_round ? "1" : "0") +
           " lo=" + format_double(d.lo) + " hi=" + format_double(d.hi) + "\n";
  }
  return out;
}

namespace {

ParamSpec dim_spec(const char* name, ParamKind kind, double a, double b,
                   bool integer_round, double lo, double hi) {
  ParamSpec s;
  s.name = name;
  s.kind = kind;
  s.a = a;
  s.b = b;
  s.integer_round = integer_round;
  s.lo = lo;
  s.hi = hi;
  return s;
}

}  // namespace

SearchSpace builtin_space(const std::string& tag) {
  const bool adam = tag == "mnist_adam";
  if (!adam && tag != "mnist_adadelta") {
    throw std::invalid_argument("unknown builtin space '" + tag + "'");
  }
  using K = ParamKind;
  SearchSpace s;
  s.dims = {
      dim_spec("selection_pressure_start", K::kDoubleExp10, -2, 2, false, 1e-2, 1e98),
      dim_spec("selection_pressure_end", K::kDoubleExp10, -2, 2, false, 1e-2, 1e98),
      dim_spec("batch_size_start", K::kPow2Affine, 4, 4, true, 16, 256),
      dim_spec("batch_size_end", K::kPow2Affine, 4, 4, true, 16, 256),
      dim_spec("loss_recompute_freq", K::kLinear, 0, 2, false, 0, 2),
      dim_spec("batchnorm_alpha", K::kLinear, 0.01, 0.2, false, 0.01, 0.21),
      dim_spec("batchnorm_epsilon", K::kPow10Affine, -8, 5, false, 1e-8, 1e-3),
      dim_spec("dropout_pool1", K::kLinear, 0, 0.8, false, 0, 0.8),
      dim_spec("dropout_pool2", K::kLinear, 0, 0.8, false, 0, 0.8),
      dim_spec("dropout_output", K::kLinear, 0, 0.8, false, 0, 0.8),
      dim_spec("conv1_filters", K::kPow2Affine, 3, 5, true, 8, 256),
      dim_spec("conv2_filters", K::kPow2Affine, 3, 5, true, 8, 256),
      dim_spec("dense_units", K::kPow2Affine, 4, 5, true, 16, 512),
  };
  if (adam) {
    s.dims.push_back(dim_spec("learning_rate_start", K::kPow10Affine, -1, -3, false, 1e-4, 1e-1));
    s.dims.push_back(dim_spec("learning_rate_end", K::kPow10Affine, -3, -3, false, 1e-6, 1e-3));
    s.dims.push_back(dim_spec("beta1", K::kLinear, 0.8, 0.199, false, 0.8, 0.999));
    s.dims.push_back(dim_spec("optimizer_epsilon", K::kPow10Affine, -3, -6, false, 1e-9, 1e-3));
    s.dims.push_back(dim_spec("beta2", K::kOneMinusPow10, -2, -2, false, 0.99, 0.9999));
  } else {
    s.dims.push_back(dim_spec("learning_rate_start", K::kPow10Affine, 0.5, -2, false,
                              std::pow(10.0, -1.5), std::pow(10.0, 0.5)));
    s.dims.push_back(dim_spec("learning_rate_end", K::kPow10Affine, 0.5, -2, false,
                              std::pow(10.0, -1.5), std::pow(10.0, 0.5)));
    s.dims.push_back(dim_spec("rho", K::kLinear, 0.8, 0.199, false, 0.8, 0.999));
    s.dims.push_back(dim_spec("optimizer_epsilon", K::kPow10Affine, -3, -6, false, 1e-9, 1e-3));
  }
  s.dims.push_back(dim_spec("adaptation_end_epoch", K::kLinear, 20, 200, true, 20, 220));
  validate_space(s);
  return s;
}

std::vector<std::string> builtin_space_tags() {
  return {"mnist_adadelta", "mnist_adam"};
}

}  // namespace hypertune
