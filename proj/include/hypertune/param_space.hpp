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
//
// Declarative search space: each dimension maps the genotype coordinate
// x in [0,1] to a named hyperparameter value through one of five closed-form
// transformations, each with a closed-form inverse. The file format is
// described in docs/space_format.md.

#ifndef HYPERTUNE_PARAM_SPACE_HPP_
#define HYPERTUNE_PARAM_SPACE_HPP_

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hypertune {

enum class ParamKind {
  kLinear,         // a + b*x
  kPow10Affine,    // 10^(a + b*x)
  kPow2Affine,     // 2^(a + b*x)
  kDoubleExp10,    // 10^(a + 10^(b*x))
  kOneMinusPow10,  // 1 - 10^(a + b*x)
};

const char* to_string(ParamKind kind);
ParamKind param_kind_from_string(const std::string& s);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kLinear;
  double a = 0;
  double b = 0;
  bool integer_round = false;
  // Declared output range, used for validation and reporting. For every kind
  // except kDoubleExp10 the transform endpoints must match {lo, hi}; the
  // double-exponential rows keep their conventional declared range even
  // though the formula's x=0 value differs (the formula wins).
  double lo = 0;
  double hi = 0;
};

struct SearchSpace {
  std::vector<ParamSpec> dims;
  int dim_count() const { return static_cast<int>(dims.size()); }
};

// Continuous transform of one coordinate (no integer rounding).
double transform_continuous(const ParamSpec& spec, double x);

// Full transform: continuous map, then round-half-up for integer dims.
double transform_value(const ParamSpec& spec, double x);

// Inverse from the continuous value. Integer dims are inverted from the
// given (typically rounded) value, so round trips are exact only for
// non-rounded dims. Throws std::invalid_argument naming the dimension and
// its admissible interval when the value lies outside the transform image.
double inverse_value(const ParamSpec& spec, double value);

// Image of [0,1] under the continuous transform, as a closed interval.
std::pair<double, double> value_interval(const ParamSpec& spec);

std::vector<double> transform(const SearchSpace& space, const Eigen::VectorXd& genotype);
Eigen::VectorXd inverse_transform(const SearchSpace& space,
                                  const std::map<std::string, double>& values);

// Validates all SearchSpace invariants (unique names, b != 0, endpoint
// agreement with the declared range for non-double-exponential kinds);
// throws std::invalid_argument with the offending dimension named.
void validate_space(const SearchSpace& space);

// Parses the flat text format; errors carry line and field context.
SearchSpace parse_space(const std::string& text);
std::string serialize_space(const SearchSpace& space);

// Built-in spaces: "mnist_adadelta" (18 dims) and "mnist_adam" (19 dims).
SearchSpace builtin_space(const std::string& tag);
std::vector<std::string> builtin_space_tags();

}  // namespace hypertune

#endif  // HYPERTUNE_PARAM_SPACE_HPP_
