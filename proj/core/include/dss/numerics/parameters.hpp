// Copyright 2026 The DSS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dss/numerics/autograd.hpp"

namespace dss::num {

/// Ordered name -> parameter registry. Names are unique.
class ParameterSet {
 public:
  void add(std::string name, Var param);
  void append(const ParameterSet& other);

  const Var& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<Var> vars() const;
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

/// Glorot-uniform matrix of shape {rows, cols}.
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace dss::num
