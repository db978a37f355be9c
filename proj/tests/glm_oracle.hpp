// Copyright 2026 The rprct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// First-order logistic regression fit used as an oracle for the IRLS solver.

#ifndef RPRCT_TESTS_GLM_ORACLE_HPP_
#define RPRCT_TESTS_GLM_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rprct::testing {

using Rows = std::vector<std::vector<double>>;

// Independent fit: plain gradient ascent with step 4 / L, where L bounds the
// Hessian norm by the largest eigenvalue of X'X / 4 (power iteration).
inline std::vector<double> GradientAscentOracle(const Rows& x, const std::vector<std::uint8_t>& y) {
  const std::size_t n = x.size(), p = x[0].size();
  std::vector<double> v(p, 1.0), w(p);
  double top = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0;
      for (std::size_t j = 0; j < p; ++j) dot += x[i][j] * v[j];
      for (std::size_t j = 0; j < p; ++j) w[j] += x[i][j] * dot;
    }
    double norm = 0;
    for (double e : w) norm += e * e;
    norm = std::sqrt(norm);
    top = norm;
    for (std::size_t j = 0; j < p; ++j) v[j] = w[j] / norm;
  }
  const double step = 4.0 / top;
  std::vector<double> beta(p, 0.0), grad(p), prev(p, 0.0), look(p);
  // Nesterov momentum keeps the oracle fast while staying first-order.
  for (int it = 1; it < 2000000; ++it) {
    for (std::size_t j = 0; j < p; ++j) {
      look[j] = beta[j] + (it - 1.0) / (it + 2.0) * (beta[j] - prev[j]);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0;
      for (std::size_t j = 0; j < p; ++j) eta += x[i][j] * look[j];
      const double r = y[i] - 1.0 / (1.0 + std::exp(-eta));
      for (std::size_t j = 0; j < p; ++j) grad[j] += x[i][j] * r;
    }
    double gmax = 0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    prev = beta;
    for (std::size_t j = 0; j < p; ++j) beta[j] = look[j] + step * grad[j];
    if (gmax < 1e-10) break;
  }
  return beta;
}

}  // namespace rprct::testing

#endif  // RPRCT_TESTS_GLM_ORACLE_HPP_
