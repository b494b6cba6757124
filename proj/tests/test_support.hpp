// Copyright 2026 The hetlink Authors
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

#ifndef HETLINK_TESTS_TEST_SUPPORT_HPP
#define HETLINK_TESTS_TEST_SUPPORT_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "hetlink/qstate.hpp"
#include "hetlink/rng.hpp"

#ifndef HETLINK_DATA_DIR
#define HETLINK_DATA_DIR "data"
#endif

namespace hetlink::testing {

inline constexpr int kPropertyCases = 1000;

inline CMatrix ginibre(int rows, int cols, CounterRng& rng) {
  std::normal_distribution<double> n;
  CMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(n(rng), n(rng));
  }
  return g;
}

// Full rank with probability one.
inline DensityMatrix random_density(int dim, CounterRng& rng, int rank = -1) {
  const CMatrix g = ginibre(dim, rank < 0 ? dim : rank, rng);
  CMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(0.5 * (m + m.adjoint()));
}

inline PureState random_pure(int dim, CounterRng& rng) {
  CVector v = ginibre(dim, 1, rng).col(0);
  v.normalize();
  return PureState(v);
}

inline CMatrix random_unitary(int dim, CounterRng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(ginibre(dim, dim, rng));
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

// Single-qubit +-1 observable along a random Bloch direction.
inline Observable random_pm1(CounterRng& rng) {
  std::normal_distribution<double> n;
  double x = n(rng), y = n(rng), z = n(rng);
  const double r = std::sqrt(x * x + y * y + z * z);
  return Observable((x / r) * pauli_matrix('X') + (y / r) * pauli_matrix('Y') + (z / r) * pauli_matrix('Z'));
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline nlohmann::json load_defaults() {
  std::ifstream in(std::string(HETLINK_DATA_DIR) + "/defaults.json");
  return nlohmann::json::parse(in);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("hetlink_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace hetlink::testing

#endif  // HETLINK_TESTS_TEST_SUPPORT_HPP
