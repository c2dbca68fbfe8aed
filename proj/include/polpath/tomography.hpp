// Copyright 2026 The polpath Authors
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

#ifndef POLPATH_TOMOGRAPHY_HPP
#define POLPATH_TOMOGRAPHY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polpath/density.hpp"

namespace polpath {

/// Single-photon polarization analyzers. R = (H + iV)/sqrt(2), L = (H - iV)/sqrt(2).
enum class Analyzer { H, V, D, A, R, L };

std::string analyzer_name(Analyzer a);
Analyzer parse_analyzer(const std::string &s);  // AnalysisError on unknown names
Eigen::Vector2cd analyzer_ket(Analyzer a);

struct TomographySetting {
    Analyzer q1;
    Analyzer q2;
    bool operator==(const TomographySetting &) const = default;
};

/// All 36 products of the six analyzers, q1 major.
std::vector<TomographySetting> standard_settings();
Eigen::Matrix4cd projector(const TomographySetting &s);

/// Per-setting coincidence counts. Values are non-negative reals so that
/// infinite-statistics data (expected counts) fit the same type.
struct TomographyData {
    std::vector<TomographySetting> settings;
    std::vector<double> counts;

    double total() const;
    std::string to_csv() const;
    static TomographyData from_csv(const std::string &text);  // AnalysisError on bad input
};

/// Expected count per setting is Tr(rho P) * shots. With a seed the counts
/// are Poisson draws (sub-seeded per setting); without one they are the
/// expected values.
TomographyData simulate_tomography(const DensityMatrix &rho, const std::vector<TomographySetting> &settings,
                                   double shots, std::optional<std::uint64_t> seed);

/// Least-squares estimate over the 16 Pauli coefficients, scaled to unit
/// trace. Hermitian but possibly not positive. Throws AnalysisError if the
/// settings are not informationally complete or the counts vanish.
Eigen::Matrix4cd linear_inversion(const TomographyData &data);

/// Nearest physical state in the 2-norm: eigenvalues are clipped and the
/// deficit spread over the survivors.
DensityMatrix project_to_physical(const Eigen::Matrix4cd &m);

/// Poisson log-likelihood with the overall rate profiled out.
double log_likelihood(const DensityMatrix &rho, const TomographyData &data);

struct MleResult {
    DensityMatrix rho;
    double log_likelihood;
    std::size_t iterations;
    bool converged;
};

inline constexpr std::size_t kMleIterationCap = 100000;

/// Maximum-likelihood state with rho = A A^dagger, A lower triangular.
/// Stops when one step improves the log-likelihood by less than `tolerance`.
/// When the cap is hit the best iterate comes back with converged = false.
MleResult mle_reconstruct(const TomographyData &data, double tolerance = 1e-10);

/// Haar-like random mixed state from a complex Ginibre matrix.
DensityMatrix random_density_matrix(std::uint64_t seed);

}  // namespace polpath

#endif
