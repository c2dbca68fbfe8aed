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

#ifndef POLPATH_DENSITY_HPP
#define POLPATH_DENSITY_HPP

#include <Eigen/Dense>

#include "json.hpp"

namespace polpath {

/// Two-qubit polarization state in the basis |HH>, |HV>, |VH>, |VV>
/// (photon in arm 1 first).
using PolarizationVector = Eigen::Vector4cd;

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix. The invariants
/// are checked on construction (Hermitian and trace within 1e-10, smallest
/// eigenvalue >= -1e-8).
class DensityMatrix {
   public:
    explicit DensityMatrix(const Eigen::Matrix4cd &m);

    static DensityMatrix pure(const PolarizationVector &psi);
    static DensityMatrix maximally_mixed();

    const Eigen::Matrix4cd &matrix() const { return m_; }
    Eigen::Vector4d eigenvalues() const;

    nlohmann::ordered_json to_json() const;
    static DensityMatrix from_json(const nlohmann::json &j);

   private:
    Eigen::Matrix4cd m_;
};

/// <psi|rho|psi> for normalized psi.
double fidelity_pure(const DensityMatrix &rho, const PolarizationVector &psi);
double purity(const DensityMatrix &rho);
/// (1/2) || rho - sigma ||_1, from the eigenvalues of the difference.
double trace_distance(const Eigen::Matrix4cd &rho, const Eigen::Matrix4cd &sigma);
inline double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return trace_distance(rho.matrix(), sigma.matrix());
}

nlohmann::ordered_json matrix_to_json(const Eigen::Matrix4cd &m);

}  // namespace polpath

#endif
