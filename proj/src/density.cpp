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

#include "polpath/density.hpp"

#include <cmath>
#include <string>

#include "polpath/error.hpp"

namespace polpath {

DensityMatrix::DensityMatrix(const Eigen::Matrix4cd &m) : m_(m) {
    double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw DomainError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    double tr = m_.trace().real();
    if (std::abs(tr - 1) > 1e-10) throw DomainError("density matrix trace is " + std::to_string(tr));
    double lowest = eigenvalues().minCoeff();
    if (lowest < -1e-8) throw DomainError("density matrix has eigenvalue " + std::to_string(lowest));
}

DensityMatrix DensityMatrix::pure(const PolarizationVector &psi) {
    double n = psi.squaredNorm();
    if (std::abs(n - 1) > 1e-10) throw DomainError("pure state is not normalized");
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(Eigen::Matrix4cd::Identity() / 4.0); }

Eigen::Vector4d DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

nlohmann::ordered_json matrix_to_json(const Eigen::Matrix4cd &m) {
    nlohmann::ordered_json j;
    j["re"] = nlohmann::ordered_json::array();
    j["im"] = nlohmann::ordered_json::array();
    for (int r = 0; r < 4; r++) {
        std::vector<double> re, im;
        for (int c = 0; c < 4; c++) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
        j["re"].push_back(re);
        j["im"].push_back(im);
    }
    return j;
}

nlohmann::ordered_json DensityMatrix::to_json() const { return matrix_to_json(m_); }

DensityMatrix DensityMatrix::from_json(const nlohmann::json &j) {
    Eigen::Matrix4cd m;
    for (int r = 0; r < 4; r++) {
        for (int c = 0; c < 4; c++) {
            m(r, c) = {j.at("re").at(r).at(c).get<double>(), j.at("im").at(r).at(c).get<double>()};
        }
    }
    return DensityMatrix(m);
}

double fidelity_pure(const DensityMatrix &rho, const PolarizationVector &psi) {
    if (std::abs(psi.squaredNorm() - 1) > 1e-10) throw DomainError("fidelity target is not normalized");
    return std::clamp((psi.adjoint() * rho.matrix() * psi)(0, 0).real(), 0.0, 1.0);
}

double purity(const DensityMatrix &rho) { return (rho.matrix() * rho.matrix()).trace().real(); }

double trace_distance(const Eigen::Matrix4cd &rho, const Eigen::Matrix4cd &sigma) {
    Eigen::Matrix4cd d = rho - sigma;
    d = (d + d.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(d, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum() / 2;
}

}  // namespace polpath
