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

#include "polpath/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "polpath/error.hpp"
#include "polpath/noise.hpp"

namespace polpath {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::array<Eigen::Matrix2cd, 4> paulis() {
    Eigen::Matrix2cd i = Eigen::Matrix2cd::Identity(), x, y, z;
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    return {i, x, y, z};
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd &a, const Eigen::Matrix2cd &b) {
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

Eigen::Matrix4cd setting_sum(const TomographyData &data) {
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    for (const auto &t : data.settings) s += projector(t);
    return s;
}

double profiled_log_likelihood(const Eigen::Matrix4cd &rho_unnormalized, const TomographyData &data,
                               const std::vector<Eigen::Matrix4cd> &projectors) {
    double total = 0;
    for (std::size_t k = 0; k < projectors.size(); k++) {
        double lambda = (rho_unnormalized * projectors[k]).trace().real();
        if (data.counts[k] > 0) {
            if (lambda <= 0) return -std::numeric_limits<double>::infinity();
            total += data.counts[k] * std::log(lambda);
        }
        total -= lambda;
    }
    return total;
}

}  // namespace

std::string analyzer_name(Analyzer a) {
    switch (a) {
        case Analyzer::H: return "H";
        case Analyzer::V: return "V";
        case Analyzer::D: return "D";
        case Analyzer::A: return "A";
        case Analyzer::R: return "R";
        case Analyzer::L: return "L";
    }
    return "?";
}

Analyzer parse_analyzer(const std::string &s) {
    for (Analyzer a : {Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::A, Analyzer::R, Analyzer::L}) {
        if (analyzer_name(a) == s) return a;
    }
    throw AnalysisError("unknown analyzer \"" + s + "\"");
}

Eigen::Vector2cd analyzer_ket(Analyzer a) {
    switch (a) {
        case Analyzer::H: return {1, 0};
        case Analyzer::V: return {0, 1};
        case Analyzer::D: return {kInvSqrt2, kInvSqrt2};
        case Analyzer::A: return {kInvSqrt2, -kInvSqrt2};
        case Analyzer::R: return {kInvSqrt2, Complex(0, kInvSqrt2)};
        case Analyzer::L: return {kInvSqrt2, Complex(0, -kInvSqrt2)};
    }
    return {0, 0};
}

std::vector<TomographySetting> standard_settings() {
    const std::array all{Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::A, Analyzer::R, Analyzer::L};
    std::vector<TomographySetting> out;
    for (Analyzer a : all)
        for (Analyzer b : all) out.push_back({a, b});
    return out;
}

Eigen::Matrix4cd projector(const TomographySetting &s) {
    Eigen::Vector2cd a = analyzer_ket(s.q1), b = analyzer_ket(s.q2);
    return kron(a * a.adjoint(), b * b.adjoint());
}

double TomographyData::total() const {
    double t = 0;
    for (double c : counts) t += c;
    return t;
}

std::string TomographyData::to_csv() const {
    std::string out = "setting_q1,setting_q2,counts\n";
    char buf[64];
    for (std::size_t k = 0; k < settings.size(); k++) {
        std::snprintf(buf, sizeof buf, "%.17g", counts[k]);
        out += analyzer_name(settings[k].q1) + "," + analyzer_name(settings[k].q2) + "," + buf + "\n";
    }
    return out;
}

TomographyData TomographyData::from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "setting_q1,setting_q2,counts") {
        throw AnalysisError("counts CSV must start with the header setting_q1,setting_q2,counts");
    }
    TomographyData data;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        row++;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string a, b, c;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c)) {
            throw AnalysisError("counts CSV row " + std::to_string(row) + " needs three fields");
        }
        double v;
        try {
            std::size_t used = 0;
            v = std::stod(trim(c), &used);
            if (used != trim(c).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception &) {
            throw AnalysisError("counts CSV row " + std::to_string(row) + ": bad count \"" + c + "\"");
        }
        if (!(v >= 0) || !std::isfinite(v)) throw AnalysisError("counts must be finite and non-negative");
        data.settings.push_back({parse_analyzer(trim(a)), parse_analyzer(trim(b))});
        data.counts.push_back(v);
    }
    return data;
}

TomographyData simulate_tomography(const DensityMatrix &rho, const std::vector<TomographySetting> &settings,
                                   double shots, std::optional<std::uint64_t> seed) {
    if (!(shots > 0) || !std::isfinite(shots)) throw DomainError("shots must be positive and finite");
    if (settings.empty()) throw DomainError("no tomography settings");
    TomographyData data{settings, {}};
    for (std::size_t k = 0; k < settings.size(); k++) {
        double p = std::clamp((rho.matrix() * projector(settings[k])).trace().real(), 0.0, 1.0);
        if (seed) {
            data.counts.push_back(static_cast<double>(sample_counts(p, shots, 1.0, derive_seed(*seed, k))));
        } else {
            data.counts.push_back(p * shots);
        }
    }
    return data;
}

Eigen::Matrix4cd linear_inversion(const TomographyData &data) {
    const std::size_t m = data.settings.size();
    if (m != data.counts.size()) throw AnalysisError("settings and counts differ in length");
    if (m < 16) throw AnalysisError("fewer than 16 settings cannot determine a two-qubit state");
    if (data.total() <= 0) throw AnalysisError("all counts are zero");

    const auto p = paulis();
    std::array<Eigen::Matrix4cd, 16> basis;
    for (int a = 0; a < 4; a++)
        for (int b = 0; b < 4; b++) basis[4 * a + b] = kron(p[a], p[b]);

    // counts_s = sum_k c_k Tr(sigma_k P_s) / 4 with real c_k.
    Eigen::MatrixXd design(m, 16);
    Eigen::VectorXd y(m);
    for (std::size_t s = 0; s < m; s++) {
        Eigen::Matrix4cd proj = projector(data.settings[s]);
        for (int k = 0; k < 16; k++) design(s, k) = (basis[k] * proj).trace().real() / 4.0;
        y(s) = data.counts[s];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 16) throw AnalysisError("tomography settings are not informationally complete");
    Eigen::VectorXd c = qr.solve(y);
    if (!(c(0) > 0)) throw AnalysisError("reconstructed state has non-positive trace");

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < 16; k++) rho += (c(k) / c(0)) * basis[k] / 4.0;
    return (rho + rho.adjoint()) / 2.0;
}

DensityMatrix project_to_physical(const Eigen::Matrix4cd &m) {
    Eigen::Matrix4cd h = (m + m.adjoint()) / 2.0;
    const double tr = h.trace().real();
    if (!(tr > 0)) throw AnalysisError("cannot project a matrix with non-positive trace");
    h /= tr;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
    Eigen::Vector4d lambda = es.eigenvalues();  // ascending
    // Zero the most negative eigenvalues and spread their weight evenly over
    // the rest until what remains is non-negative.
    double deficit = 0;
    int i = 0;
    for (; i < 4; i++) {
        if (lambda(i) + deficit / (4 - i) >= 0) break;
        deficit += lambda(i);
        lambda(i) = 0;
    }
    for (int j = i; j < 4; j++) lambda(j) += deficit / (4 - i);
    Eigen::Matrix4cd rho = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    rho = (rho + rho.adjoint()) / 2.0;
    rho /= rho.trace().real();
    return DensityMatrix(rho);
}

double log_likelihood(const DensityMatrix &rho, const TomographyData &data) {
    std::vector<Eigen::Matrix4cd> projectors;
    for (const auto &s : data.settings) projectors.push_back(projector(s));
    const double scale = data.total() / (rho.matrix() * setting_sum(data)).trace().real();
    return profiled_log_likelihood(scale * rho.matrix(), data, projectors);
}

MleResult mle_reconstruct(const TomographyData &data, double tolerance) {
    if (!(tolerance > 0)) throw DomainError("MLE tolerance must be positive");
    const Eigen::Matrix4cd start_li = linear_inversion(data);
    const std::size_t m = data.settings.size();

    // Real coordinates of the lower-triangular factor A: four real diagonal
    // entries, then real and imaginary parts of the six entries below it.
    std::vector<Eigen::Matrix4cd> units;
    for (int i = 0; i < 4; i++) {
        Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
        e(i, i) = 1;
        units.push_back(e);
    }
    for (int i = 1; i < 4; i++) {
        for (int j = 0; j < i; j++) {
            Eigen::Matrix4cd e = Eigen::Matrix4cd::Zero();
            e(i, j) = 1;
            units.push_back(e);
            e(i, j) = Complex(0, 1);
            units.push_back(e);
        }
    }
    constexpr int kDim = 16;
    using Vec = Eigen::Matrix<double, kDim, 1>;
    using Mat = Eigen::Matrix<double, kDim, kDim>;

    // lambda_s = x^T Q_s x with Q_s(i, j) = Re Tr(E_i E_j^dagger P_s).
    std::vector<Mat> q(m);
    Mat q_total = Mat::Zero();
    for (std::size_t s = 0; s < m; s++) {
        const Eigen::Matrix4cd proj = projector(data.settings[s]);
        for (int i = 0; i < kDim; i++)
            for (int j = 0; j <= i; j++) {
                q[s](i, j) = q[s](j, i) = (units[i] * units[j].adjoint() * proj).trace().real();
            }
        q_total += q[s];
    }
    auto objective = [&](const Vec &x) {
        double total = -x.dot(q_total * x);
        for (std::size_t s = 0; s < m; s++) {
            if (data.counts[s] <= 0) continue;
            const double lambda = x.dot(q[s] * x);
            if (lambda <= 0) return -std::numeric_limits<double>::infinity();
            total += data.counts[s] * std::log(lambda);
        }
        return total;
    };
    auto to_factor = [&](const Vec &x) {
        Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < kDim; i++) a += x(i) * units[i];
        return a;
    };

    Eigen::Matrix4cd start = project_to_physical(start_li).matrix();
    start = 0.999 * start + 0.001 * Eigen::Matrix4cd::Identity() / 4.0;
    start *= data.total() / (start * setting_sum(data)).trace().real();
    const Eigen::Matrix4cd a0 = start.llt().matrixL();
    Vec x;
    for (int i = 0; i < 4; i++) x(i) = a0(i, i).real();
    for (int i = 1, k = 4; i < 4; i++) {
        for (int j = 0; j < i; j++) {
            x(k++) = a0(i, j).real();
            x(k++) = a0(i, j).imag();
        }
    }

    // Levenberg-Marquardt damped Newton ascent.
    double value = objective(x);
    double mu = 1e-3;
    std::size_t iter = 0;
    bool converged = false;
    for (; iter < kMleIterationCap; iter++) {
        Vec grad = -2.0 * q_total * x;
        Mat hess = -2.0 * q_total;
        for (std::size_t s = 0; s < m; s++) {
            if (data.counts[s] <= 0) continue;
            const Vec qx = q[s] * x;
            const double lambda = x.dot(qx);
            grad += (2.0 * data.counts[s] / lambda) * qx;
            hess += data.counts[s] * (2.0 * q[s] / lambda - (4.0 / (lambda * lambda)) * qx * qx.transpose());
        }
        const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        bool accepted = false;
        double gain = 0;
        while (mu < 1e20) {
            Mat sys = -hess + mu * scale * Mat::Identity();
            Vec step = sys.ldlt().solve(grad);
            const double trial = objective(x + step);
            if (std::isfinite(trial) && trial > value) {
                gain = trial - value;
                x += step;
                value = trial;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if (!accepted || gain < tolerance) {
            converged = true;
            iter++;
            break;
        }
    }

    const Eigen::Matrix4cd a = to_factor(x);
    Eigen::Matrix4cd rho = a * a.adjoint();
    rho = (rho + rho.adjoint()) / 2.0;
    rho /= rho.trace().real();
    DensityMatrix out(rho);
    return {out, log_likelihood(out, data), iter, converged};
}

DensityMatrix random_density_matrix(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 4; j++) m(i, j) = Complex(g(rng), g(rng));
    Eigen::Matrix4cd rho = m * m.adjoint();
    rho = (rho + rho.adjoint()) / 2.0;
    return DensityMatrix(rho / rho.trace().real());
}

}  // namespace polpath
