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

#include "polpath/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polpath/error.hpp"

namespace polpath {

namespace {

constexpr double kUnitarityTolerance = 1e-12;

double factorial(std::uint32_t n) {
    double f = 1;
    for (std::uint32_t k = 2; k <= n; k++) f *= k;
    return f;
}

}  // namespace

ModeUnitary::ModeUnitary(std::vector<std::size_t> modes, Eigen::MatrixXcd matrix)
    : modes_(std::move(modes)), matrix_(std::move(matrix)) {
    const auto k = static_cast<Eigen::Index>(modes_.size());
    if (matrix_.rows() != k || matrix_.cols() != k) {
        throw DomainError("mode unitary dimension does not match its mode list");
    }
    for (std::size_t i = 0; i < modes_.size(); i++) {
        for (std::size_t j = 0; j < i; j++) {
            if (modes_[i] == modes_[j]) throw DomainError("mode unitary lists a mode twice");
        }
    }
    double err = (matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
    if (k > 0 && err > kUnitarityTolerance) {
        throw DomainError("matrix is not unitary (max |U^dag U - I| = " + std::to_string(err) + ")");
    }
}

ModeUnitary ModeUnitary::identity(std::vector<std::size_t> modes) {
    auto k = static_cast<Eigen::Index>(modes.size());
    return ModeUnitary(std::move(modes), Eigen::MatrixXcd::Identity(k, k));
}

double WaveplateSetting::normalized_angle() const {
    double a = std::fmod(angle, std::numbers::pi);
    if (a < 0) a += std::numbers::pi;
    if (a >= std::numbers::pi) a = 0;
    return a;
}

ModeUnitary beam_splitter(double reflectivity, std::size_t mode_a, std::size_t mode_b) {
    if (!(reflectivity > 0 && reflectivity < 1)) {
        throw DomainError("beam splitter reflectivity must lie in (0, 1), got " + std::to_string(reflectivity));
    }
    if (mode_a == mode_b) throw DomainError("beam splitter needs two distinct modes");
    const Complex t{std::sqrt(1 - reflectivity), 0};
    const Complex r{0, std::sqrt(reflectivity)};
    Eigen::Matrix2cd m;
    m << t, r, r, t;
    return ModeUnitary({mode_a, mode_b}, m);
}

ModeUnitary path_beam_splitter(const ModeRegistry &reg, double reflectivity, const std::string &path_a,
                               const std::string &path_b) {
    if (path_a == path_b) throw DomainError("beam splitter needs two distinct paths");
    auto h = beam_splitter(reflectivity, reg.index(path_a, Polarization::H), reg.index(path_b, Polarization::H));
    auto v = beam_splitter(reflectivity, reg.index(path_a, Polarization::V), reg.index(path_b, Polarization::V));
    return compose(v, h);
}

ModeUnitary pbs(const ModeRegistry &reg, const std::string &path_a, const std::string &path_b) {
    if (path_a == path_b) throw DomainError("PBS needs two distinct paths");
    // Order: aH, aV, bH, bV.
    std::vector<std::size_t> modes{reg.index(path_a, Polarization::H), reg.index(path_a, Polarization::V),
                                   reg.index(path_b, Polarization::H), reg.index(path_b, Polarization::V)};
    const Complex i{0, 1};
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1;
    m(2, 2) = 1;
    m(3, 1) = i;
    m(1, 3) = i;
    return ModeUnitary(std::move(modes), m);
}

Eigen::Matrix2cd jones_matrix(WaveplateSetting setting) {
    const double t = setting.normalized_angle();
    Eigen::Matrix2cd m;
    if (setting.kind == WaveplateKind::half) {
        m << std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t);
    } else {
        const double c = std::cos(t);
        const double s = std::sin(t);
        const Complex i{0, 1};
        m << c * c + i * s * s, (1.0 - i) * s * c, (1.0 - i) * s * c, s * s + i * c * c;
    }
    return m;
}

ModeUnitary waveplate(const ModeRegistry &reg, WaveplateSetting setting, const std::string &path) {
    return ModeUnitary(reg.path_modes(path), jones_matrix(setting));
}

ModeUnitary phase_shift(const ModeRegistry &reg, const std::string &path, double phi) {
    const Complex p = std::polar(1.0, phi);
    Eigen::Matrix2cd m;
    m << p, 0, 0, p;
    return ModeUnitary(reg.path_modes(path), m);
}

ModeUnitary path_swap(const ModeRegistry &reg, const std::string &path_a, const std::string &path_b) {
    if (path_a == path_b) throw DomainError("path swap needs two distinct paths");
    std::vector<std::size_t> modes = reg.path_modes(path_a);
    for (auto m : reg.path_modes(path_b)) modes.push_back(m);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(2, 0) = m(3, 1) = m(0, 2) = m(1, 3) = 1;
    return ModeUnitary(std::move(modes), m);
}

double sagnac_loop_phase(double alpha) { return 4 * alpha - std::numbers::pi / 2; }

ElementChain sagnac(const ModeRegistry &reg, double alpha, const std::string &in_path, const std::string &path_c,
                    const std::string &path_d) {
    if (in_path == path_c || in_path == path_d || path_c == path_d) {
        throw DomainError("Sagnac input, C and D paths must be distinct");
    }
    ElementChain chain;
    chain.then(pbs(reg, in_path, path_d))
        .then(path_swap(reg, in_path, path_c))
        .then(phase_shift(reg, path_d, sagnac_loop_phase(alpha)));
    return chain;
}

ElementChain path_merge_bs(const ModeRegistry &reg, const std::string &path_c, const std::string &path_d,
                           double phase) {
    ElementChain chain;
    chain.then(phase_shift(reg, path_d, phase)).then(path_beam_splitter(reg, 0.5, path_c, path_d));
    return chain;
}

ModeUnitary compose(const ModeUnitary &b, const ModeUnitary &a) {
    std::vector<std::size_t> modes = a.modes();
    for (auto m : b.modes()) {
        if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
    }
    const auto k = static_cast<Eigen::Index>(modes.size());
    auto embed = [&](const ModeUnitary &u) {
        Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(k, k);
        std::vector<Eigen::Index> pos;
        for (auto m : u.modes()) pos.push_back(std::find(modes.begin(), modes.end(), m) - modes.begin());
        for (std::size_t r = 0; r < pos.size(); r++) {
            for (std::size_t c = 0; c < pos.size(); c++) {
                full(pos[r], pos[c]) = u.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
        return full;
    };
    Eigen::MatrixXcd product = embed(b) * embed(a);
    return ModeUnitary(std::move(modes), product);
}

ModeUnitary compose(const ElementChain &chain) {
    if (chain.elements.empty()) return ModeUnitary::identity({});
    ModeUnitary total = chain.elements.front();
    for (std::size_t k = 1; k < chain.elements.size(); k++) total = compose(chain.elements[k], total);
    return total;
}

PhotonicState apply(const ModeUnitary &u, const PhotonicState &s) {
    const std::size_t m_count = s.registry().size();
    for (auto m : u.modes()) {
        if (m >= m_count) throw DomainError("element acts on mode " + std::to_string(m) + " outside the registry");
    }
    // Image of a†_j as a list of (mode, coefficient).
    std::vector<std::vector<std::pair<std::size_t, Complex>>> image(m_count);
    for (std::size_t j = 0; j < m_count; j++) image[j] = {{j, Complex{1, 0}}};
    for (std::size_t c = 0; c < u.modes().size(); c++) {
        auto &col = image[u.modes()[c]];
        col.clear();
        for (std::size_t r = 0; r < u.modes().size(); r++) {
            Complex v = u.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (v != Complex{}) col.emplace_back(u.modes()[r], v);
        }
    }

    std::map<Occupation, Complex> out;
    std::vector<std::size_t> creators;
    Occupation current(m_count, 0);
    for (const auto &[occ, amp] : s.terms()) {
        creators.clear();
        double in_norm = 1;
        for (std::size_t j = 0; j < m_count; j++) {
            for (std::uint32_t k = 0; k < occ[j]; k++) creators.push_back(j);
            in_norm *= factorial(occ[j]);
        }
        const Complex prefactor = amp / std::sqrt(in_norm);
        std::fill(current.begin(), current.end(), 0);
        // Expand the product of substituted creation operators term by term.
        auto expand = [&](auto &&self, std::size_t depth, Complex coeff) -> void {
            if (depth == creators.size()) {
                double out_norm = 1;
                for (auto n : current) out_norm *= factorial(n);
                out[current] += prefactor * coeff * std::sqrt(out_norm);
                return;
            }
            for (const auto &[mode, v] : image[creators[depth]]) {
                current[mode]++;
                self(self, depth + 1, coeff * v);
                current[mode]--;
            }
        };
        expand(expand, 0, Complex{1, 0});
    }
    return PhotonicState(s.registry_ptr(), std::move(out));
}

PhotonicState apply(const ElementChain &chain, const PhotonicState &s) {
    PhotonicState out = s;
    for (const auto &e : chain.elements) out = apply(e, out);
    return out;
}

PhotonicState apply(const Element &element, const PhotonicState &s) {
    return std::visit([&](const auto &e) { return apply(e, s); }, element);
}

}  // namespace polpath
