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

#ifndef POLPATH_OPTICS_HPP
#define POLPATH_OPTICS_HPP

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "polpath/fock.hpp"

namespace polpath {

/// A unitary acting on the creation operators of a subset of modes:
/// a†_{modes[j]} -> sum_k matrix(k, j) a†_{modes[k]}. Modes not listed are
/// untouched.
class ModeUnitary {
   public:
    /// Throws DomainError unless U†U = I within 1e-12 and modes are distinct.
    ModeUnitary(std::vector<std::size_t> modes, Eigen::MatrixXcd matrix);

    static ModeUnitary identity(std::vector<std::size_t> modes);

    const std::vector<std::size_t> &modes() const { return modes_; }
    const Eigen::MatrixXcd &matrix() const { return matrix_; }

   private:
    std::vector<std::size_t> modes_;
    Eigen::MatrixXcd matrix_;
};

/// Elements applied left to right.
struct ElementChain {
    std::vector<ModeUnitary> elements;

    ElementChain &then(ModeUnitary u) {
        elements.push_back(std::move(u));
        return *this;
    }
    ElementChain &then(const ElementChain &c) {
        elements.insert(elements.end(), c.elements.begin(), c.elements.end());
        return *this;
    }
};

using Element = std::variant<ModeUnitary, ElementChain>;

enum class WaveplateKind { half, quarter };

struct WaveplateSetting {
    WaveplateKind kind;
    double angle;  // fast axis from horizontal, radians

    /// Angle reduced to [0, pi).
    double normalized_angle() const;
};

/// Beam splitter between two single modes with reflectivity R in (0, 1).
/// Transmission amplitude sqrt(1-R), reflection amplitude i*sqrt(R).
ModeUnitary beam_splitter(double reflectivity, std::size_t mode_a, std::size_t mode_b);

/// The same beam splitter acting on both polarizations of two paths.
ModeUnitary path_beam_splitter(const ModeRegistry &reg, double reflectivity, const std::string &path_a,
                               const std::string &path_b);

/// Polarizing beam splitter: H stays in its path, V swaps paths and picks
/// up a factor i.
ModeUnitary pbs(const ModeRegistry &reg, const std::string &path_a, const std::string &path_b);

/// Jones matrix on the (H, V) modes of one path.
///   HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
///   QWP(t) = R(t) diag(1, i) R(-t), R = rotation matrix
/// No global phase beyond these matrices.
ModeUnitary waveplate(const ModeRegistry &reg, WaveplateSetting setting, const std::string &path);
Eigen::Matrix2cd jones_matrix(WaveplateSetting setting);

/// e^{i phi} on both polarization modes of a path.
ModeUnitary phase_shift(const ModeRegistry &reg, const std::string &path, double phi);

/// Exchanges two paths, polarization by polarization.
ModeUnitary path_swap(const ModeRegistry &reg, const std::string &path_a, const std::string &path_b);

/// Aggregate phase that the plates inside the loop add to the D arm. The
/// PBS reflection contributes i, so the loop plates supply e^{i(4 alpha - pi/2)}
/// and D ends up e^{i 4 alpha} ahead of C.
double sagnac_loop_phase(double alpha);

/// PBS Sagnac loop entered from `in_path`: H continues in C, V in D, with
/// relative phase e^{i 4 alpha} on D. C and D are left separate; they are
/// the two rails of the path qubit. Requires C and D to be empty on input.
ElementChain sagnac(const ModeRegistry &reg, double alpha, const std::string &in_path, const std::string &path_c,
                    const std::string &path_d);

/// Phase shift on D followed by a balanced BS between C and D, for reading
/// the path qubit in a rotated basis.
ElementChain path_merge_bs(const ModeRegistry &reg, const std::string &path_c, const std::string &path_d,
                           double phase);

/// compose(b, a) acts as "a, then b", on the union of both mode sets.
ModeUnitary compose(const ModeUnitary &b, const ModeUnitary &a);
ModeUnitary compose(const ElementChain &chain);

PhotonicState apply(const ModeUnitary &u, const PhotonicState &s);
PhotonicState apply(const ElementChain &chain, const PhotonicState &s);
PhotonicState apply(const Element &element, const PhotonicState &s);

}  // namespace polpath

#endif
