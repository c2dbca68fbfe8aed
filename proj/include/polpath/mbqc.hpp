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

#ifndef POLPATH_MBQC_HPP
#define POLPATH_MBQC_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "json.hpp"

namespace polpath {

using Complex = std::complex<double>;
using Gate1 = Eigen::Matrix2cd;

inline constexpr std::size_t kMaxQubits = 16;

/// Dense statevector. Qubit 0 is the most significant bit of the amplitude
/// index, so |q0 q1 ... q_{n-1}> is stored at index sum_k q_k 2^{n-1-k}
/// (the usual Kronecker ordering).
class QubitState {
   public:
    QubitState(std::size_t n, std::vector<Complex> amplitudes);

    static QubitState zeros(std::size_t n);
    static QubitState plus(std::size_t n);
    static QubitState from_kets(std::initializer_list<std::vector<Complex>> single_qubit_states);

    std::size_t qubits() const { return n_; }
    const std::vector<Complex> &amplitudes() const { return amps_; }
    Complex amplitude(std::size_t index) const { return amps_[index]; }
    double norm() const;

    nlohmann::ordered_json to_json() const;

   private:
    std::size_t n_;
    std::vector<Complex> amps_;
};

/// |<a|b>| for normalized states; insensitive to global phase.
double overlap(const QubitState &a, const QubitState &b);
QubitState normalized(const QubitState &s);

/// Undirected simple graph: the nodes are qubits, edges are CZ bonds.
struct GraphSpec {
    std::size_t nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    void validate() const;
    static GraphSpec line(std::size_t n);
    bool has_edge(std::size_t a, std::size_t b) const;
};

namespace gates {
Gate1 hadamard();
Gate1 pauli_x();
Gate1 pauli_z();
/// diag(1, e^{i phi})
Gate1 rz(double phi);
/// H rz(phi) H
Gate1 rx(double phi);
}  // namespace gates

QubitState apply_1q(const QubitState &s, std::size_t qubit, const Gate1 &u);
QubitState apply_cz(const QubitState &s, std::size_t a, std::size_t b);
QubitState apply_cnot(const QubitState &s, std::size_t control, std::size_t target);
/// Appends one qubit in the given single-qubit state at the end.
QubitState append_qubit(const QubitState &s, const std::array<Complex, 2> &ket);

/// All nodes in |+>, one CZ per edge.
QubitState build_cluster(const GraphSpec &graph);

struct MeasurementRecord {
    std::size_t qubit;
    double angle;
    int outcome;  // 0: |phi_+>, 1: |phi_->
    double probability;
};

struct MeasurementResult {
    MeasurementRecord record;
    QubitState post;  // measured qubit removed, renormalized
};

/// |phi_pm> = (|0> pm e^{-i phi}|1>)/sqrt(2); outcome 0 is the + state.
std::array<Complex, 2> basis_ket(double phi, int outcome);

/// Probability of each outcome when measuring `qubit` in B(phi).
std::array<double, 2> outcome_probabilities(const QubitState &s, std::size_t qubit, double phi);

/// Projects `qubit` onto B(phi). With `forced_outcome` the branch is chosen
/// (it must have probability > 1e-12); otherwise it is drawn from `rng`.
MeasurementResult measure_B(const QubitState &s, std::size_t qubit, double phi, std::optional<int> forced_outcome,
                            std::mt19937_64 *rng = nullptr);

/// sigma_x^{m2} sigma_z^{m1} rx(phi2) rz(phi1) |+>.
QubitState mbqc_output_oracle(double phi1, double phi2, int m1, int m2);

/// Sign that the first outcome imposes on the second measurement angle:
/// qubit 2 is measured in B(sign * phi2), sign = (-1)^{m1}. For
/// phi2 = pi/2 this is the same as switching to the |phi_-> branch.
enum class FeedForward { plus = 1, minus = -1 };
FeedForward feed_forward_select(int m1);
double adapted_angle(double phi2, int m1);

/// Undoes the byproduct: sigma_z^{m1} sigma_x^{m2} applied to the residual.
QubitState correct_byproduct(const QubitState &residual, int m1, int m2);

struct BlochVector {
    double x, y, z;
};
BlochVector bloch_vector(const QubitState &one_qubit);

/// Outcome of the two-measurement protocol on a three-qubit linear cluster
/// (qubits 0, 1 measured; qubit 2 carries the output).
struct MbqcRun {
    MeasurementRecord first;
    MeasurementRecord second;
    QubitState residual;
};

/// Measures qubit 0 at phi1, then qubit 1 at the feed-forward adapted
/// angle. `branch` forces (m1, m2); otherwise outcomes are drawn from `rng`.
MbqcRun run_two_step_mbqc(const QubitState &cluster3, double phi1, double phi2,
                          std::optional<std::pair<int, int>> branch, std::mt19937_64 *rng = nullptr);

}  // namespace polpath

#endif
