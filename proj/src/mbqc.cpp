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

#include "polpath/mbqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "polpath/error.hpp"

namespace polpath {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t bit_of(std::size_t n, std::size_t qubit) { return std::size_t{1} << (n - 1 - qubit); }

void require_qubit(const QubitState &s, std::size_t q) {
    if (q >= s.qubits()) {
        throw DomainError("qubit index " + std::to_string(q) + " out of range for " + std::to_string(s.qubits()) +
                          "-qubit state");
    }
}

}  // namespace

QubitState::QubitState(std::size_t n, std::vector<Complex> amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    if (n_ > kMaxQubits) throw DomainError("statevector limited to " + std::to_string(kMaxQubits) + " qubits");
    if (amps_.size() != (std::size_t{1} << n_)) throw DomainError("amplitude vector length must be 2^n");
}

QubitState QubitState::zeros(std::size_t n) {
    if (n > kMaxQubits) throw DomainError("statevector limited to " + std::to_string(kMaxQubits) + " qubits");
    std::vector<Complex> a(std::size_t{1} << n);
    a[0] = 1;
    return QubitState(n, std::move(a));
}

QubitState QubitState::plus(std::size_t n) {
    if (n > kMaxQubits) throw DomainError("statevector limited to " + std::to_string(kMaxQubits) + " qubits");
    const std::size_t dim = std::size_t{1} << n;
    return QubitState(n, std::vector<Complex>(dim, Complex{1.0 / std::sqrt(static_cast<double>(dim)), 0}));
}

QubitState QubitState::from_kets(std::initializer_list<std::vector<Complex>> single_qubit_states) {
    std::vector<Complex> amps{1};
    for (const auto &ket : single_qubit_states) {
        if (ket.size() != 2) throw DomainError("single-qubit ket needs two amplitudes");
        std::vector<Complex> next;
        next.reserve(amps.size() * 2);
        for (auto a : amps) {
            next.push_back(a * ket[0]);
            next.push_back(a * ket[1]);
        }
        amps = std::move(next);
    }
    return QubitState(single_qubit_states.size(), std::move(amps));
}

double QubitState::norm() const {
    double t = 0;
    for (auto a : amps_) t += std::norm(a);
    return std::sqrt(t);
}

nlohmann::ordered_json QubitState::to_json() const {
    nlohmann::ordered_json j;
    j["qubits"] = n_;
    j["re"] = nlohmann::ordered_json::array();
    j["im"] = nlohmann::ordered_json::array();
    for (auto a : amps_) {
        j["re"].push_back(a.real());
        j["im"].push_back(a.imag());
    }
    return j;
}

double overlap(const QubitState &a, const QubitState &b) {
    if (a.qubits() != b.qubits()) throw DomainError("overlap of states with different qubit counts");
    Complex t{};
    for (std::size_t k = 0; k < a.amplitudes().size(); k++) t += std::conj(a.amplitude(k)) * b.amplitude(k);
    return std::abs(t);
}

QubitState normalized(const QubitState &s) {
    double n = s.norm();
    if (n <= 1e-12) throw DomainError("cannot normalize a zero statevector");
    auto amps = s.amplitudes();
    for (auto &a : amps) a /= n;
    return QubitState(s.qubits(), std::move(amps));
}

void GraphSpec::validate() const {
    if (nodes == 0) throw DomainError("graph has no nodes");
    if (nodes > kMaxQubits) throw DomainError("graph exceeds the " + std::to_string(kMaxQubits) + "-qubit limit");
    for (std::size_t k = 0; k < edges.size(); k++) {
        auto [a, b] = edges[k];
        if (a >= nodes || b >= nodes) throw DomainError("edge endpoint out of range");
        if (a == b) throw DomainError("self-loop on node " + std::to_string(a));
        for (std::size_t j = 0; j < k; j++) {
            auto [c, d] = edges[j];
            if ((a == c && b == d) || (a == d && b == c)) {
                throw DomainError("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
            }
        }
    }
}

GraphSpec GraphSpec::line(std::size_t n) {
    GraphSpec g{n, {}};
    for (std::size_t k = 0; k + 1 < n; k++) g.edges.emplace_back(k, k + 1);
    return g;
}

bool GraphSpec::has_edge(std::size_t a, std::size_t b) const {
    return std::any_of(edges.begin(), edges.end(), [&](const auto &e) {
        return (e.first == a && e.second == b) || (e.first == b && e.second == a);
    });
}

namespace gates {

Gate1 hadamard() {
    Gate1 m;
    m << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
    return m;
}

Gate1 pauli_x() {
    Gate1 m;
    m << 0, 1, 1, 0;
    return m;
}

Gate1 pauli_z() {
    Gate1 m;
    m << 1, 0, 0, -1;
    return m;
}

Gate1 rz(double phi) {
    Gate1 m;
    m << 1, 0, 0, std::polar(1.0, phi);
    return m;
}

Gate1 rx(double phi) { return hadamard() * rz(phi) * hadamard(); }

}  // namespace gates

QubitState apply_1q(const QubitState &s, std::size_t qubit, const Gate1 &u) {
    require_qubit(s, qubit);
    double err = (u.adjoint() * u - Gate1::Identity()).cwiseAbs().maxCoeff();
    if (err > 1e-12) throw DomainError("single-qubit gate is not unitary");
    auto amps = s.amplitudes();
    const std::size_t bit = bit_of(s.qubits(), qubit);
    for (std::size_t k = 0; k < amps.size(); k++) {
        if (k & bit) continue;
        Complex a0 = amps[k];
        Complex a1 = amps[k | bit];
        amps[k] = u(0, 0) * a0 + u(0, 1) * a1;
        amps[k | bit] = u(1, 0) * a0 + u(1, 1) * a1;
    }
    return QubitState(s.qubits(), std::move(amps));
}

QubitState apply_cz(const QubitState &s, std::size_t a, std::size_t b) {
    require_qubit(s, a);
    require_qubit(s, b);
    if (a == b) throw DomainError("CZ needs two distinct qubits");
    auto amps = s.amplitudes();
    const std::size_t mask = bit_of(s.qubits(), a) | bit_of(s.qubits(), b);
    for (std::size_t k = 0; k < amps.size(); k++) {
        if ((k & mask) == mask) amps[k] = -amps[k];
    }
    return QubitState(s.qubits(), std::move(amps));
}

QubitState apply_cnot(const QubitState &s, std::size_t control, std::size_t target) {
    require_qubit(s, control);
    require_qubit(s, target);
    if (control == target) throw DomainError("CNOT needs two distinct qubits");
    auto amps = s.amplitudes();
    const std::size_t c = bit_of(s.qubits(), control);
    const std::size_t t = bit_of(s.qubits(), target);
    for (std::size_t k = 0; k < amps.size(); k++) {
        if ((k & c) && !(k & t)) std::swap(amps[k], amps[k | t]);
    }
    return QubitState(s.qubits(), std::move(amps));
}

QubitState append_qubit(const QubitState &s, const std::array<Complex, 2> &ket) {
    std::vector<Complex> amps;
    amps.reserve(s.amplitudes().size() * 2);
    for (auto a : s.amplitudes()) {
        amps.push_back(a * ket[0]);
        amps.push_back(a * ket[1]);
    }
    return QubitState(s.qubits() + 1, std::move(amps));
}

QubitState build_cluster(const GraphSpec &graph) {
    graph.validate();
    QubitState s = QubitState::plus(graph.nodes);
    for (auto [a, b] : graph.edges) s = apply_cz(s, a, b);
    return s;
}

std::array<Complex, 2> basis_ket(double phi, int outcome) {
    if (outcome != 0 && outcome != 1) throw DomainError("measurement outcome must be 0 or 1");
    const double sign = outcome == 0 ? 1.0 : -1.0;
    return {Complex{kInvSqrt2, 0}, sign * kInvSqrt2 * std::polar(1.0, -phi)};
}

namespace {

/// <ket|_qubit applied to s, leaving n-1 qubits (unnormalized).
std::vector<Complex> project_out(const QubitState &s, std::size_t qubit, const std::array<Complex, 2> &ket) {
    const std::size_t n = s.qubits();
    const std::size_t bit = bit_of(n, qubit);
    const std::size_t low_mask = bit - 1;
    std::vector<Complex> out(std::size_t{1} << (n - 1));
    for (std::size_t r = 0; r < out.size(); r++) {
        std::size_t k0 = ((r & ~low_mask) << 1) | (r & low_mask);
        out[r] = std::conj(ket[0]) * s.amplitude(k0) + std::conj(ket[1]) * s.amplitude(k0 | bit);
    }
    return out;
}

double squared_norm(const std::vector<Complex> &v) {
    double t = 0;
    for (auto a : v) t += std::norm(a);
    return t;
}

}  // namespace

std::array<double, 2> outcome_probabilities(const QubitState &s, std::size_t qubit, double phi) {
    require_qubit(s, qubit);
    double total = s.norm() * s.norm();
    if (total <= 0) throw DomainError("cannot measure a zero statevector");
    return {squared_norm(project_out(s, qubit, basis_ket(phi, 0))) / total,
            squared_norm(project_out(s, qubit, basis_ket(phi, 1))) / total};
}

MeasurementResult measure_B(const QubitState &s, std::size_t qubit, double phi, std::optional<int> forced_outcome,
                            std::mt19937_64 *rng) {
    require_qubit(s, qubit);
    if (s.qubits() < 1) throw DomainError("nothing to measure");
    auto probs = outcome_probabilities(s, qubit, phi);
    int outcome;
    if (forced_outcome) {
        outcome = *forced_outcome;
        if (outcome != 0 && outcome != 1) throw DomainError("measurement outcome must be 0 or 1");
        if (probs[outcome] <= 1e-12) {
            throw DomainError("forced outcome " + std::to_string(outcome) + " has zero probability");
        }
    } else {
        if (rng == nullptr) throw DomainError("unforced measurement needs a random generator");
        std::uniform_real_distribution<double> u(0.0, 1.0);
        outcome = u(*rng) < probs[0] ? 0 : 1;
    }
    auto projected = project_out(s, qubit, basis_ket(phi, outcome));
    const double n = std::sqrt(squared_norm(projected));
    for (auto &a : projected) a /= n;
    return {{qubit, phi, outcome, probs[outcome]}, QubitState(s.qubits() - 1, std::move(projected))};
}

QubitState mbqc_output_oracle(double phi1, double phi2, int m1, int m2) {
    if ((m1 != 0 && m1 != 1) || (m2 != 0 && m2 != 1)) throw DomainError("outcomes must be 0 or 1");
    Eigen::Vector2cd v(kInvSqrt2, kInvSqrt2);
    v = gates::rz(phi1) * v;
    v = gates::rx(phi2) * v;
    if (m1) v = gates::pauli_z() * v;
    if (m2) v = gates::pauli_x() * v;
    return QubitState(1, {v(0), v(1)});
}

FeedForward feed_forward_select(int m1) {
    if (m1 != 0 && m1 != 1) throw DomainError("outcome must be 0 or 1");
    return m1 == 0 ? FeedForward::plus : FeedForward::minus;
}

double adapted_angle(double phi2, int m1) { return static_cast<int>(feed_forward_select(m1)) * phi2; }

QubitState correct_byproduct(const QubitState &residual, int m1, int m2) {
    QubitState s = residual;
    if (m2) s = apply_1q(s, 0, gates::pauli_x());
    if (m1) s = apply_1q(s, 0, gates::pauli_z());
    return s;
}

BlochVector bloch_vector(const QubitState &one_qubit) {
    if (one_qubit.qubits() != 1) throw DomainError("Bloch vector needs a single-qubit state");
    auto s = normalized(one_qubit);
    Complex a = s.amplitude(0), b = s.amplitude(1);
    Complex ab = std::conj(a) * b;
    return {2 * ab.real(), 2 * ab.imag(), std::norm(a) - std::norm(b)};
}

MbqcRun run_two_step_mbqc(const QubitState &cluster3, double phi1, double phi2,
                          std::optional<std::pair<int, int>> branch, std::mt19937_64 *rng) {
    if (cluster3.qubits() != 3) throw DomainError("two-step protocol expects a three-qubit state");
    auto first = measure_B(cluster3, 0, phi1, branch ? std::optional<int>(branch->first) : std::nullopt, rng);
    const double angle2 = adapted_angle(phi2, first.record.outcome);
    auto second = measure_B(first.post, 0, angle2, branch ? std::optional<int>(branch->second) : std::nullopt, rng);
    second.record.qubit = 1;
    return {first.record, second.record, second.post};
}

}  // namespace polpath
