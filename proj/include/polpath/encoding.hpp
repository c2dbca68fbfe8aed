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

#ifndef POLPATH_ENCODING_HPP
#define POLPATH_ENCODING_HPP

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polpath/fock.hpp"
#include "polpath/mbqc.hpp"

namespace polpath {

/// One optical mode that a photon slot may occupy, with the logical bits it
/// stands for and a convention phase multiplied into the amplitude.
struct ModeAssignment {
    ModeLabel mode;
    int pol_bit = 0;
    std::optional<int> path_bit;
    Complex phase{1, 0};
};

/// A photon: its polarization qubit, an optional path qubit, and the modes
/// that carry it.
struct PhotonSlot {
    std::size_t pol_qubit = 0;
    std::optional<std::size_t> path_qubit;
    std::vector<ModeAssignment> modes;
};

/// Explicit photonic-to-logical dictionary. Every logical qubit belongs to
/// exactly one slot; within a slot, distinct modes carry distinct bit
/// patterns and every bit pattern is reachable.
struct EncodingMap {
    std::vector<PhotonSlot> slots;

    std::size_t qubits() const;
    void validate() const;  // DomainError on violation

    nlohmann::ordered_json to_json() const;
    static EncodingMap from_json(const nlohmann::json &j);  // ConfigError on bad shape

    /// Photon 1 in `arm1`, photon 2 in `arm2`, H->1, V->0 with no phases.
    /// The HWP(22.5 deg) output then reads (|0+> + |1->)/sqrt(2) up to a
    /// global sign.
    static EncodingMap two_qubit(const std::string &arm1 = "1", const std::string &arm2 = "2");
    /// Polarization-only map sharing the frame of cluster_frame(): the -1 sits
    /// on photon 2's V, which the loop carries into V_D.
    static EncodingMap pre_loop(const std::string &arm1 = "1", const std::string &arm2 = "2");
    /// Three-qubit map after the loop. Photon 1: H->1, V->0. Photon 2:
    /// H_C -> |1>_2|1>_3, V_D -> -|0>_2|0>_3. Takes the loop output to
    /// (|+00> - |-11>)/sqrt(2) exactly.
    static EncodingMap cluster_frame(const std::string &arm1 = "1", const std::string &path_c = "C",
                                     const std::string &path_d = "D");
    /// The relabeling as printed: H_C -> |1>_2|0>_3, V_D -> |0>_2|1>_3.
    static EncodingMap literal(const std::string &arm1 = "1", const std::string &path_c = "C",
                               const std::string &path_d = "D");
    /// Named preset: "two_qubit", "pre_loop", "cluster_frame", "literal".
    static EncodingMap preset(const std::string &name);
};

/// Reads a photonic state in the logical basis. Throws DomainError naming the
/// first occupation that the map cannot express.
QubitState to_logical(const PhotonicState &s, const EncodingMap &map);

/// Logical-level bookkeeping of a photonic cluster: the state, its graph, and
/// which qubits each photon carries.
struct PhotonCluster {
    QubitState state;
    GraphSpec graph;
    struct Slot {
        std::size_t pol_qubit;
        std::optional<std::size_t> path_qubit;
    };
    std::vector<Slot> slots;

    /// Graph cluster with one polarization qubit per node.
    static PhotonCluster polarization_cluster(const GraphSpec &graph);
};

/// The PBS step on photon `slot`: a new path qubit is appended and bonded to
/// that photon's polarization qubit. The default reproduces the optics,
/// CNOT(pol -> path)|psi>|0> = H_path CZ |psi>|+>; `trailing_hadamard`
/// adds the H on the path qubit so the result is CZ |psi>|+>, the textbook
/// cluster on the extended graph.
PhotonCluster add_path_qubit(const PhotonCluster &cluster, std::size_t slot, bool trailing_hadamard = false);

/// New state with qubit k moved to position perm[k].
QubitState permute_qubits(const QubitState &s, const std::vector<std::size_t> &perm);

struct CnotCase {
    Polarization polarization;
    int path_in;   // 0: first PBS port, 1: second
    Polarization out_polarization;
    int path_out;
    Complex phase;  // amplitude of the single output term
};

/// Exhaustive check that a PBS acts as CNOT with the polarization as control
/// (V = 1 flips) and the port as target, up to diagonal phases.
struct CnotReport {
    std::vector<CnotCase> cases;
    bool is_cnot = false;
    /// Phases that a map must absorb, one per (polarization, output port).
    std::vector<std::string> absorbed_phases;

    nlohmann::ordered_json to_json() const;
};

CnotReport pbs_is_cnot_check();

}  // namespace polpath

#endif
