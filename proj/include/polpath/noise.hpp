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

#ifndef POLPATH_NOISE_HPP
#define POLPATH_NOISE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polpath/density.hpp"
#include "polpath/fock.hpp"

namespace polpath {

/// The imperfection budget: two-photon indistinguishability p (internal
/// wavefunction overlap) and the Sagnac fringe visibility v_s, which scales
/// the C/D coherence.
struct NoiseModel {
    double indistinguishability = 1.0;
    double sagnac_visibility = 0.995;

    static NoiseModel ideal() { return {1.0, 1.0}; }
    /// p = 0.97 (visibility relative to ideal) and v_s = 0.995.
    static NoiseModel measured() { return {0.97, 0.995}; }
    bool is_ideal() const { return indistinguishability == 1.0 && sagnac_visibility == 1.0; }
    void validate() const;
};

/// Exactly `count` photons must land in the union of `modes`.
struct ModeGroup {
    std::vector<std::size_t> modes;
    std::uint32_t count = 1;
};

/// A detection event: every group registers its required photon count.
/// Groups must not share modes.
struct DetectionPattern {
    std::vector<ModeGroup> groups;

    bool matches(const Occupation &occ) const;
    /// One photon in each listed group of paths (all polarizations).
    static DetectionPattern one_photon_per(const ModeRegistry &reg,
                                           const std::vector<std::vector<std::string>> &path_groups);
};

struct WeightedState {
    double weight;
    PhotonicState state;
};

/// Incoherent mixture of pure photonic states. Weights are probabilities.
using Ensemble = std::vector<WeightedState>;

struct PostSelected {
    std::optional<PhotonicState> state;  // empty when probability is 0
    double probability = 0;
};

struct PostSelectedEnsemble {
    Ensemble conditional;  // normalized members, weights summing to 1
    double probability = 0;
};

PostSelected post_select(const PhotonicState &s, const DetectionPattern &pattern);
PostSelectedEnsemble post_select(const Ensemble &e, const DetectionPattern &pattern);

/// Reads a one-photon-per-arm state as a two-qubit polarization vector.
/// Throws DomainError if any term leaves that subspace.
PolarizationVector polarization_vector(const PhotonicState &s, const std::string &arm1, const std::string &arm2);

/// Reduced polarization density matrix of a post-selected ensemble. Each
/// arm is a group of paths a detector cannot tell apart (for example a
/// path and its distinguishable-photon twin); which path in the group the
/// photon took is traced out.
DensityMatrix polarization_density(const Ensemble &e, const std::vector<std::string> &arm1,
                                   const std::vector<std::string> &arm2);

/// Mixes the interfering outcome with its distinguishable-photon
/// counterpart: the |HV><VH| coherences are multiplied by p.
DensityMatrix dephase_by_distinguishability(const PolarizationVector &psi, double p);
DensityMatrix dephase_by_distinguishability(const PhotonicState &s, const std::string &arm1, const std::string &arm2,
                                            double p);

/// Suffix naming the path that carries the distinguishable photon's copy
/// of `path` (an orthogonal internal state).
inline std::string twin_path(const std::string &path) { return path + "~"; }

/// HOM test with co-polarized inputs |1H>_1|1H>_2 through a beam splitter of
/// reflectivity R, simulated as an ensemble of indistinguishable (weight p)
/// and distinguishable (weight 1-p) pairs.
double hom_coincidence_probability(double reflectivity, double p);
/// (P_distinguishable - P_p) / P_distinguishable.
double hom_visibility(double reflectivity, double p);

/// Poisson draw with mean probability * rate * integration. Deterministic
/// for a given seed (std::mt19937_64 + std::poisson_distribution).
std::uint64_t sample_counts(double probability, double rate, double integration, std::uint64_t seed);

/// Independent sub-seed for item `index` of a run seeded with `seed`
/// (splitmix64 finalizer over both).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace polpath

#endif
