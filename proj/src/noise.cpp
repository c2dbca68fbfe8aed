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

#include "polpath/noise.hpp"

#include <cmath>
#include <random>
#include <set>

#include "polpath/error.hpp"
#include "polpath/optics.hpp"

namespace polpath {

void NoiseModel::validate() const {
    if (!(indistinguishability >= 0 && indistinguishability <= 1)) {
        throw DomainError("indistinguishability must lie in [0, 1]");
    }
    if (!(sagnac_visibility >= 0 && sagnac_visibility <= 1)) {
        throw DomainError("sagnac_visibility must lie in [0, 1]");
    }
}

bool DetectionPattern::matches(const Occupation &occ) const {
    for (const auto &g : groups) {
        std::uint32_t n = 0;
        for (auto m : g.modes) {
            if (m >= occ.size()) throw DomainError("detection pattern mode outside the registry");
            n += occ[m];
        }
        if (n != g.count) return false;
    }
    return true;
}

DetectionPattern DetectionPattern::one_photon_per(const ModeRegistry &reg,
                                                  const std::vector<std::vector<std::string>> &path_groups) {
    DetectionPattern pattern;
    std::set<std::string> seen;
    for (const auto &group : path_groups) {
        ModeGroup g;
        for (const auto &path : group) {
            if (!seen.insert(path).second) throw DomainError("path '" + path + "' appears in two detector groups");
            for (auto m : reg.path_modes(path)) g.modes.push_back(m);
        }
        pattern.groups.push_back(std::move(g));
    }
    return pattern;
}

PostSelected post_select(const PhotonicState &s, const DetectionPattern &pattern) {
    std::map<Occupation, Complex> kept;
    for (const auto &[occ, amp] : s.terms()) {
        if (pattern.matches(occ)) kept.emplace(occ, amp);
    }
    PhotonicState projected(s.registry_ptr(), std::move(kept));
    PostSelected out;
    const double kept_norm = projected.norm_squared();
    const double total_norm = s.norm_squared();
    out.probability = total_norm > 0 ? kept_norm / total_norm : 0.0;
    if (out.probability > 0 && !projected.empty()) {
        out.state = scale(projected, Complex{1.0 / std::sqrt(kept_norm), 0});
    } else {
        out.probability = 0;
    }
    return out;
}

PostSelectedEnsemble post_select(const Ensemble &e, const DetectionPattern &pattern) {
    PostSelectedEnsemble out;
    for (const auto &member : e) {
        auto ps = post_select(member.state, pattern);
        double w = member.weight * ps.probability;
        if (ps.state && w > 0) {
            out.conditional.push_back({w, *ps.state});
            out.probability += w;
        }
    }
    for (auto &member : out.conditional) member.weight /= out.probability;
    return out;
}

namespace {

/// Index into |HH>, |HV>, |VH>, |VV>.
int pair_index(Polarization first, Polarization second) {
    return 2 * static_cast<int>(first) + static_cast<int>(second);
}

struct ArmHit {
    Polarization polarization;
    std::size_t path_in_group;
};

/// Locates the single photon in a path group; nullopt unless exactly one.
std::optional<ArmHit> single_photon(const ModeRegistry &reg, const Occupation &occ,
                                    const std::vector<std::string> &group) {
    std::optional<ArmHit> hit;
    std::uint32_t total = 0;
    for (std::size_t g = 0; g < group.size(); g++) {
        for (auto pol : {Polarization::H, Polarization::V}) {
            auto n = occ[reg.index(group[g], pol)];
            total += n;
            if (n == 1) hit = ArmHit{pol, g};
        }
    }
    if (total != 1) return std::nullopt;
    return hit;
}

}  // namespace

PolarizationVector polarization_vector(const PhotonicState &s, const std::string &arm1, const std::string &arm2) {
    PolarizationVector v = PolarizationVector::Zero();
    const auto &reg = s.registry();
    for (const auto &[occ, amp] : s.terms()) {
        auto a = single_photon(reg, occ, {arm1});
        auto b = single_photon(reg, occ, {arm2});
        std::uint32_t total = 0;
        for (auto n : occ) total += n;
        if (!a || !b || total != 2) {
            throw DomainError("term outside the one-photon-per-arm subspace of arms " + arm1 + ", " + arm2);
        }
        v(pair_index(a->polarization, b->polarization)) += amp;
    }
    return v;
}

DensityMatrix polarization_density(const Ensemble &e, const std::vector<std::string> &arm1,
                                   const std::vector<std::string> &arm2) {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double total_weight = 0;
    for (const auto &member : e) {
        const auto &reg = member.state.registry();
        // Environment label (which path in each group) -> polarization amplitudes.
        std::map<std::pair<std::size_t, std::size_t>, PolarizationVector> branches;
        for (const auto &[occ, amp] : member.state.terms()) {
            auto a = single_photon(reg, occ, arm1);
            auto b = single_photon(reg, occ, arm2);
            std::uint32_t total = 0;
            for (auto n : occ) total += n;
            if (!a || !b || total != 2) throw DomainError("ensemble member is not post-selected on one photon per arm");
            auto key = std::make_pair(a->path_in_group, b->path_in_group);
            auto [it, inserted] = branches.try_emplace(key, PolarizationVector::Zero());
            it->second(pair_index(a->polarization, b->polarization)) += amp;
        }
        double n = member.state.norm_squared();
        for (const auto &kv : branches) rho += member.weight * kv.second * kv.second.adjoint() / n;
        total_weight += member.weight;
    }
    if (total_weight <= 0) throw DomainError("empty ensemble has no density matrix");
    rho /= total_weight;
    return DensityMatrix((rho + rho.adjoint()) / 2.0);
}

DensityMatrix dephase_by_distinguishability(const PolarizationVector &psi, double p) {
    if (!(p >= 0 && p <= 1)) throw DomainError("indistinguishability must lie in [0, 1]");
    Eigen::Matrix4cd rho = psi * psi.adjoint();
    const int hv = pair_index(Polarization::H, Polarization::V);
    const int vh = pair_index(Polarization::V, Polarization::H);
    rho(hv, vh) *= p;
    rho(vh, hv) *= p;
    return DensityMatrix(rho);
}

DensityMatrix dephase_by_distinguishability(const PhotonicState &s, const std::string &arm1, const std::string &arm2,
                                            double p) {
    PolarizationVector v = polarization_vector(s, arm1, arm2);
    double n = v.norm();
    if (n <= 1e-12) throw DomainError("state has no one-photon-per-arm component");
    return dephase_by_distinguishability(PolarizationVector(v / n), p);
}

double hom_coincidence_probability(double reflectivity, double p) {
    if (!(p >= 0 && p <= 1)) throw DomainError("indistinguishability must lie in [0, 1]");
    const std::string a = "1", b = "2";
    auto reg = ModeRegistry::make({a, b, twin_path(a), twin_path(b)});
    ElementChain bs;
    bs.then(path_beam_splitter(*reg, reflectivity, a, b))
        .then(path_beam_splitter(*reg, reflectivity, twin_path(a), twin_path(b)));
    auto same = photons_in(reg, {{a, Polarization::H}, {b, Polarization::H}});
    auto tagged = photons_in(reg, {{a, Polarization::H}, {twin_path(b), Polarization::H}});
    Ensemble e{{p, apply(bs, same)}, {1 - p, apply(bs, tagged)}};
    auto pattern = DetectionPattern::one_photon_per(*reg, {{a, twin_path(a)}, {b, twin_path(b)}});
    return post_select(e, pattern).probability;
}

double hom_visibility(double reflectivity, double p) {
    double classical = hom_coincidence_probability(reflectivity, 0.0);
    return (classical - hom_coincidence_probability(reflectivity, p)) / classical;
}

std::uint64_t sample_counts(double probability, double rate, double integration, std::uint64_t seed) {
    if (!(probability >= 0 && probability <= 1)) throw DomainError("probability must lie in [0, 1]");
    if (!(rate >= 0) || !(integration >= 0)) throw DomainError("rate and integration time must be non-negative");
    double mean = probability * rate * integration;
    if (mean <= 0) return 0;
    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(seed) ^ index);
}

}  // namespace polpath
