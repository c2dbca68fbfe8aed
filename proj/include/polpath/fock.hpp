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

#ifndef POLPATH_FOCK_HPP
#define POLPATH_FOCK_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace polpath {

using Complex = std::complex<double>;

/// Amplitudes below this magnitude are dropped after every operation.
inline constexpr double kPruneThreshold = 1e-15;

enum class Polarization : std::uint8_t { H = 0, V = 1 };

char polarization_char(Polarization p);
Polarization parse_polarization(const std::string &s);

struct ModeLabel {
    std::string path;
    Polarization polarization;

    auto operator<=>(const ModeLabel &) const = default;
    std::string str() const;  // e.g. "C:V"
};

/// Dense, stable indexing of optical modes. Each path contributes an H mode
/// followed by a V mode, paths in the order given, so path k owns indices
/// 2k (H) and 2k+1 (V).
class ModeRegistry {
   public:
    static std::shared_ptr<const ModeRegistry> make(const std::vector<std::string> &paths);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string> &paths() const { return paths_; }
    const ModeLabel &label(std::size_t index) const;
    bool has_path(const std::string &path) const;
    std::size_t index(const std::string &path, Polarization p) const;
    std::size_t index(const ModeLabel &label) const { return index(label.path, label.polarization); }
    /// Both mode indices of a path, H first.
    std::vector<std::size_t> path_modes(const std::string &path) const;

    bool operator==(const ModeRegistry &other) const { return paths_ == other.paths_; }

   private:
    explicit ModeRegistry(std::vector<std::string> paths);
    std::vector<std::string> paths_;
    std::vector<ModeLabel> labels_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

/// Photon number per mode, indexed by ModeRegistry order.
using Occupation = std::vector<std::uint32_t>;

/// A few-photon state in the occupation-number basis, stored sparsely.
/// Basis vectors |n_0 n_1 ...> are orthonormal; creation operators act as
/// a†|n> = sqrt(n+1)|n+1>. Values are immutable once built.
class PhotonicState {
   public:
    explicit PhotonicState(RegistryPtr registry);  // zero vector
    PhotonicState(RegistryPtr registry, std::map<Occupation, Complex> terms);

    const ModeRegistry &registry() const { return *registry_; }
    const RegistryPtr &registry_ptr() const { return registry_; }
    const std::map<Occupation, Complex> &terms() const { return terms_; }
    Complex amplitude(const Occupation &occ) const;
    bool empty() const { return terms_.empty(); }

    double norm_squared() const;
    double norm() const;
    /// Photon number of the support, or -1 if terms disagree. Empty state: 0.
    int photon_number() const;

    nlohmann::ordered_json to_json() const;
    static PhotonicState from_json(const nlohmann::json &j);

   private:
    RegistryPtr registry_;
    std::map<Occupation, Complex> terms_;
};

PhotonicState basis_state(RegistryPtr registry, std::span<const std::uint32_t> occupations);
PhotonicState basis_state(RegistryPtr registry, std::initializer_list<std::uint32_t> occupations);
PhotonicState vacuum(RegistryPtr registry);
/// Convenience: one photon in each listed mode.
PhotonicState photons_in(RegistryPtr registry, std::initializer_list<ModeLabel> modes);

/// <a|b>, conjugate-linear in a.
Complex inner_product(const PhotonicState &a, const PhotonicState &b);
PhotonicState normalize(const PhotonicState &s);
PhotonicState scale(const PhotonicState &s, Complex c);
PhotonicState add(const PhotonicState &a, const PhotonicState &b);

/// |<a|b>|^2 / (|a|^2 |b|^2).
double fidelity(const PhotonicState &a, const PhotonicState &b);

}  // namespace polpath

#endif
