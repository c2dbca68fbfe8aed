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

#include "polpath/fock.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "polpath/error.hpp"

namespace polpath {

char polarization_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

Polarization parse_polarization(const std::string &s) {
    if (s == "H" || s == "h") return Polarization::H;
    if (s == "V" || s == "v") return Polarization::V;
    throw DomainError("unknown polarization '" + s + "' (expected H or V)");
}

std::string ModeLabel::str() const { return path + ":" + polarization_char(polarization); }

ModeRegistry::ModeRegistry(std::vector<std::string> paths) : paths_(std::move(paths)) {
    for (const auto &p : paths_) {
        labels_.push_back({p, Polarization::H});
        labels_.push_back({p, Polarization::V});
    }
}

std::shared_ptr<const ModeRegistry> ModeRegistry::make(const std::vector<std::string> &paths) {
    if (paths.empty()) throw DomainError("mode registry needs at least one path");
    for (std::size_t i = 0; i < paths.size(); i++) {
        if (paths[i].empty()) throw DomainError("empty path identifier");
        for (std::size_t j = 0; j < i; j++) {
            if (paths[i] == paths[j]) throw DomainError("duplicate path identifier '" + paths[i] + "'");
        }
    }
    return std::shared_ptr<const ModeRegistry>(new ModeRegistry(paths));
}

const ModeLabel &ModeRegistry::label(std::size_t index) const {
    if (index >= labels_.size()) throw DomainError("mode index " + std::to_string(index) + " out of range");
    return labels_[index];
}

bool ModeRegistry::has_path(const std::string &path) const {
    for (const auto &p : paths_) {
        if (p == path) return true;
    }
    return false;
}

std::size_t ModeRegistry::index(const std::string &path, Polarization p) const {
    for (std::size_t k = 0; k < paths_.size(); k++) {
        if (paths_[k] == path) return 2 * k + static_cast<std::size_t>(p);
    }
    throw DomainError("unknown path '" + path + "'");
}

std::vector<std::size_t> ModeRegistry::path_modes(const std::string &path) const {
    return {index(path, Polarization::H), index(path, Polarization::V)};
}

namespace {

void prune(std::map<Occupation, Complex> &terms) {
    std::erase_if(terms, [](const auto &kv) { return std::abs(kv.second) < kPruneThreshold; });
}

void require_same_registry(const PhotonicState &a, const PhotonicState &b) {
    if (a.registry_ptr() != b.registry_ptr() && !(a.registry() == b.registry())) {
        throw DomainError("photonic states live on different mode registries");
    }
}

}  // namespace

PhotonicState::PhotonicState(RegistryPtr registry) : registry_(std::move(registry)) {
    if (!registry_) throw DomainError("null mode registry");
}

PhotonicState::PhotonicState(RegistryPtr registry, std::map<Occupation, Complex> terms)
    : registry_(std::move(registry)), terms_(std::move(terms)) {
    if (!registry_) throw DomainError("null mode registry");
    for (const auto &[occ, amp] : terms_) {
        if (occ.size() != registry_->size()) {
            throw DomainError("occupation length " + std::to_string(occ.size()) + " does not match " +
                              std::to_string(registry_->size()) + " modes");
        }
    }
    prune(terms_);
}

Complex PhotonicState::amplitude(const Occupation &occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex{} : it->second;
}

double PhotonicState::norm_squared() const {
    double total = 0;
    for (const auto &kv : terms_) total += std::norm(kv.second);
    return total;
}

double PhotonicState::norm() const { return std::sqrt(norm_squared()); }

int PhotonicState::photon_number() const {
    int n = -1;
    for (const auto &kv : terms_) {
        int count = 0;
        for (auto c : kv.first) count += static_cast<int>(c);
        if (n == -1) {
            n = count;
        } else if (n != count) {
            return -1;
        }
    }
    return n == -1 ? 0 : n;
}

nlohmann::ordered_json PhotonicState::to_json() const {
    nlohmann::ordered_json j;
    j["modes"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < registry_->size(); k++) j["modes"].push_back(registry_->label(k).str());
    j["terms"] = nlohmann::ordered_json::array();
    for (const auto &[occ, amp] : terms_) {
        nlohmann::ordered_json t;
        t["occ"] = occ;
        t["re"] = amp.real();
        t["im"] = amp.imag();
        j["terms"].push_back(std::move(t));
    }
    return j;
}

PhotonicState PhotonicState::from_json(const nlohmann::json &j) {
    std::vector<std::string> paths;
    const auto &modes = j.at("modes");
    if (modes.size() % 2 != 0) throw DomainError("mode list must pair H and V per path");
    for (std::size_t k = 0; k < modes.size(); k += 2) {
        auto h = modes[k].get<std::string>();
        auto v = modes[k + 1].get<std::string>();
        auto colon = h.rfind(':');
        if (colon == std::string::npos || h.substr(colon) != ":H" || v != h.substr(0, colon) + ":V") {
            throw DomainError("mode list entries " + h + ", " + v + " are not an (H, V) pair");
        }
        paths.push_back(h.substr(0, colon));
    }
    auto registry = ModeRegistry::make(paths);
    std::map<Occupation, Complex> terms;
    for (const auto &t : j.at("terms")) {
        terms[t.at("occ").get<Occupation>()] += Complex{t.at("re").get<double>(), t.at("im").get<double>()};
    }
    return PhotonicState(registry, std::move(terms));
}

PhotonicState basis_state(RegistryPtr registry, std::span<const std::uint32_t> occupations) {
    if (!registry) throw DomainError("null mode registry");
    if (occupations.size() != registry->size()) {
        throw DomainError("occupation length " + std::to_string(occupations.size()) + " does not match " +
                          std::to_string(registry->size()) + " modes");
    }
    Occupation occ(occupations.begin(), occupations.end());
    return PhotonicState(std::move(registry), {{occ, Complex{1.0, 0.0}}});
}

PhotonicState basis_state(RegistryPtr registry, std::initializer_list<std::uint32_t> occupations) {
    return basis_state(std::move(registry), std::span<const std::uint32_t>(occupations.begin(), occupations.size()));
}

PhotonicState vacuum(RegistryPtr registry) {
    Occupation occ(registry->size(), 0);
    return basis_state(registry, occ);
}

PhotonicState photons_in(RegistryPtr registry, std::initializer_list<ModeLabel> modes) {
    Occupation occ(registry->size(), 0);
    for (const auto &m : modes) occ[registry->index(m)]++;
    return basis_state(registry, occ);
}

Complex inner_product(const PhotonicState &a, const PhotonicState &b) {
    require_same_registry(a, b);
    Complex total{};
    const auto &small = a.terms().size() <= b.terms().size() ? a.terms() : b.terms();
    const bool a_small = &small == &a.terms();
    for (const auto &[occ, amp] : small) {
        Complex other = a_small ? b.amplitude(occ) : a.amplitude(occ);
        total += a_small ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return total;
}

PhotonicState normalize(const PhotonicState &s) {
    double n = s.norm();
    if (n <= 1e-12) throw DomainError("cannot normalize a (near-)zero photonic state");
    return scale(s, Complex{1.0 / n, 0.0});
}

PhotonicState scale(const PhotonicState &s, Complex c) {
    std::map<Occupation, Complex> terms;
    for (const auto &[occ, amp] : s.terms()) terms.emplace(occ, amp * c);
    return PhotonicState(s.registry_ptr(), std::move(terms));
}

PhotonicState add(const PhotonicState &a, const PhotonicState &b) {
    require_same_registry(a, b);
    auto terms = a.terms();
    for (const auto &[occ, amp] : b.terms()) terms[occ] += amp;
    return PhotonicState(a.registry_ptr(), std::move(terms));
}

double fidelity(const PhotonicState &a, const PhotonicState &b) {
    double na = a.norm_squared();
    double nb = b.norm_squared();
    if (na <= 0 || nb <= 0) throw DomainError("fidelity with a zero state is undefined");
    return std::norm(inner_product(a, b)) / (na * nb);
}

}  // namespace polpath
