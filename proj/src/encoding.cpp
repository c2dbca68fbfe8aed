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

#include "polpath/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "polpath/error.hpp"
#include "polpath/optics.hpp"

namespace polpath {

namespace {

std::string occupation_str(const PhotonicState &s, const Occupation &occ) {
    std::ostringstream os;
    os << "[";
    bool first = true;
    for (std::size_t k = 0; k < occ.size(); k++) {
        if (occ[k] == 0) continue;
        if (!first) os << ", ";
        first = false;
        os << occ[k] << "x" << s.registry().label(k).str();
    }
    os << "]";
    return os.str();
}

ModeAssignment assign(const std::string &path, Polarization p, int pol_bit, std::optional<int> path_bit = std::nullopt,
                      Complex phase = 1.0) {
    return {{path, p}, pol_bit, path_bit, phase};
}

Complex phase_from_json(const nlohmann::json &j) {
    if (j.is_number()) return {j.get<double>(), 0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError("encoding phase must be a number or [re, im]");
}

}  // namespace

std::size_t EncodingMap::qubits() const {
    std::size_t n = 0;
    for (const auto &s : slots) n += s.path_qubit ? 2 : 1;
    return n;
}

void EncodingMap::validate() const {
    if (slots.empty()) throw DomainError("encoding map has no photon slots");
    const std::size_t n = qubits();
    if (n > kMaxQubits) throw DomainError("encoding map exceeds the qubit limit");
    std::vector<int> seen(n, 0);
    auto mark = [&](std::size_t q) {
        if (q >= n) throw DomainError("logical qubit " + std::to_string(q) + " out of range");
        if (seen[q]++) throw DomainError("logical qubit " + std::to_string(q) + " assigned twice");
    };
    std::set<ModeLabel> all_modes;
    for (const auto &slot : slots) {
        mark(slot.pol_qubit);
        if (slot.path_qubit) mark(*slot.path_qubit);
        std::set<std::pair<int, int>> patterns;
        for (const auto &m : slot.modes) {
            if (!all_modes.insert(m.mode).second) throw DomainError("mode " + m.mode.str() + " mapped twice");
            if (m.pol_bit != 0 && m.pol_bit != 1) throw DomainError("pol_bit must be 0 or 1");
            if (slot.path_qubit.has_value() != m.path_bit.has_value()) {
                throw DomainError("mode " + m.mode.str() + ": path_bit must be given exactly when the slot has a path qubit");
            }
            if (m.path_bit && *m.path_bit != 0 && *m.path_bit != 1) throw DomainError("path_bit must be 0 or 1");
            if (std::abs(std::abs(m.phase) - 1.0) > 1e-12) throw DomainError("mode " + m.mode.str() + ": phase must be unimodular");
            if (!patterns.insert({m.pol_bit, m.path_bit.value_or(0)}).second) {
                throw DomainError("mode " + m.mode.str() + " repeats a bit pattern within its slot");
            }
        }
        std::set<int> pol_values, path_values;
        for (const auto &[a, b] : patterns) {
            pol_values.insert(a);
            path_values.insert(b);
        }
        if (pol_values.size() != 2) throw DomainError("a slot must cover both polarization values");
        if (slot.path_qubit && path_values.size() != 2) throw DomainError("a path slot must cover both path values");
    }
}

nlohmann::ordered_json EncodingMap::to_json() const {
    nlohmann::ordered_json j;
    j["slots"] = nlohmann::ordered_json::array();
    for (const auto &slot : slots) {
        nlohmann::ordered_json js;
        js["pol_qubit"] = slot.pol_qubit;
        if (slot.path_qubit) js["path_qubit"] = *slot.path_qubit;
        js["modes"] = nlohmann::ordered_json::array();
        for (const auto &m : slot.modes) {
            nlohmann::ordered_json jm;
            jm["path"] = m.mode.path;
            jm["pol"] = std::string(1, polarization_char(m.mode.polarization));
            jm["pol_bit"] = m.pol_bit;
            if (m.path_bit) jm["path_bit"] = *m.path_bit;
            if (m.phase != Complex{1, 0}) jm["phase"] = {m.phase.real(), m.phase.imag()};
            js["modes"].push_back(jm);
        }
        j["slots"].push_back(js);
    }
    return j;
}

EncodingMap EncodingMap::from_json(const nlohmann::json &j) {
    if (j.is_string()) {
        try {
            return preset(j.get<std::string>());
        } catch (const DomainError &e) {
            throw ConfigError(e.what());
        }
    }
    if (!j.is_object() || !j.contains("slots") || !j["slots"].is_array()) {
        throw ConfigError("encoding map must be a preset name or an object with a \"slots\" array");
    }
    EncodingMap map;
    try {
        for (const auto &js : j["slots"]) {
            PhotonSlot slot;
            slot.pol_qubit = js.at("pol_qubit").get<std::size_t>();
            if (js.contains("path_qubit")) slot.path_qubit = js["path_qubit"].get<std::size_t>();
            for (const auto &jm : js.at("modes")) {
                ModeAssignment m;
                m.mode = {jm.at("path").get<std::string>(), parse_polarization(jm.at("pol").get<std::string>())};
                m.pol_bit = jm.at("pol_bit").get<int>();
                if (jm.contains("path_bit")) m.path_bit = jm["path_bit"].get<int>();
                if (jm.contains("phase")) m.phase = phase_from_json(jm["phase"]);
                slot.modes.push_back(std::move(m));
            }
            map.slots.push_back(std::move(slot));
        }
        map.validate();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("encoding map: ") + e.what());
    } catch (const DomainError &e) {
        throw ConfigError(std::string("encoding map: ") + e.what());
    }
    return map;
}

EncodingMap EncodingMap::two_qubit(const std::string &arm1, const std::string &arm2) {
    return {{{0, std::nullopt, {assign(arm1, Polarization::H, 1), assign(arm1, Polarization::V, 0)}},
             {1, std::nullopt, {assign(arm2, Polarization::H, 1), assign(arm2, Polarization::V, 0)}}}};
}

EncodingMap EncodingMap::pre_loop(const std::string &arm1, const std::string &arm2) {
    return {{{0, std::nullopt, {assign(arm1, Polarization::H, 1), assign(arm1, Polarization::V, 0)}},
             {1, std::nullopt, {assign(arm2, Polarization::H, 1), assign(arm2, Polarization::V, 0, std::nullopt, -1.0)}}}};
}

EncodingMap EncodingMap::cluster_frame(const std::string &arm1, const std::string &path_c, const std::string &path_d) {
    return {{{0, std::nullopt, {assign(arm1, Polarization::H, 1), assign(arm1, Polarization::V, 0)}},
             {1, 2, {assign(path_c, Polarization::H, 1, 1), assign(path_d, Polarization::V, 0, 0, -1.0)}}}};
}

EncodingMap EncodingMap::literal(const std::string &arm1, const std::string &path_c, const std::string &path_d) {
    return {{{0, std::nullopt, {assign(arm1, Polarization::H, 1), assign(arm1, Polarization::V, 0)}},
             {1, 2, {assign(path_c, Polarization::H, 1, 0), assign(path_d, Polarization::V, 0, 1)}}}};
}

EncodingMap EncodingMap::preset(const std::string &name) {
    if (name == "two_qubit") return two_qubit();
    if (name == "pre_loop") return pre_loop();
    if (name == "cluster_frame") return cluster_frame();
    if (name == "literal") return literal();
    throw DomainError("unknown encoding preset \"" + name + "\"");
}

QubitState to_logical(const PhotonicState &s, const EncodingMap &map) {
    map.validate();
    const ModeRegistry &reg = s.registry();
    const std::size_t n = map.qubits();

    struct Resolved {
        std::size_t mode;
        std::size_t slot;
        const ModeAssignment *assignment;
    };
    std::vector<Resolved> resolved;
    std::vector<int> mode_slot(reg.size(), -1);
    for (std::size_t k = 0; k < map.slots.size(); k++) {
        for (const auto &m : map.slots[k].modes) {
            if (!reg.has_path(m.mode.path)) continue;  // a mode that is absent cannot be occupied
            std::size_t idx = reg.index(m.mode);
            mode_slot[idx] = static_cast<int>(k);
            resolved.push_back({idx, k, &m});
        }
    }

    std::vector<Complex> amps(std::size_t{1} << n);
    for (const auto &[occ, amp] : s.terms()) {
        std::vector<const ModeAssignment *> hit(map.slots.size(), nullptr);
        bool ok = true;
        for (std::size_t i = 0; i < occ.size() && ok; i++) {
            if (occ[i] == 0) continue;
            if (occ[i] > 1 || mode_slot[i] < 0) {
                ok = false;
                break;
            }
            for (const auto &r : resolved) {
                if (r.mode != i) continue;
                if (hit[r.slot]) ok = false;
                hit[r.slot] = r.assignment;
            }
        }
        ok = ok && std::all_of(hit.begin(), hit.end(), [](auto *p) { return p != nullptr; });
        if (!ok) throw DomainError("unencodable term " + occupation_str(s, occ));

        std::size_t index = 0;
        Complex phase{1, 0};
        for (std::size_t k = 0; k < map.slots.size(); k++) {
            const auto &slot = map.slots[k];
            if (hit[k]->pol_bit) index |= std::size_t{1} << (n - 1 - slot.pol_qubit);
            if (slot.path_qubit && *hit[k]->path_bit) index |= std::size_t{1} << (n - 1 - *slot.path_qubit);
            phase *= hit[k]->phase;
        }
        amps[index] += phase * amp;
    }
    return QubitState(n, std::move(amps));
}

PhotonCluster PhotonCluster::polarization_cluster(const GraphSpec &graph) {
    PhotonCluster c{build_cluster(graph), graph, {}};
    for (std::size_t k = 0; k < graph.nodes; k++) c.slots.push_back({k, std::nullopt});
    return c;
}

PhotonCluster add_path_qubit(const PhotonCluster &cluster, std::size_t slot, bool trailing_hadamard) {
    if (slot >= cluster.slots.size()) throw DomainError("photon slot " + std::to_string(slot) + " does not exist");
    if (cluster.slots[slot].path_qubit) {
        throw DomainError("photon slot " + std::to_string(slot) + " already carries a path qubit");
    }
    if (cluster.state.qubits() != cluster.graph.nodes) throw DomainError("cluster state and graph disagree in size");
    const std::size_t pol = cluster.slots[slot].pol_qubit;
    const std::size_t fresh = cluster.state.qubits();

    PhotonCluster out = cluster;
    // The PBS is CNOT(pol -> path) on a path qubit that starts in |0>.
    out.state = apply_cnot(append_qubit(cluster.state, {1.0, 0.0}), pol, fresh);
    if (trailing_hadamard) out.state = apply_1q(out.state, fresh, gates::hadamard());
    out.graph.nodes += 1;
    out.graph.edges.emplace_back(pol, fresh);
    out.slots[slot].path_qubit = fresh;
    return out;
}

QubitState permute_qubits(const QubitState &s, const std::vector<std::size_t> &perm) {
    const std::size_t n = s.qubits();
    if (perm.size() != n) throw DomainError("permutation length must equal the qubit count");
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < n; k++) {
        if (sorted[k] != k) throw DomainError("not a permutation");
    }
    std::vector<Complex> amps(s.amplitudes().size());
    for (std::size_t idx = 0; idx < amps.size(); idx++) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < n; k++) {
            if (idx >> (n - 1 - k) & 1) out |= std::size_t{1} << (n - 1 - perm[k]);
        }
        amps[out] = s.amplitude(idx);
    }
    return QubitState(n, std::move(amps));
}

nlohmann::ordered_json CnotReport::to_json() const {
    nlohmann::ordered_json j;
    j["is_cnot"] = is_cnot;
    j["cases"] = nlohmann::ordered_json::array();
    for (const auto &c : cases) {
        j["cases"].push_back({{"pol", std::string(1, polarization_char(c.polarization))},
                              {"path_in", c.path_in},
                              {"pol_out", std::string(1, polarization_char(c.out_polarization))},
                              {"path_out", c.path_out},
                              {"phase", {c.phase.real(), c.phase.imag()}}});
    }
    j["absorbed_phases"] = absorbed_phases;
    return j;
}

CnotReport pbs_is_cnot_check() {
    const std::vector<std::string> ports{"a", "b"};
    auto reg = ModeRegistry::make(ports);
    const ModeUnitary u = pbs(*reg, "a", "b");

    CnotReport report;
    report.is_cnot = true;
    for (Polarization p : {Polarization::H, Polarization::V}) {
        for (int port = 0; port < 2; port++) {
            auto out = apply(u, photons_in(reg, {{ports[port], p}}));
            if (out.terms().size() != 1) {
                report.is_cnot = false;
                continue;
            }
            const auto &[occ, amp] = *out.terms().begin();
            std::size_t mode = std::find(occ.begin(), occ.end(), 1u) - occ.begin();
            const ModeLabel &label = reg->label(mode);
            CnotCase c{p, port, label.polarization, label.path == "a" ? 0 : 1, amp};
            const int control = p == Polarization::V ? 1 : 0;
            if (c.out_polarization != p || c.path_out != (port ^ control)) report.is_cnot = false;
            if (std::abs(amp - Complex{1, 0}) > 1e-12) {
                std::ostringstream os;
                os << polarization_char(p) << " into port " << ports[port] << ": (" << amp.real() << ", "
                   << amp.imag() << ")";
                report.absorbed_phases.push_back(os.str());
            }
            if (std::abs(std::abs(amp) - 1.0) > 1e-12) report.is_cnot = false;
            report.cases.push_back(c);
        }
    }
    return report;
}

}  // namespace polpath
