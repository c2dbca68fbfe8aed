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

#include "polpath/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <thread>

#include "polpath/error.hpp"

namespace polpath {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

const std::string kArm1 = "1";
const std::string kArm2 = "2";
const std::string kPathC = "C";
const std::string kPathD = "D";

bool is_twin(const std::string &path) { return !path.empty() && path.back() == '~'; }

std::string base_of(const std::string &path) { return is_twin(path) ? path.substr(0, path.size() - 1) : path; }

double require_number(const nlohmann::json &v, const std::string &key) {
    if (!v.is_number()) throw ConfigError("\"" + key + "\" must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("\"" + key + "\" must be finite");
    return x;
}

int require_int(const nlohmann::json &v, const std::string &key) {
    if (!v.is_number_integer()) throw ConfigError("\"" + key + "\" must be an integer");
    return v.get<int>();
}

bool require_bool(const nlohmann::json &v, const std::string &key) {
    if (!v.is_boolean()) throw ConfigError("\"" + key + "\" must be true or false");
    return v.get<bool>();
}

std::string require_string(const nlohmann::json &v, const std::string &key) {
    if (!v.is_string()) throw ConfigError("\"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::uint64_t require_seed(const nlohmann::json &v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError("\"seed\" must be a non-negative integer");
}

WaveplateKind parse_plate_kind(const std::string &s) {
    if (s == "half") return WaveplateKind::half;
    if (s == "quarter") return WaveplateKind::quarter;
    throw ConfigError("plate kind must be \"half\" or \"quarter\", not \"" + s + "\"");
}

void apply_key(ExperimentConfig &c, const std::string &key, const nlohmann::json &v) {
    if (key == "spec_version") {
        if (!v.is_number_integer() || v.get<int>() != kConfigVersion) {
            throw ConfigError("unsupported spec_version (expected " + std::to_string(kConfigVersion) + ")");
        }
    } else if (key == "bs_reflectivity") {
        c.bs_reflectivity = require_number(v, key);
    } else if (key == "alpha") {
        c.alpha = require_number(v, key);
    } else if (key == "phi1") {
        c.phi1 = require_number(v, key);
    } else if (key == "phi2") {
        c.phi2 = require_number(v, key);
    } else if (key == "m1") {
        c.m1 = require_int(v, key);
    } else if (key == "m2") {
        c.m2 = require_int(v, key);
    } else if (key == "feed_forward") {
        c.feed_forward = require_bool(v, key);
    } else if (key == "indistinguishability") {
        c.noise.indistinguishability = require_number(v, key);
    } else if (key == "sagnac_visibility") {
        c.noise.sagnac_visibility = require_number(v, key);
    } else if (key == "infinite_statistics") {
        c.infinite_statistics = require_bool(v, key);
    } else if (key == "rate") {
        c.rate = require_number(v, key);
    } else if (key == "integration") {
        c.integration = require_number(v, key);
    } else if (key == "shots") {
        c.shots = require_number(v, key);
    } else if (key == "seed") {
        c.seed = require_seed(v);
    } else if (key == "alpha_start") {
        c.alpha_start = require_number(v, key);
    } else if (key == "alpha_stop") {
        c.alpha_stop = require_number(v, key);
    } else if (key == "alpha_points") {
        c.alpha_points = require_int(v, key);
    } else if (key == "alphas") {
        if (!v.is_array()) throw ConfigError("\"alphas\" must be an array of numbers");
        c.alphas.clear();
        for (const auto &x : v) c.alphas.push_back(require_number(x, key));
    } else if (key == "phase_plates") {
        c.phase_plates = require_string(v, key);
    } else if (key == "correction_plates") {
        if (!v.is_array()) throw ConfigError("\"correction_plates\" must be an array");
        c.correction_plates.clear();
        for (const auto &p : v) {
            if (!p.is_object()) throw ConfigError("each correction plate must be an object");
            for (const auto &[k, _] : p.items()) {
                if (k != "path" && k != "kind" && k != "angle_deg") throw ConfigError("unknown plate key \"" + k + "\"");
            }
            if (!p.contains("path") || !p.contains("kind") || !p.contains("angle_deg")) {
                throw ConfigError("a correction plate needs path, kind and angle_deg");
            }
            c.correction_plates.push_back({require_string(p["path"], "path"),
                                           parse_plate_kind(require_string(p["kind"], "kind")),
                                           require_number(p["angle_deg"], "angle_deg")});
        }
    } else if (key == "stop_after") {
        c.stop_after = parse_stage(require_string(v, key));
    } else if (key == "hadamard_plate_deg") {
        c.hadamard_plate_deg = require_number(v, key);
    } else if (key == "bases") {
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "single") {
                c.bases.clear();
            } else if (s == "grid16") {
                c.bases = grid16_bases();
            } else {
                throw ConfigError("\"bases\" must be \"single\", \"grid16\" or a list of [phi1, phi2] pairs");
            }
        } else if (v.is_array()) {
            c.bases.clear();
            for (const auto &pair : v) {
                if (!pair.is_array() || pair.size() != 2) throw ConfigError("each basis must be a [phi1, phi2] pair");
                c.bases.emplace_back(require_number(pair[0], key), require_number(pair[1], key));
            }
            if (c.bases.empty()) throw ConfigError("\"bases\" list is empty");
        } else {
            throw ConfigError("\"bases\" must be \"single\", \"grid16\" or a list of [phi1, phi2] pairs");
        }
    } else if (key == "mle_tolerance") {
        c.mle_tolerance = require_number(v, key);
    } else if (key == "threads") {
        c.threads = require_int(v, key);
    } else if (key == "mbqc_samples") {
        c.mbqc_samples = require_int(v, key);
    } else if (key == "encoding") {
        c.encoding = EncodingMap::from_json(v);
    } else if (key == "encoding_two_qubit") {
        c.encoding_two_qubit = EncodingMap::from_json(v);
    } else {
        throw ConfigError("unknown config key \"" + key + "\"");
    }
}

/// Fixed photonic layout: arms 1 and 2, the loop rails C and D, and
/// optionally a twin of each for the distinguishable photon.
struct Layout {
    RegistryPtr registry;
    RegistryPtr base;
    bool twins;

    explicit Layout(bool with_twins) : twins(with_twins) {
        std::vector<std::string> paths{kArm1, kArm2, kPathC, kPathD};
        base = ModeRegistry::make(paths);
        if (twins) {
            for (const auto &p : std::vector<std::string>(paths)) paths.push_back(twin_path(p));
        }
        registry = ModeRegistry::make(paths);
    }

    std::vector<std::string> copies(const std::string &path) const {
        if (twins) return {path, twin_path(path)};
        return {path};
    }
    std::vector<std::string> arm1() const { return copies(kArm1); }
    std::vector<std::string> arm2_before_loop() const { return copies(kArm2); }
    std::vector<std::string> arm2_after_loop() const {
        std::vector<std::string> out{kPathC, kPathD};
        if (twins) {
            out.push_back(twin_path(kPathC));
            out.push_back(twin_path(kPathD));
        }
        return out;
    }
};

PhotonicState apply_each(const ElementChain &chain, const PhotonicState &s) { return apply(chain, s); }

Ensemble apply_all(const ElementChain &chain, const Ensemble &e) {
    Ensemble out;
    for (const auto &m : e) out.push_back({m.weight, apply_each(chain, m.state)});
    return out;
}

/// Amplitude vector of a photonic state in a registry without twins,
/// one entry per tag sector (which arms hold a twin-path photon).
std::map<std::vector<bool>, PhotonicState> split_sectors(const PhotonicState &s, const RegistryPtr &base,
                                                         const std::vector<std::vector<std::string>> &arms) {
    const ModeRegistry &reg = s.registry();
    std::vector<int> arm_of(reg.size(), -1);
    for (std::size_t a = 0; a < arms.size(); a++) {
        for (const auto &p : arms[a]) {
            if (!reg.has_path(p)) continue;
            for (auto m : reg.path_modes(p)) arm_of[m] = static_cast<int>(a);
        }
    }
    std::vector<std::size_t> base_index(reg.size());
    for (std::size_t m = 0; m < reg.size(); m++) {
        const ModeLabel &l = reg.label(m);
        base_index[m] = base->index(base_of(l.path), l.polarization);
    }
    std::map<std::vector<bool>, std::map<Occupation, Complex>> sectors;
    for (const auto &[occ, amp] : s.terms()) {
        std::vector<bool> key(arms.size(), false);
        Occupation untagged(base->size(), 0);
        for (std::size_t m = 0; m < occ.size(); m++) {
            if (occ[m] == 0) continue;
            untagged[base_index[m]] += occ[m];
            if (is_twin(reg.label(m).path) && arm_of[m] >= 0) key[arm_of[m]] = true;
        }
        sectors[key][untagged] += amp;
    }
    std::map<std::vector<bool>, PhotonicState> out;
    for (auto &[key, terms] : sectors) out.emplace(key, PhotonicState(base, std::move(terms)));
    return out;
}

RegistryPtr base_registry_for(const ModeRegistry &reg) {
    std::vector<std::string> paths;
    for (const auto &p : reg.paths()) {
        if (!is_twin(p)) paths.push_back(p);
    }
    return ModeRegistry::make(paths);
}

double logical_fidelity(const Eigen::MatrixXcd &rho, const QubitState &target) {
    Eigen::VectorXcd v(target.amplitudes().size());
    for (Eigen::Index k = 0; k < v.size(); k++) v(k) = target.amplitude(k);
    v.normalize();
    return (v.adjoint() * rho * v)(0, 0).real();
}

double analyzer_probability(const Ensemble &e, const Layout &layout, double phi1, double phi2_eff, int m1, int m2) {
    const ModeRegistry &reg = *layout.registry;
    const Complex c1v = (m1 ? -1.0 : 1.0) * std::polar(1.0, -phi1);
    const Complex c2v = (m2 ? -1.0 : 1.0) * std::polar(1.0, -phi2_eff);
    std::vector<std::string> tags{""};
    if (layout.twins) tags.push_back("~");

    double total = 0;
    for (const auto &member : e) {
        double p = 0;
        for (const auto &t1 : tags) {
            const std::size_t h1 = reg.index(kArm1 + t1, Polarization::H);
            const std::size_t v1 = reg.index(kArm1 + t1, Polarization::V);
            for (const auto &t2 : tags) {
                const std::size_t hc = reg.index(kPathC + t2, Polarization::H);
                const std::size_t vd = reg.index(kPathD + t2, Polarization::V);
                // <a1 a2|psi>, with a = (|first> + c|second>)/sqrt(2) for each photon.
                Complex amp{0, 0};
                for (const auto &[coeff1, mode1] : {std::pair<Complex, std::size_t>{1.0, h1}, {c1v, v1}}) {
                    for (const auto &[coeff2, mode2] : {std::pair<Complex, std::size_t>{1.0, hc}, {c2v, vd}}) {
                        Occupation occ(reg.size(), 0);
                        occ[mode1] = 1;
                        occ[mode2] = 1;
                        amp += std::conj(coeff1) * std::conj(coeff2) * member.state.amplitude(occ) / 2.0;
                    }
                }
                p += std::norm(amp);
            }
        }
        total += member.weight * p / member.state.norm_squared();
    }
    return total;
}

std::string format_deg(double rad) {
    double deg = std::round(rad * 180.0 / kPi * 1e6) / 1e6;
    if (deg == 0) deg = 0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", deg);
    return buf;
}

}  // namespace

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::beam_splitter: return "beam_splitter";
        case Stage::hadamard: return "hadamard";
        case Stage::loop: return "loop";
        case Stage::analyzers: return "analyzers";
    }
    return "?";
}

Stage parse_stage(const std::string &s) {
    for (Stage st : {Stage::beam_splitter, Stage::hadamard, Stage::loop, Stage::analyzers}) {
        if (stage_name(st) == s) return st;
    }
    throw ConfigError("unknown stage \"" + s + "\" (beam_splitter, hadamard, loop, analyzers)");
}

Stage ExperimentConfig::final_stage() const {
    if (stop_after) return *stop_after;
    return phase_plates == "singlet" ? Stage::beam_splitter : Stage::analyzers;
}

std::vector<double> ExperimentConfig::alpha_grid() const {
    if (!alphas.empty()) return alphas;
    if (alpha_points == 1) return {alpha_start};
    std::vector<double> g;
    for (int k = 0; k < alpha_points; k++) {
        g.push_back(alpha_start + (alpha_stop - alpha_start) * k / (alpha_points - 1));
    }
    return g;
}

std::vector<BasisPair> ExperimentConfig::basis_list() const {
    if (bases.empty()) return {{phi1, phi2}};
    return bases;
}

void ExperimentConfig::validate() const {
    if (!(bs_reflectivity > 0 && bs_reflectivity < 1)) throw ConfigError("bs_reflectivity must lie in (0, 1)");
    for (double x : {alpha, phi1, phi2, alpha_start, alpha_stop, hadamard_plate_deg, rate, integration, shots}) {
        if (!std::isfinite(x)) throw ConfigError("numeric settings must be finite");
    }
    if ((m1 != 0 && m1 != 1) || (m2 != 0 && m2 != 1)) throw ConfigError("m1 and m2 must be 0 or 1");
    try {
        noise.validate();
    } catch (const DomainError &e) {
        throw ConfigError(e.what());
    }
    if (rate < 0 || integration < 0) throw ConfigError("rate and integration must be non-negative");
    if (!(shots > 0)) throw ConfigError("shots must be positive");
    if (alphas.empty()) {
        if (alpha_points < 1) throw ConfigError("alpha_points must be at least 1");
        if (alpha_stop < alpha_start) throw ConfigError("alpha_stop must not precede alpha_start");
    } else if (!std::is_sorted(alphas.begin(), alphas.end())) {
        throw ConfigError("alphas must be sorted ascending");
    }
    if (phase_plates != "cluster" && phase_plates != "singlet") {
        throw ConfigError("phase_plates must be \"cluster\" or \"singlet\"");
    }
    for (const auto &p : correction_plates) {
        if (p.path != kArm1 && p.path != kArm2) throw ConfigError("correction plate path must be \"1\" or \"2\"");
        if (!std::isfinite(p.angle_deg)) throw ConfigError("correction plate angle must be finite");
    }
    if (!(mle_tolerance > 0)) throw ConfigError("mle_tolerance must be positive");
    if (threads < 0) throw ConfigError("threads must be non-negative (0 picks the hardware count)");
    if (mbqc_samples < 1) throw ConfigError("mbqc_samples must be at least 1");
    try {
        encoding.validate();
        encoding_two_qubit.validate();
    } catch (const DomainError &e) {
        throw ConfigError(std::string("encoding map: ") + e.what());
    }
    if (encoding.qubits() != 3) throw ConfigError("the loop encoding must have three logical qubits");
    if (encoding_two_qubit.qubits() != 2) throw ConfigError("the two-qubit encoding must have two logical qubits");
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["spec_version"] = kConfigVersion;
    j["bs_reflectivity"] = bs_reflectivity;
    j["alpha"] = alpha;
    j["phi1"] = phi1;
    j["phi2"] = phi2;
    j["m1"] = m1;
    j["m2"] = m2;
    j["feed_forward"] = feed_forward;
    j["indistinguishability"] = noise.indistinguishability;
    j["sagnac_visibility"] = noise.sagnac_visibility;
    j["infinite_statistics"] = infinite_statistics;
    j["rate"] = rate;
    j["integration"] = integration;
    j["shots"] = shots;
    j["seed"] = seed;
    j["alpha_start"] = alpha_start;
    j["alpha_stop"] = alpha_stop;
    j["alpha_points"] = alpha_points;
    if (!alphas.empty()) j["alphas"] = alphas;
    j["phase_plates"] = phase_plates;
    j["correction_plates"] = nlohmann::ordered_json::array();
    for (const auto &p : correction_plates) {
        j["correction_plates"].push_back(
            {{"path", p.path}, {"kind", p.kind == WaveplateKind::half ? "half" : "quarter"}, {"angle_deg", p.angle_deg}});
    }
    if (stop_after) j["stop_after"] = stage_name(*stop_after);
    j["hadamard_plate_deg"] = hadamard_plate_deg;
    if (bases.empty()) {
        j["bases"] = "single";
    } else {
        j["bases"] = nlohmann::ordered_json::array();
        for (const auto &[a, b] : bases) j["bases"].push_back({a, b});
    }
    j["mle_tolerance"] = mle_tolerance;
    j["threads"] = threads;
    j["mbqc_samples"] = mbqc_samples;
    j["encoding"] = encoding.to_json();
    j["encoding_two_qubit"] = encoding_two_qubit.to_json();
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json &j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("spec_version")) throw ConfigError("config is missing \"spec_version\"");
    ExperimentConfig c;
    for (const auto &[key, value] : j.items()) apply_key(c, key, value);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::set(const std::string &key, const std::string &value) {
    nlohmann::json v;
    try {
        v = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error &) {
        v = value;
    }
    ExperimentConfig trial = *this;
    apply_key(trial, key, v);
    trial.validate();
    *this = std::move(trial);
}

std::vector<BasisPair> grid16_bases() {
    const double angles[] = {-kPi / 4, 0.0, kPi / 4, kPi / 2};
    std::vector<BasisPair> out;
    for (double a : angles)
        for (double b : angles) out.emplace_back(a, b);
    return out;
}

double a_from_R(double reflectivity) {
    if (!(reflectivity > 0 && reflectivity < 1)) throw DomainError("reflectivity must lie in (0, 1)");
    const double t = 1 - reflectivity;
    return std::sqrt(t * t / (t * t + reflectivity * reflectivity));
}

double fringe_oracle(double alpha, double phi1, double phi2, double a, double y0) {
    return fringe_oracle_noisy(alpha, phi1, phi2, a, y0, NoiseModel::ideal());
}

double fringe_oracle_noisy(double alpha, double phi1, double phi2, double a, double y0, const NoiseModel &noise) {
    if (!(a > 0 && a < 1)) throw DomainError("a must lie in (0, 1)");
    if (!(y0 > 0)) throw DomainError("Y0 must be positive");
    noise.validate();
    const double x = 4 * alpha + phi2;
    const double interference = 2 * a * std::sqrt(1 - a * a) * std::sin(x) * std::sin(phi1);
    return y0 * (1 + noise.sagnac_visibility * ((1 - 2 * a * a) * std::cos(x) +
                                                noise.indistinguishability * interference));
}

double coincidence_oracle(double alpha, double phi1, double phi2, int m1, int m2, bool feed_forward,
                          double reflectivity, const NoiseModel &noise) {
    const double phi2_eff = feed_forward ? adapted_angle(phi2, m1) : phi2;
    return fringe_oracle_noisy(alpha, phi1 + kPi * m1, phi2_eff + kPi * m2, a_from_R(reflectivity), 1.0, noise) / 4.0;
}

namespace fixtures {

QubitState cluster3() {
    const double h = 0.5;
    // |+00> - |-11> over sqrt(2): amplitudes on |000>, |100>, |011>, |111>.
    std::vector<Complex> amps(8);
    amps[0b000] = h;
    amps[0b100] = h;
    amps[0b011] = -h;
    amps[0b111] = h;
    return QubitState(3, std::move(amps));
}

QubitState cluster2() {
    const double h = 0.5;
    return QubitState(2, {h, h, h, -h});
}

PhotonicState loop_state(RegistryPtr registry, const std::string &arm1, const std::string &path_c,
                         const std::string &path_d) {
    using P = Polarization;
    auto term = [&](P p1, const std::string &path2, P p2, double c) {
        return scale(photons_in(registry, {{arm1, p1}, {path2, p2}}), c);
    };
    PhotonicState s = term(P::H, path_c, P::H, 0.5);
    s = add(s, term(P::H, path_d, P::V, -0.5));
    s = add(s, term(P::V, path_c, P::H, -0.5));
    s = add(s, term(P::V, path_d, P::V, -0.5));
    return s;
}

PolarizationVector singlet() { return PolarizationVector(0, kInvSqrt2, -kInvSqrt2, 0); }

PolarizationVector psi_prime(double reflectivity) {
    const double a = a_from_R(reflectivity);
    return PolarizationVector(0, a, -std::sqrt(1 - a * a), 0);
}

}  // namespace fixtures

QubitState to_textbook_frame(const QubitState &cluster3) {
    if (cluster3.qubits() != 3) throw DomainError("expected a three-qubit state");
    return apply_1q(apply_1q(cluster3, 1, gates::pauli_z()), 2, gates::hadamard());
}

const Checkpoint *PipelineResult::find(const std::string &name) const {
    for (const auto &c : checkpoints) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

nlohmann::ordered_json PipelineResult::summary_json() const {
    nlohmann::ordered_json j;
    j["post_selection_probability"] = post_selection_probability;
    if (coincidence_probability) j["coincidence_probability"] = *coincidence_probability;
    j["fidelities"] = nlohmann::ordered_json::object();
    for (const auto &[name, f] : fidelities) j["fidelities"][name] = f;
    j["polarization_density"] = polarization.to_json();
    if (logical_two_qubit) j["logical_two_qubit"] = logical_two_qubit->to_json();
    if (logical_three_qubit) j["logical_three_qubit"] = logical_three_qubit->to_json();
    j["checkpoints"] = nlohmann::ordered_json::array();
    for (const auto &c : checkpoints) j["checkpoints"].push_back(c.name);
    return j;
}

Eigen::MatrixXcd logical_density(const Ensemble &e, const EncodingMap &map,
                                 const std::vector<std::vector<std::string>> &arms) {
    const std::size_t dim = std::size_t{1} << map.qubits();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    double total = 0;
    for (const auto &member : e) {
        const RegistryPtr base = base_registry_for(member.state.registry());
        const double n = member.state.norm_squared();
        for (const auto &[key, sector] : split_sectors(member.state, base, arms)) {
            QubitState q = to_logical(sector, map);
            Eigen::VectorXcd v(dim);
            for (std::size_t k = 0; k < dim; k++) v(k) = q.amplitude(k);
            rho += member.weight * v * v.adjoint() / n;
        }
        total += member.weight;
    }
    if (total <= 0) throw DomainError("empty ensemble has no density matrix");
    return rho / total;
}

PipelineResult run_pipeline(const ExperimentConfig &config) {
    config.validate();
    const NoiseModel &noise = config.noise;
    const double p = noise.indistinguishability;
    const Layout layout(p < 1.0);
    const ModeRegistry &reg = *layout.registry;
    const Stage last = config.final_stage();
    PipelineResult result;

    // Source: |1H>_1 |1V>_2, the distinguishable share tagged on arm 2.
    Ensemble source;
    if (p > 0) source.push_back({p, photons_in(layout.registry, {{kArm1, Polarization::H}, {kArm2, Polarization::V}})});
    if (p < 1) {
        source.push_back(
            {1 - p, photons_in(layout.registry, {{kArm1, Polarization::H}, {twin_path(kArm2), Polarization::V}})});
    }
    result.checkpoints.push_back({"source", source});

    // Entangling beam splitter and coincidence post-selection.
    ElementChain bs;
    for (const auto &[a, b] : std::vector<std::pair<std::string, std::string>>{
             {kArm1, kArm2}, {twin_path(kArm1), twin_path(kArm2)}}) {
        if (reg.has_path(a)) bs.then(path_beam_splitter(reg, config.bs_reflectivity, a, b));
    }
    std::vector<std::vector<std::string>> arms_before{layout.arm1(), layout.arm2_before_loop()};
    auto selected = post_select(apply_all(bs, source), DetectionPattern::one_photon_per(reg, arms_before));
    if (selected.probability <= 0) throw DomainError("no coincidences survive post-selection");
    result.post_selection_probability = selected.probability;
    Ensemble state = selected.conditional;

    ElementChain plates;
    for (const auto &plate : config.correction_plates) {
        for (const auto &path : layout.copies(plate.path)) {
            plates.then(waveplate(reg, {plate.kind, plate.angle_deg * kPi / 180.0}, path));
        }
    }
    if (!plates.elements.empty()) state = apply_all(plates, state);
    result.checkpoints.push_back({"beam_splitter", state});
    result.polarization = polarization_density(state, layout.arm1(), layout.arm2_before_loop());
    result.fidelities.emplace_back("psi_prime", fidelity_pure(result.polarization, fixtures::psi_prime(config.bs_reflectivity)));
    result.fidelities.emplace_back("singlet", fidelity_pure(result.polarization, fixtures::singlet()));
    if (last == Stage::beam_splitter) return result;

    ElementChain hwp;
    for (const auto &path : layout.arm2_before_loop()) {
        hwp.then(waveplate(reg, {WaveplateKind::half, config.hadamard_plate_deg * kPi / 180.0}, path));
    }
    state = apply_all(hwp, state);
    result.checkpoints.push_back({"hadamard", state});
    {
        Eigen::MatrixXcd rho = logical_density(state, config.encoding_two_qubit, arms_before);
        result.fidelities.emplace_back("cluster2", logical_fidelity(rho, fixtures::cluster2()));
        if (state.size() == 1) {
            const RegistryPtr base = base_registry_for(reg);
            auto sectors = split_sectors(state.front().state, base, arms_before);
            if (sectors.size() == 1) result.logical_two_qubit = normalized(to_logical(sectors.begin()->second, config.encoding_two_qubit));
        }
    }
    if (last == Stage::hadamard) return result;

    // Imperfect loop visibility: a share (1 - v)/2 of each member picks up a
    // pi phase on D, which scales the C/D coherence by v.
    const double v = noise.sagnac_visibility;
    if (v < 1.0) {
        ElementChain flip;
        for (const auto &path : layout.copies(kPathD)) flip.then(phase_shift(reg, path, kPi));
        Ensemble split;
        for (const auto &m : state) {
            split.push_back({m.weight * (1 + v) / 2, m.state});
            split.push_back({m.weight * (1 - v) / 2, m.state});
        }
        state = split;
        ElementChain loop;
        for (const auto &[in, c, d] : std::vector<std::tuple<std::string, std::string, std::string>>{
                 {kArm2, kPathC, kPathD}, {twin_path(kArm2), twin_path(kPathC), twin_path(kPathD)}}) {
            if (reg.has_path(in)) loop.then(sagnac(reg, config.alpha, in, c, d));
        }
        for (std::size_t k = 0; k < state.size(); k++) {
            state[k].state = apply(loop, state[k].state);
            if (k % 2 == 1) state[k].state = apply(flip, state[k].state);
        }
    } else {
        ElementChain loop;
        for (const auto &[in, c, d] : std::vector<std::tuple<std::string, std::string, std::string>>{
                 {kArm2, kPathC, kPathD}, {twin_path(kArm2), twin_path(kPathC), twin_path(kPathD)}}) {
            if (reg.has_path(in)) loop.then(sagnac(reg, config.alpha, in, c, d));
        }
        state = apply_all(loop, state);
    }
    std::erase_if(state, [](const WeightedState &m) { return m.weight <= 0; });
    result.checkpoints.push_back({"loop", state});
    {
        const std::vector<std::vector<std::string>> arms_after{layout.arm1(), layout.arm2_after_loop()};
        Eigen::MatrixXcd rho = logical_density(state, config.encoding, arms_after);
        const QubitState loop_logical = to_logical(fixtures::loop_state(layout.base), config.encoding);
        result.fidelities.emplace_back("loop_state", logical_fidelity(rho, loop_logical));
        result.fidelities.emplace_back("cluster3", logical_fidelity(rho, fixtures::cluster3()));
        if (state.size() == 1) {
            auto sectors = split_sectors(state.front().state, base_registry_for(reg), arms_after);
            if (sectors.size() == 1) result.logical_three_qubit = normalized(to_logical(sectors.begin()->second, config.encoding));
        }
    }
    if (last == Stage::loop) return result;

    const double phi2_eff = config.feed_forward ? adapted_angle(config.phi2, config.m1) : config.phi2;
    result.coincidence_probability = analyzer_probability(state, layout, config.phi1, phi2_eff, config.m1, config.m2);
    return result;
}

double FringeFit::amplitude() const { return std::hypot(cos_coef, sin_coef); }
double FringeFit::phase() const { return std::atan2(sin_coef, cos_coef); }
double FringeFit::visibility() const { return offset != 0 ? amplitude() / offset : 0.0; }

FringeFit fit_fringe(const std::vector<double> &alphas, const std::vector<double> &values) {
    if (alphas.size() != values.size()) throw AnalysisError("fit inputs differ in length");
    std::set<double> distinct(alphas.begin(), alphas.end());
    if (distinct.size() < 3) throw AnalysisError("fringe fit needs at least 3 distinct alpha values");
    Eigen::MatrixXd design(alphas.size(), 3);
    Eigen::VectorXd y(alphas.size());
    for (std::size_t k = 0; k < alphas.size(); k++) {
        design(k, 0) = 1;
        design(k, 1) = std::cos(4 * alphas[k]);
        design(k, 2) = std::sin(4 * alphas[k]);
        y(k) = values[k];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw AnalysisError("alpha grid cannot separate the cos(4 alpha) and sin(4 alpha) terms");
    Eigen::Vector3d c = qr.solve(y);
    return {c(0), c(1), c(2)};
}

std::string FringeResult::to_csv() const {
    std::string out = counts ? "alpha_rad,expected_prob,oracle_prob,counts\n" : "alpha_rad,expected_prob,oracle_prob\n";
    char buf[128];
    for (std::size_t k = 0; k < alpha.size(); k++) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", alpha[k], expected[k], oracle[k]);
        out += buf;
        if (counts) out += "," + std::to_string((*counts)[k]);
        out += "\n";
    }
    return out;
}

std::string FringeResult::file_name() const {
    return "fringe_phi1_" + format_deg(phi1) + "_phi2_" + format_deg(phi2) + ".csv";
}

nlohmann::ordered_json FringeResult::fit_json() const {
    double worst = 0;
    for (std::size_t k = 0; k < expected.size(); k++) {
        // On the Y/Y0 scale, where the fringe mean is 1.
        worst = std::max(worst, 4 * std::abs(expected[k] - oracle[k]));
    }
    nlohmann::ordered_json j;
    j["phi1"] = phi1;
    j["phi2"] = phi2;
    j["file"] = file_name();
    j["offset"] = fit.offset;
    j["cos_coef"] = fit.cos_coef;
    j["sin_coef"] = fit.sin_coef;
    j["amplitude"] = fit.amplitude();
    j["phase"] = fit.phase();
    j["visibility"] = fit.visibility();
    j["oracle_phase"] = oracle_phase;
    j["max_deviation"] = worst;
    return j;
}

std::vector<FringeResult> sweep_alpha(const ExperimentConfig &config) {
    config.validate();
    const std::vector<double> grid = config.alpha_grid();
    std::set<double> distinct(grid.begin(), grid.end());
    if (distinct.size() < 3) throw AnalysisError("fringe fit needs at least 3 distinct alpha values");
    if (config.final_stage() != Stage::analyzers) throw ConfigError("a sweep needs the full chain (stop_after analyzers)");

    const auto bases = config.basis_list();
    const std::size_t per_basis = grid.size();
    const std::size_t jobs = bases.size() * per_basis;
    std::vector<double> expected(jobs);

    auto work = [&](std::size_t job) {
        ExperimentConfig c = config;
        c.phi1 = bases[job / per_basis].first;
        c.phi2 = bases[job / per_basis].second;
        c.alpha = grid[job % per_basis];
        expected[job] = *run_pipeline(c).coincidence_probability;
    };

    std::size_t workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                               : static_cast<std::size_t>(config.threads);
    workers = std::min(workers, jobs);
    if (workers <= 1) {
        for (std::size_t j = 0; j < jobs; j++) work(j);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; w++) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t j = w; j < jobs; j += workers) work(j);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto &t : pool) t.join();
        for (auto &e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::vector<FringeResult> out;
    const double a = a_from_R(config.bs_reflectivity);
    for (std::size_t b = 0; b < bases.size(); b++) {
        FringeResult r;
        r.phi1 = bases[b].first;
        r.phi2 = bases[b].second;
        r.alpha = grid;
        r.expected.assign(expected.begin() + b * per_basis, expected.begin() + (b + 1) * per_basis);
        for (double al : grid) {
            r.oracle.push_back(coincidence_oracle(al, r.phi1, r.phi2, config.m1, config.m2, config.feed_forward,
                                                  config.bs_reflectivity, config.noise));
        }
        std::vector<double> fit_values = r.expected;
        if (!config.infinite_statistics) {
            std::vector<std::uint64_t> counts;
            const std::uint64_t basis_seed = derive_seed(config.seed, b);
            for (std::size_t k = 0; k < per_basis; k++) {
                counts.push_back(sample_counts(std::clamp(r.expected[k], 0.0, 1.0), config.rate, config.integration,
                                               derive_seed(basis_seed, k)));
            }
            fit_values.assign(counts.begin(), counts.end());
            r.counts = std::move(counts);
        }
        r.fit = fit_fringe(grid, fit_values);
        // Oracle phase: Y - Y0 is R cos(4 alpha + phi2' - delta) at the effective angles.
        const double phi1_eff = r.phi1 + kPi * config.m1;
        const double phi2_eff = (config.feed_forward ? adapted_angle(r.phi2, config.m1) : r.phi2) + kPi * config.m2;
        const double cos_part = (1 - 2 * a * a) * config.noise.sagnac_visibility;
        const double sin_part = 2 * a * std::sqrt(1 - a * a) * std::sin(phi1_eff) * config.noise.sagnac_visibility *
                                config.noise.indistinguishability;
        r.oracle_phase = std::remainder(std::atan2(sin_part, cos_part) - phi2_eff, 2 * kPi);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

nlohmann::ordered_json bloch_json(const BlochVector &b) { return {b.x, b.y, b.z}; }

double bloch_distance(const BlochVector &a, const BlochVector &b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

}  // namespace

nlohmann::ordered_json TomographyRun::summary_json() const {
    const PolarizationVector singlet = fixtures::singlet();
    const PolarizationVector prime = fixtures::psi_prime(reflectivity);
    auto pure_overlap = [](const Eigen::Matrix4cd &m, const PolarizationVector &v) {
        return (v.adjoint() * m * v)(0, 0).real();
    };
    nlohmann::ordered_json j;
    j["settings"] = data.settings.size();
    j["total_counts"] = data.total();
    j["truth"] = {{"fidelity_singlet", fidelity_pure(truth, singlet)},
                  {"fidelity_psi_prime", fidelity_pure(truth, prime)},
                  {"purity", purity(truth)}};
    j["linear_inversion"] = {{"fidelity_singlet", pure_overlap(linear, singlet)},
                             {"fidelity_psi_prime", pure_overlap(linear, prime)},
                             {"trace_distance_to_truth", trace_distance(linear, truth.matrix())},
                             {"min_eigenvalue", Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(linear).eigenvalues()(0)}};
    j["mle"] = {{"fidelity_singlet", fidelity_pure(mle.rho, singlet)},
                {"fidelity_psi_prime", fidelity_pure(mle.rho, prime)},
                {"purity", purity(mle.rho)},
                {"trace_distance_to_truth", trace_distance(mle.rho, truth)},
                {"log_likelihood", mle.log_likelihood},
                {"iterations", mle.iterations},
                {"converged", mle.converged}};
    return j;
}

TomographyRun reconstruct_tomography(const TomographyData &data, const ExperimentConfig &config) {
    config.validate();
    Eigen::Matrix4cd linear = linear_inversion(data);
    MleResult mle = mle_reconstruct(data, config.mle_tolerance);
    // Without a known truth the MLE estimate stands in for it.
    return {mle.rho, data, linear, mle, config.bs_reflectivity};
}

TomographyRun run_tomography(const ExperimentConfig &config) {
    ExperimentConfig c = config;
    c.stop_after = Stage::beam_splitter;
    const DensityMatrix truth = run_pipeline(c).polarization;
    std::optional<std::uint64_t> seed;
    if (!config.infinite_statistics) seed = config.seed;
    TomographyData data = simulate_tomography(truth, standard_settings(), config.shots, seed);
    Eigen::Matrix4cd linear = linear_inversion(data);
    MleResult mle = mle_reconstruct(data, config.mle_tolerance);
    return {truth, std::move(data), linear, std::move(mle), config.bs_reflectivity};
}

double MbqcReport::min_overlap() const {
    double m = 1;
    for (const auto &t : trials) m = std::min(m, t.overlap);
    return m;
}

double MbqcReport::max_corrected_deviation() const {
    double m = 0;
    for (const auto &t : trials) m = std::max(m, bloch_distance(t.corrected, target));
    return m;
}

nlohmann::ordered_json MbqcReport::to_json() const {
    nlohmann::ordered_json j;
    j["phi1"] = phi1;
    j["phi2"] = phi2;
    j["target_bloch"] = bloch_json(target);
    j["trials"] = nlohmann::ordered_json::array();
    for (const auto &t : trials) {
        j["trials"].push_back({{"m1", t.run.first.outcome},
                               {"m2", t.run.second.outcome},
                               {"p_m1", t.run.first.probability},
                               {"p_m2", t.run.second.probability},
                               {"angle2", t.run.second.angle},
                               {"residual_bloch", bloch_json(t.residual)},
                               {"oracle_bloch", bloch_json(t.oracle_bloch)},
                               {"overlap", t.overlap},
                               {"corrected_bloch", bloch_json(t.corrected)}});
    }
    j["min_overlap"] = min_overlap();
    j["max_corrected_deviation"] = max_corrected_deviation();
    return j;
}

MbqcReport run_mbqc_demo(const ExperimentConfig &config, std::optional<std::pair<int, int>> branch, bool sample) {
    config.validate();
    if (branch && sample) throw ConfigError("choose either a forced branch or sampling, not both");
    if (branch && ((branch->first != 0 && branch->first != 1) || (branch->second != 0 && branch->second != 1))) {
        throw ConfigError("branch outcomes must be 0 or 1");
    }
    const QubitState cluster = to_textbook_frame(fixtures::cluster3());
    MbqcReport report{config.phi1, config.phi2, {}, {}};
    const QubitState target_state =
        apply_1q(apply_1q(QubitState::plus(1), 0, gates::rz(config.phi1)), 0, gates::rx(config.phi2));
    report.target = bloch_vector(target_state);

    auto record = [&](const MbqcRun &run) {
        QubitState oracle = mbqc_output_oracle(config.phi1, config.phi2, run.first.outcome, run.second.outcome);
        MbqcTrial t{run,
                    oracle,
                    overlap(oracle, run.residual),
                    bloch_vector(run.residual),
                    bloch_vector(oracle),
                    bloch_vector(correct_byproduct(run.residual, run.first.outcome, run.second.outcome))};
        report.trials.push_back(std::move(t));
    };

    if (sample) {
        std::mt19937_64 rng(config.seed);
        for (int k = 0; k < config.mbqc_samples; k++) {
            record(run_two_step_mbqc(cluster, config.phi1, config.phi2, std::nullopt, &rng));
        }
    } else if (branch) {
        record(run_two_step_mbqc(cluster, config.phi1, config.phi2, branch));
    } else {
        for (int m1 = 0; m1 < 2; m1++) {
            for (int m2 = 0; m2 < 2; m2++) record(run_two_step_mbqc(cluster, config.phi1, config.phi2, std::pair{m1, m2}));
        }
    }
    return report;
}

}  // namespace polpath
