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

#ifndef POLPATH_PIPELINE_HPP
#define POLPATH_PIPELINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polpath/density.hpp"
#include "polpath/encoding.hpp"
#include "polpath/fock.hpp"
#include "polpath/mbqc.hpp"
#include "polpath/noise.hpp"
#include "polpath/optics.hpp"
#include "polpath/tomography.hpp"

namespace polpath {

inline constexpr int kConfigVersion = 1;

/// A waveplate placed on one arm right after the entangling beam splitter.
struct CorrectionPlate {
    std::string path;
    WaveplateKind kind;
    double angle_deg;
};

/// Where the optical chain stops.
enum class Stage { beam_splitter, hadamard, loop, analyzers };
std::string stage_name(Stage s);
Stage parse_stage(const std::string &s);  // ConfigError on unknown names

/// One analyzer pair (phi1, phi2) for a fringe.
using BasisPair = std::pair<double, double>;

/// Everything needed to run the experiment. Angles are in radians unless
/// the key says otherwise.
struct ExperimentConfig {
    double bs_reflectivity = 0.5;
    double alpha = 0;
    double phi1 = 0;
    double phi2 = 0;
    int m1 = 0;
    int m2 = 0;
    bool feed_forward = true;
    NoiseModel noise = NoiseModel::ideal();
    bool infinite_statistics = true;
    double rate = 1000;      // post-selected pairs per second
    double integration = 10; // seconds per point
    double shots = 10000;    // tomography pairs per setting
    std::uint64_t seed = 0;
    double alpha_start = 0;
    double alpha_stop = 1.5707963267948966;
    int alpha_points = 64;
    std::vector<double> alphas;  // explicit grid; overrides start/stop/points
    std::string phase_plates = "cluster";  // "cluster" or "singlet"
    std::vector<CorrectionPlate> correction_plates;
    std::optional<Stage> stop_after;  // default: analyzers, or beam_splitter for "singlet"
    double hadamard_plate_deg = 22.5;
    std::vector<BasisPair> bases;  // empty: the single pair (phi1, phi2)
    double mle_tolerance = 1e-10;
    int threads = 1;
    int mbqc_samples = 8;
    EncodingMap encoding = EncodingMap::cluster_frame();
    EncodingMap encoding_two_qubit = EncodingMap::two_qubit();

    Stage final_stage() const;
    /// The alpha values of the sweep, sorted ascending.
    std::vector<double> alpha_grid() const;
    std::vector<BasisPair> basis_list() const;
    void validate() const;  // ConfigError

    nlohmann::ordered_json to_json() const;
    /// Requires "spec_version": 1; unknown keys are ConfigErrors.
    static ExperimentConfig from_json(const nlohmann::json &j);
    static ExperimentConfig from_json_text(const std::string &text);
    /// Flat override. The value is parsed as JSON when possible, else taken
    /// as a bare string.
    void set(const std::string &key, const std::string &value);
};

/// The 16 analyzer pairs {-pi/4, 0, pi/4, pi/2}^2.
std::vector<BasisPair> grid16_bases();

/// a^2 = (1-R)^2 / ((1-R)^2 + R^2), positive root.
double a_from_R(double reflectivity);

/// Y(alpha) = Y0 (1 + (1-2a^2) cos(4 alpha + phi2)
///               + 2a sqrt(1-a^2) sin(4 alpha + phi2) sin(phi1)).
double fringe_oracle(double alpha, double phi1, double phi2, double a, double y0);

/// Y(alpha) with imperfections: v_s multiplies both modulation terms and p
/// the one that needs two-photon interference.
double fringe_oracle_noisy(double alpha, double phi1, double phi2, double a, double y0, const NoiseModel &noise);

/// Conditional coincidence probability for the analyzer outcomes (m1, m2):
/// Y/(4 Y0) evaluated at the effective angles phi1 + pi m1 and
/// phi2' + pi m2, where phi2' is the feed-forward adapted angle.
double coincidence_oracle(double alpha, double phi1, double phi2, int m1, int m2, bool feed_forward,
                          double reflectivity, const NoiseModel &noise);

namespace fixtures {
/// (|+00> - |-11>)/sqrt(2)
QubitState cluster3();
/// (|0+> + |1->)/sqrt(2)
QubitState cluster2();
/// (|1H>_1|1H>_C - |1H>_1|1V>_D - |1V>_1|1H>_C - |1V>_1|1V>_D)/2
PhotonicState loop_state(RegistryPtr registry, const std::string &arm1 = "1", const std::string &path_c = "C",
                         const std::string &path_d = "D");
/// (|HV> - |VH>)/sqrt(2)
PolarizationVector singlet();
/// a|HV> - sqrt(1-a^2)|VH> with a = a_from_R(R): the post-selected output.
PolarizationVector psi_prime(double reflectivity);
}  // namespace fixtures

/// Maps the three-qubit output of cluster_frame() to the textbook linear
/// cluster CZ01 CZ12|+++> by applying Z on qubit 1 and H on qubit 2.
QubitState to_textbook_frame(const QubitState &cluster3);

struct Checkpoint {
    std::string name;
    Ensemble state;  // post-selected members, weights summing to 1
};

struct PipelineResult {
    std::vector<Checkpoint> checkpoints;
    double post_selection_probability = 0;
    std::optional<double> coincidence_probability;
    DensityMatrix polarization = DensityMatrix::maximally_mixed();  // after the beam splitter
    std::optional<QubitState> logical_two_qubit;    // after the Hadamard plate
    std::optional<QubitState> logical_three_qubit;  // after the loop
    std::vector<std::pair<std::string, double>> fidelities;

    const Checkpoint *find(const std::string &name) const;
    nlohmann::ordered_json summary_json() const;
};

/// Source, beam splitter, post-selection, correction plates, Hadamard plate,
/// loop, analyzers. Each stage reached is recorded as a checkpoint.
PipelineResult run_pipeline(const ExperimentConfig &config);

/// Logical density matrix of an ensemble whose paths may carry
/// distinguishable-photon twins. Photons are grouped by detector arm; the
/// twin label of each arm is traced out.
Eigen::MatrixXcd logical_density(const Ensemble &e, const EncodingMap &map,
                                 const std::vector<std::vector<std::string>> &arms);

struct FringeFit {
    double offset;    // C
    double cos_coef;  // A
    double sin_coef;  // B
    double amplitude() const;
    /// theta in C + amplitude * cos(4 alpha - theta)
    double phase() const;
    double visibility() const;
};

/// Least squares for C + A cos(4 alpha) + B sin(4 alpha). AnalysisError if
/// fewer than three distinct alpha values.
FringeFit fit_fringe(const std::vector<double> &alphas, const std::vector<double> &values);

struct FringeResult {
    double phi1, phi2;
    std::vector<double> alpha;
    std::vector<double> expected;
    std::vector<double> oracle;
    std::optional<std::vector<std::uint64_t>> counts;
    FringeFit fit;
    double oracle_phase;  // phase() that the oracle predicts

    std::string to_csv() const;
    std::string file_name() const;
    nlohmann::ordered_json fit_json() const;
};

/// Runs the pipeline over the alpha grid for each analyzer pair. Points are
/// evaluated on `threads` workers and merged in grid order; sampled counts
/// use sub-seeds derived from (seed, basis index, alpha index).
std::vector<FringeResult> sweep_alpha(const ExperimentConfig &config);

/// Tomography of the post-selected polarization state: counts from the
/// pipeline's density matrix, then both estimators.
struct TomographyRun {
    DensityMatrix truth;
    TomographyData data;
    Eigen::Matrix4cd linear;
    MleResult mle;
    double reflectivity;

    nlohmann::ordered_json summary_json() const;
};

/// Counts are expected values under infinite statistics, otherwise Poisson
/// draws seeded from config.seed.
TomographyRun run_tomography(const ExperimentConfig &config);
/// Reconstruction only, for counts read from a file.
TomographyRun reconstruct_tomography(const TomographyData &data, const ExperimentConfig &config);

/// One pass of the two-measurement protocol on (|+00> - |-11>)/sqrt(2),
/// taken to the textbook frame first.
struct MbqcTrial {
    MbqcRun run;
    QubitState oracle;
    double overlap;
    BlochVector residual;
    BlochVector oracle_bloch;
    BlochVector corrected;
};

struct MbqcReport {
    double phi1, phi2;
    std::vector<MbqcTrial> trials;
    BlochVector target;  // rx(phi2) rz(phi1)|+>
    double min_overlap() const;
    /// Largest deviation of a byproduct-corrected output from the target.
    double max_corrected_deviation() const;
    nlohmann::ordered_json to_json() const;
};

/// With `branch` the outcomes are forced; with `sample` config.mbqc_samples
/// runs are drawn from a generator seeded by config.seed; with neither all
/// four branches are listed.
MbqcReport run_mbqc_demo(const ExperimentConfig &config, std::optional<std::pair<int, int>> branch, bool sample);

}  // namespace polpath

#endif
