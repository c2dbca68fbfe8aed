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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polpath/error.hpp"
#include "polpath/pipeline.hpp"

using namespace polpath;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig sweep_config(double reflectivity) {
    ExperimentConfig c;
    c.bs_reflectivity = reflectivity;
    c.alpha_points = 64;
    return c;
}

double fidelity_named(const PipelineResult &r, const std::string &name) {
    for (const auto &[n, f] : r.fidelities) {
        if (n == name) return f;
    }
    ADD_FAILURE() << "no fidelity named " << name;
    return -1;
}

/// Magnitude of the fringe offset relative to sin(4 alpha + phi2).
double offset_from_fit(const FringeResult &r) { return std::remainder(kPi / 2 - r.phi2 - r.fit.phase(), 2 * kPi); }

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
    ExperimentConfig c;
    auto j = c.to_json();
    EXPECT_EQ(j["spec_version"], 1);
    ExperimentConfig back = ExperimentConfig::from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.to_json().dump(), j.dump());
}

TEST(Config, RejectsUnknownKeysAndBadVersions) {
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "reflectivty": 0.5})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"bs_reflectivity": 0.5})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 2})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1,)"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text("[1]"), ConfigError);
}

TEST(Config, ValidatesRanges) {
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "bs_reflectivity": 1.0})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "m1": 2})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "indistinguishability": 1.5})"),
                 ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "alphas": [0.2, 0.1, 0.3]})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "bs_reflectivity": "half"})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "stop_after": "nowhere"})"), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json_text(R"({"spec_version": 1, "encoding": "two_qubit"})"), ConfigError);
}

TEST(Config, SetOverrides) {
    ExperimentConfig c;
    c.set("bs_reflectivity", "0.59");
    c.set("bases", "grid16");
    c.set("phase_plates", "singlet");
    c.set("alphas", "[0, 0.1, 0.2]");
    EXPECT_DOUBLE_EQ(c.bs_reflectivity, 0.59);
    EXPECT_EQ(c.basis_list().size(), 16u);
    EXPECT_EQ(c.final_stage(), Stage::beam_splitter);
    EXPECT_EQ(c.alpha_grid().size(), 3u);
    // A rejected override leaves the config untouched.
    EXPECT_THROW(c.set("bs_reflectivity", "7"), ConfigError);
    EXPECT_THROW(c.set("no_such_key", "1"), ConfigError);
    EXPECT_DOUBLE_EQ(c.bs_reflectivity, 0.59);
}

TEST(Config, AlphaGridIsInclusive) {
    ExperimentConfig c;
    c.alpha_start = 0.1;
    c.alpha_stop = 0.5;
    c.alpha_points = 5;
    auto g = c.alpha_grid();
    ASSERT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.front(), 0.1);
    EXPECT_DOUBLE_EQ(g.back(), 0.5);
    EXPECT_NEAR(g[2], 0.3, 1e-15);
}

TEST(AFromR, KnownValues) {
    EXPECT_NEAR(a_from_R(0.5), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(a_from_R(0.59), 0.57065, 1e-5);
    EXPECT_LT(a_from_R(1 - 1e-9), 1e-8);
    EXPECT_THROW(a_from_R(0.0), DomainError);
    EXPECT_THROW(a_from_R(1.0), DomainError);
}

TEST(FringeOracle, PrintedExamples) {
    const double a = 1 / std::sqrt(2.0);
    EXPECT_NEAR(fringe_oracle(kPi / 8, kPi / 2, 0, a, 1), 2.0, 1e-15);
    for (double alpha : {0.0, 0.3, 1.1}) EXPECT_NEAR(fringe_oracle(alpha, 0, 0.7, a, 2.5), 2.5, 1e-15);
    EXPECT_THROW(fringe_oracle(0, 0, 0, 1.0, 1), DomainError);
    EXPECT_THROW(fringe_oracle(0, 0, 0, 0.5, 0), DomainError);
}

TEST(FringeOracle, NoiseScalesModulation) {
    const double a = a_from_R(0.59);
    const NoiseModel noisy{0.97, 0.995};
    for (double alpha : {0.0, 0.2, 0.5}) {
        const double x = 4 * alpha + 0.3;
        const double expected = 1 + 0.995 * ((1 - 2 * a * a) * std::cos(x) +
                                             0.97 * 2 * a * std::sqrt(1 - a * a) * std::sin(x) * std::sin(1.0));
        EXPECT_NEAR(fringe_oracle_noisy(alpha, 1.0, 0.3, a, 1, noisy), expected, 1e-15);
    }
}

TEST(Pipeline, IdealCheckpoints) {
    ExperimentConfig c;
    c.stop_after = Stage::loop;
    PipelineResult r = run_pipeline(c);
    ASSERT_EQ(r.checkpoints.size(), 4u);
    EXPECT_EQ(r.checkpoints[0].name, "source");
    EXPECT_EQ(r.checkpoints[3].name, "loop");
    EXPECT_NEAR(r.post_selection_probability, 0.5, 1e-15);
    for (const char *name : {"psi_prime", "singlet", "cluster2", "loop_state", "cluster3"}) {
        EXPECT_NEAR(fidelity_named(r, name), 1.0, 1e-12) << name;
    }
    ASSERT_TRUE(r.logical_three_qubit.has_value());
    EXPECT_NEAR(overlap(*r.logical_three_qubit, fixtures::cluster3()), 1.0, 1e-12);
    ASSERT_TRUE(r.logical_two_qubit.has_value());
    EXPECT_NEAR(overlap(*r.logical_two_qubit, fixtures::cluster2()), 1.0, 1e-12);
    EXPECT_FALSE(r.coincidence_probability.has_value());

    const Ensemble &loop = r.find("loop")->state;
    ASSERT_EQ(loop.size(), 1u);
    const PhotonicState target = fixtures::loop_state(loop.front().state.registry_ptr());
    EXPECT_NEAR(fidelity(loop.front().state, target), 1.0, 1e-12);
}

TEST(Pipeline, StopsWhereAsked) {
    ExperimentConfig c;
    c.stop_after = Stage::hadamard;
    PipelineResult r = run_pipeline(c);
    EXPECT_EQ(r.checkpoints.back().name, "hadamard");
    EXPECT_EQ(r.find("loop"), nullptr);
}

TEST(Pipeline, UnbalancedSplitter) {
    ExperimentConfig c;
    c.bs_reflectivity = 0.59;
    c.phase_plates = "singlet";
    PipelineResult r = run_pipeline(c);
    EXPECT_EQ(r.checkpoints.back().name, "beam_splitter");
    EXPECT_NEAR(r.post_selection_probability, 0.41 * 0.41 + 0.59 * 0.59, 1e-12);
    EXPECT_NEAR(r.post_selection_probability, 0.5162, 1e-12);
    const Eigen::Matrix4cd &rho = r.polarization.matrix();
    EXPECT_NEAR(std::sqrt(rho(1, 1).real()), 0.5706, 1e-4);
    EXPECT_NEAR(std::sqrt(rho(2, 2).real()), 0.8212, 1e-4);
    EXPECT_NEAR(std::sqrt(rho(1, 1).real()), a_from_R(0.59), 1e-10);
    EXPECT_NEAR(fidelity_named(r, "psi_prime"), 1.0, 1e-12);
    EXPECT_LT(fidelity_named(r, "singlet"), 0.97);
}

TEST(Pipeline, CorrectionPlatesAct) {
    ExperimentConfig c;
    c.phase_plates = "singlet";
    c.correction_plates.push_back({"2", WaveplateKind::half, 0.0});
    PipelineResult r = run_pipeline(c);
    // HWP at 0 flips the sign of V on arm 2: singlet becomes the triplet.
    EXPECT_NEAR(fidelity_named(r, "singlet"), 0.0, 1e-12);
}

TEST(Pipeline, NoisyMembersStayNormalized) {
    ExperimentConfig c;
    c.noise = NoiseModel::measured();
    c.bs_reflectivity = 0.59;
    c.alpha = 0.3;
    c.phi1 = kPi / 2;
    PipelineResult r = run_pipeline(c);
    for (const auto &cp : r.checkpoints) {
        double w = 0;
        for (const auto &m : cp.state) w += m.weight;
        EXPECT_NEAR(w, 1.0, 1e-12) << cp.name;
    }
    EXPECT_LT(fidelity_named(r, "cluster3"), 1.0);
    EXPECT_NEAR(*r.coincidence_probability,
                coincidence_oracle(0.3, kPi / 2, 0, 0, 0, true, 0.59, NoiseModel::measured()), 1e-12);
}

TEST(Pipeline, CoincidenceMatchesOracleOnAllBranches) {
    for (bool ff : {true, false}) {
        for (int m1 : {0, 1}) {
            for (int m2 : {0, 1}) {
                ExperimentConfig c;
                c.bs_reflectivity = 0.59;
                c.alpha = 0.37;
                c.phi1 = 0.6;
                c.phi2 = -1.1;
                c.m1 = m1;
                c.m2 = m2;
                c.feed_forward = ff;
                const double sim = *run_pipeline(c).coincidence_probability;
                EXPECT_NEAR(sim, coincidence_oracle(0.37, 0.6, -1.1, m1, m2, ff, 0.59, c.noise), 1e-12);
            }
        }
    }
}

TEST(Sweep, AllSixteenBasesMatchOracle) {
    for (double reflectivity : {0.5, 0.59}) {
        ExperimentConfig c = sweep_config(reflectivity);
        c.bases = grid16_bases();
        auto results = sweep_alpha(c);
        ASSERT_EQ(results.size(), 16u);
        for (const auto &r : results) {
            ASSERT_EQ(r.alpha.size(), 64u);
            for (std::size_t k = 0; k < r.alpha.size(); k++) {
                const double y = fringe_oracle(r.alpha[k], r.phi1, r.phi2, a_from_R(reflectivity), 1.0);
                EXPECT_NEAR(4 * r.expected[k], y, 1e-9);
                EXPECT_GE(r.expected[k], 0.0);
                EXPECT_LE(r.expected[k], 1.0);
            }
            EXPECT_LT(r.fit_json()["max_deviation"].get<double>(), 1e-9);
        }
    }
}

TEST(Sweep, CoarseGridOverReflectivity) {
    for (double reflectivity : {0.2, 0.45, 0.59, 0.8}) {
        for (double phi1 : {-1.0, 0.4, 2.0}) {
            for (double phi2 : {-2.5, 0.0, 1.3}) {
                for (double alpha : {0.0, 0.25, 0.9, 1.4}) {
                    ExperimentConfig c;
                    c.bs_reflectivity = reflectivity;
                    c.alpha = alpha;
                    c.phi1 = phi1;
                    c.phi2 = phi2;
                    const double y = fringe_oracle(alpha, phi1, phi2, a_from_R(reflectivity), 1.0);
                    EXPECT_NEAR(4 * *run_pipeline(c).coincidence_probability, y, 1e-9);
                }
            }
        }
    }
}

TEST(Sweep, PeriodInAlphaIsQuarterTurn) {
    for (const auto &[phi1, phi2] : grid16_bases()) {
        for (double alpha : {0.0, 0.17, 0.61, 1.3}) {
            ExperimentConfig a;
            a.bs_reflectivity = 0.59;
            a.phi1 = phi1;
            a.phi2 = phi2;
            a.alpha = alpha;
            ExperimentConfig b = a;
            b.alpha = alpha + kPi / 2;
            EXPECT_NEAR(*run_pipeline(a).coincidence_probability, *run_pipeline(b).coincidence_probability, 1e-10);
        }
    }
}

TEST(Sweep, FitPhaseMatchesOracle) {
    ExperimentConfig c = sweep_config(0.59);
    c.phi1 = kPi / 2;
    c.phi2 = kPi / 2;
    FringeResult r = sweep_alpha(c).at(0);
    EXPECT_NEAR(std::remainder(r.fit.phase() - r.oracle_phase, 2 * kPi), 0.0, 1e-6);
    const double a = a_from_R(0.59);
    EXPECT_NEAR(r.fit.amplitude() * 4, std::hypot(1 - 2 * a * a, 2 * a * std::sqrt(1 - a * a)), 1e-9);
}

TEST(Sweep, OffsetVanishesOnlyForBalancedSplitter) {
    const double a = a_from_R(0.59);
    const double closed_form = std::atan2(1 - 2 * a * a, 2 * a * std::sqrt(1 - a * a));
    for (double phi2 : {0.0, kPi / 2}) {
        ExperimentConfig balanced = sweep_config(0.5);
        balanced.phi1 = kPi / 2;
        balanced.phi2 = phi2;
        EXPECT_NEAR(offset_from_fit(sweep_alpha(balanced).at(0)), 0.0, 1e-8);

        ExperimentConfig unbalanced = sweep_config(0.59);
        unbalanced.phi1 = kPi / 2;
        unbalanced.phi2 = phi2;
        const double offset = offset_from_fit(sweep_alpha(unbalanced).at(0));
        EXPECT_NEAR(std::abs(offset), std::abs(closed_form), 1e-8);
        EXPECT_GT(std::abs(offset) * 180 / kPi, 10.0);
    }
}

TEST(Sweep, NoisyFringeFollowsExtendedOracle) {
    ExperimentConfig c = sweep_config(0.59);
    c.noise = {0.97, 1.0};
    c.phi1 = kPi / 2;
    c.alpha_points = 33;
    FringeResult noisy = sweep_alpha(c).at(0);
    c.noise = NoiseModel::ideal();
    FringeResult ideal = sweep_alpha(c).at(0);
    for (std::size_t k = 0; k < noisy.alpha.size(); k++) EXPECT_NEAR(noisy.expected[k], noisy.oracle[k], 1e-12);
    // Only the two-photon interference term is scaled by p.
    EXPECT_NEAR(noisy.fit.sin_coef / ideal.fit.sin_coef, 0.97, 1e-9);
    EXPECT_NEAR(noisy.fit.cos_coef / ideal.fit.cos_coef, 1.0, 1e-9);
}

TEST(Sweep, SerialAndParallelAgreeBitForBit) {
    ExperimentConfig c = sweep_config(0.59);
    c.bases = grid16_bases();
    c.alpha_points = 16;
    c.infinite_statistics = false;
    c.seed = 1234;
    c.threads = 1;
    auto serial = sweep_alpha(c);
    c.threads = 4;
    auto parallel = sweep_alpha(c);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t b = 0; b < serial.size(); b++) {
        EXPECT_EQ(serial[b].to_csv(), parallel[b].to_csv());
        EXPECT_EQ(serial[b].fit_json().dump(), parallel[b].fit_json().dump());
        ASSERT_TRUE(serial[b].counts.has_value());
    }
    c.seed = 1235;
    EXPECT_NE(sweep_alpha(c)[0].to_csv(), serial[0].to_csv());
}

TEST(Sweep, SampledCountsTrackExpectation) {
    ExperimentConfig c = sweep_config(0.5);
    c.phi1 = kPi / 2;
    c.infinite_statistics = false;
    c.rate = 1e5;
    c.integration = 10;
    FringeResult r = sweep_alpha(c).at(0);
    const double scale = c.rate * c.integration;
    EXPECT_NEAR(r.fit.amplitude() / scale, 0.25, 2e-3);
    EXPECT_NEAR(std::remainder(r.fit.phase() - r.oracle_phase, 2 * kPi), 0.0, 1e-2);
    EXPECT_NE(r.to_csv().find("alpha_rad,expected_prob,oracle_prob,counts\n"), std::string::npos);
}

TEST(Sweep, GridErrors) {
    ExperimentConfig c;
    c.alphas = {0.0, 0.1};
    EXPECT_THROW(sweep_alpha(c), AnalysisError);
    c.alphas = {0.0, 0.0, 0.1};
    EXPECT_THROW(sweep_alpha(c), AnalysisError);
    // Three distinct points a quarter turn apart cannot separate cos and sin.
    EXPECT_THROW(fit_fringe({0.0, kPi / 2, kPi}, {1, 1, 1}), AnalysisError);
    ExperimentConfig stopped;
    stopped.stop_after = Stage::loop;
    EXPECT_THROW(sweep_alpha(stopped), ConfigError);
}

TEST(Sweep, FileNamesAndCsv) {
    ExperimentConfig c = sweep_config(0.5);
    c.bases = {{-kPi / 4, kPi / 2}};
    c.alpha_stop = 0.5;
    c.alpha_points = 3;
    FringeResult r = sweep_alpha(c).at(0);
    EXPECT_EQ(r.file_name(), "fringe_phi1_-45_phi2_90.csv");
    const std::string csv = r.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha_rad,expected_prob,oracle_prob");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Tomography, RunOnPipelineState) {
    ExperimentConfig c;
    c.bs_reflectivity = 0.59;
    c.infinite_statistics = false;
    c.seed = 11;
    TomographyRun r = run_tomography(c);
    EXPECT_GT(fidelity_pure(r.mle.rho, fixtures::psi_prime(0.59)), 0.98);
    auto j = r.summary_json();
    EXPECT_TRUE(j.contains("mle"));
    TomographyRun again = run_tomography(c);
    EXPECT_EQ(again.data.to_csv(), r.data.to_csv());
    EXPECT_EQ(again.summary_json().dump(), j.dump());
}

TEST(Mbqc, DemoCoversAllBranches) {
    ExperimentConfig c;
    c.phi1 = 0.7;
    c.phi2 = -1.9;
    MbqcReport all = run_mbqc_demo(c, std::nullopt, false);
    EXPECT_EQ(all.trials.size(), 4u);
    EXPECT_GE(all.min_overlap(), 1 - 1e-10);
    EXPECT_LT(all.max_corrected_deviation(), 1e-10);

    MbqcReport one = run_mbqc_demo(c, std::make_pair(1, 0), false);
    ASSERT_EQ(one.trials.size(), 1u);
    EXPECT_EQ(one.trials[0].run.first.outcome, 1);

    c.mbqc_samples = 5;
    c.seed = 3;
    MbqcReport sampled = run_mbqc_demo(c, std::nullopt, true);
    EXPECT_EQ(sampled.trials.size(), 5u);
    EXPECT_EQ(run_mbqc_demo(c, std::nullopt, true).to_json().dump(), sampled.to_json().dump());
    EXPECT_THROW(run_mbqc_demo(c, std::make_pair(0, 0), true), ConfigError);
    EXPECT_THROW(run_mbqc_demo(c, std::make_pair(0, 2), false), ConfigError);
}

TEST(Frames, TextbookFrameOfPrintedCluster) {
    EXPECT_NEAR(overlap(to_textbook_frame(fixtures::cluster3()), build_cluster(GraphSpec::line(3))), 1.0, 1e-14);
}
