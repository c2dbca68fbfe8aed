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

#include <algorithm>
#include <cmath>

#include "polpath/error.hpp"
#include "polpath/pipeline.hpp"
#include "polpath/tomography.hpp"

using namespace polpath;

namespace {

PolarizationVector ket(Complex hh, Complex hv, Complex vh, Complex vv) {
    PolarizationVector v;
    v << hh, hv, vh, vv;
    return v.normalized();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double expected_fraction(const DensityMatrix &rho, Analyzer a, Analyzer b) {
    TomographyData d = simulate_tomography(rho, {{a, b}}, 1.0, std::nullopt);
    return d.counts.at(0);
}

/// p|psi'><psi'| + (1-p) times the dephased copy of psi', with p fixed so
/// the fidelity to psi' is `target`.
DensityMatrix synthetic_state(double reflectivity, double target) {
    const PolarizationVector psi = fixtures::psi_prime(reflectivity);
    Eigen::Matrix4cd dephased = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < 4; k++) dephased(k, k) = std::norm(psi(k));
    const double floor = dephased.real().diagonal().squaredNorm();
    const double p = (target - floor) / (1 - floor);
    return DensityMatrix(p * psi * psi.adjoint() + (1 - p) * dephased);
}

}  // namespace

TEST(Analyzers, NamesRoundTrip) {
    for (Analyzer a : {Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::A, Analyzer::R, Analyzer::L}) {
        EXPECT_EQ(parse_analyzer(analyzer_name(a)), a);
        EXPECT_NEAR(analyzer_ket(a).norm(), 1.0, 1e-15);
    }
    EXPECT_THROW(parse_analyzer("Q"), AnalysisError);
}

TEST(Settings, StandardSetIsCompleteAndQ1Major) {
    auto s = standard_settings();
    ASSERT_EQ(s.size(), 36u);
    EXPECT_EQ(s[0], (TomographySetting{Analyzer::H, Analyzer::H}));
    EXPECT_EQ(s[1], (TomographySetting{Analyzer::H, Analyzer::V}));
    EXPECT_EQ(s[6], (TomographySetting{Analyzer::V, Analyzer::H}));
    Eigen::MatrixXcd design(36, 16);
    for (std::size_t k = 0; k < s.size(); k++) {
        Eigen::Matrix4cd p = projector(s[k]);
        EXPECT_NEAR(std::abs(p.trace() - Complex(1, 0)), 0.0, 1e-15);
        EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-15);
        design.row(static_cast<Eigen::Index>(k)) = Eigen::Map<Eigen::Matrix<Complex, 1, 16>>(p.data());
    }
    EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXcd>(design).rank(), 16);
}

TEST(Simulate, ExpectedFractions) {
    const DensityMatrix hv = DensityMatrix::pure(ket(0, 1, 0, 0));
    EXPECT_NEAR(expected_fraction(hv, Analyzer::H, Analyzer::V), 1.0, 1e-15);
    EXPECT_NEAR(expected_fraction(hv, Analyzer::V, Analyzer::H), 0.0, 1e-15);
    for (const auto &s : standard_settings()) {
        EXPECT_NEAR(expected_fraction(DensityMatrix::maximally_mixed(), s.q1, s.q2), 0.25, 1e-15);
    }
    const DensityMatrix singlet = DensityMatrix::pure(fixtures::singlet());
    for (Analyzer a : {Analyzer::H, Analyzer::D, Analyzer::R}) {
        EXPECT_NEAR(expected_fraction(singlet, a, a), 0.0, 1e-15);
    }
}

TEST(Simulate, SeededCountsAreReproducibleIntegers) {
    const DensityMatrix rho = random_density_matrix(3);
    auto a = simulate_tomography(rho, standard_settings(), 1e4, 42);
    auto b = simulate_tomography(rho, standard_settings(), 1e4, 42);
    auto c = simulate_tomography(rho, standard_settings(), 1e4, 43);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, c.counts);
    for (double n : a.counts) EXPECT_EQ(n, std::floor(n));
}

TEST(Simulate, RejectsBadShots) {
    EXPECT_THROW(simulate_tomography(DensityMatrix::maximally_mixed(), standard_settings(), 0, std::nullopt),
                 DomainError);
}

TEST(LinearInversion, ExactOnInfiniteStatistics) {
    for (std::uint64_t seed = 0; seed < 25; seed++) {
        const DensityMatrix rho = random_density_matrix(seed);
        auto data = simulate_tomography(rho, standard_settings(), 1e4, std::nullopt);
        Eigen::Matrix4cd est = linear_inversion(data);
        EXPECT_LT(trace_distance(est, rho.matrix()), 1e-10) << "seed " << seed;
        EXPECT_LT((est - est.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(std::abs(est.trace() - Complex(1, 0)), 0.0, 1e-14);
    }
}

TEST(LinearInversion, SingletAtFiniteShots) {
    const DensityMatrix singlet = DensityMatrix::pure(fixtures::singlet());
    auto data = simulate_tomography(singlet, standard_settings(), 1e4, 7);
    DensityMatrix est = project_to_physical(linear_inversion(data));
    EXPECT_GT(fidelity_pure(est, fixtures::singlet()), 0.98);
}

TEST(LinearInversion, DegenerateInputs) {
    TomographyData zero{standard_settings(), std::vector<double>(36, 0.0)};
    EXPECT_THROW(linear_inversion(zero), AnalysisError);

    // Rectilinear analyzers alone cannot see coherences.
    TomographyData rect;
    for (Analyzer a : {Analyzer::H, Analyzer::V}) {
        for (Analyzer b : {Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::A}) rect.settings.push_back({a, b});
    }
    rect.counts.assign(rect.settings.size(), 5.0);
    EXPECT_THROW(linear_inversion(rect), AnalysisError);

    TomographyData mismatched{standard_settings(), std::vector<double>(35, 1.0)};
    EXPECT_THROW(linear_inversion(mismatched), AnalysisError);
}

TEST(ProjectToPhysical, ClipsNegativeEigenvalues) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.diagonal() << 0.7, 0.5, -0.1, -0.1;
    DensityMatrix p = project_to_physical(m);
    Eigen::Vector4d ev = p.eigenvalues();
    EXPECT_GE(ev.minCoeff(), 0.0);
    EXPECT_NEAR(ev.sum(), 1.0, 1e-14);
    EXPECT_NEAR(p.matrix()(0, 0).real(), 0.6, 1e-14);
    EXPECT_NEAR(p.matrix()(1, 1).real(), 0.4, 1e-14);
}

TEST(Mle, AgreesWithLinearInversionOnExactData) {
    for (std::uint64_t seed = 100; seed < 106; seed++) {
        const DensityMatrix rho = random_density_matrix(seed);
        auto data = simulate_tomography(rho, standard_settings(), 1e4, std::nullopt);
        MleResult r = mle_reconstruct(data);
        EXPECT_TRUE(r.converged);
        EXPECT_LT(trace_distance(r.rho.matrix(), linear_inversion(data)), 1e-6) << "seed " << seed;
    }
}

TEST(Mle, PureTargetOnExactData) {
    auto data = simulate_tomography(DensityMatrix::pure(fixtures::psi_prime(0.59)), standard_settings(), 1e4,
                                    std::nullopt);
    MleResult r = mle_reconstruct(data);
    EXPECT_GT(fidelity_pure(r.rho, fixtures::psi_prime(0.59)), 1 - 1e-6);
}

TEST(Mle, NotWorseThanProjectedLinearInversion) {
    for (std::uint64_t seed = 0; seed < 10; seed++) {
        const DensityMatrix rho = random_density_matrix(seed + 500);
        auto data = simulate_tomography(rho, standard_settings(), 1e3, seed);
        MleResult r = mle_reconstruct(data, 1e-10);
        const double li = log_likelihood(project_to_physical(linear_inversion(data)), data);
        EXPECT_GE(r.log_likelihood, li - 1e-10) << "seed " << seed;
        EXPECT_NEAR(r.log_likelihood, log_likelihood(r.rho, data), 1e-9);
    }
}

TEST(Mle, PhysicalOnUnphysicalLinearInversion) {
    // A pure state with few shots pushes linear inversion below zero.
    const DensityMatrix singlet = DensityMatrix::pure(fixtures::singlet());
    int unphysical = 0;
    for (std::uint64_t seed = 0; seed < 10; seed++) {
        auto data = simulate_tomography(singlet, standard_settings(), 50, seed);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(linear_inversion(data));
        if (es.eigenvalues().minCoeff() < 0) unphysical++;
        MleResult r = mle_reconstruct(data);
        const Eigen::Matrix4cd &m = r.rho.matrix();
        EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(std::abs(m.trace() - Complex(1, 0)), 0.0, 1e-12);
        EXPECT_GE(r.rho.eigenvalues().minCoeff(), -1e-12);
    }
    EXPECT_GT(unphysical, 0);
}

TEST(Mle, MedianFidelityAtTenThousandShots) {
    std::vector<double> f;
    for (std::uint64_t seed = 0; seed < 20; seed++) {
        const DensityMatrix rho = random_density_matrix(1000 + seed);
        auto data = simulate_tomography(rho, standard_settings(), 1e4, seed);
        MleResult r = mle_reconstruct(data);
        // Fidelity against a mixed truth: use the Uhlmann form through eigen-decomposition.
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.matrix());
        Eigen::Matrix4cd sq = es.eigenvectors() * es.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal() *
                              es.eigenvectors().adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> inner(sq * r.rho.matrix() * sq);
        const double root = inner.eigenvalues().cwiseMax(0).cwiseSqrt().sum();
        f.push_back(root * root);
    }
    EXPECT_GE(median(f), 0.98);
}

TEST(Mle, SingletMedianFidelityAtTenThousandShots) {
    std::vector<double> f;
    for (std::uint64_t seed = 0; seed < 20; seed++) {
        auto data = simulate_tomography(DensityMatrix::pure(fixtures::singlet()), standard_settings(), 1e4, seed);
        f.push_back(fidelity_pure(mle_reconstruct(data).rho, fixtures::singlet()));
    }
    EXPECT_GE(median(f), 0.98);
}

TEST(Mle, ErrorShrinksWithShots) {
    const DensityMatrix rho = random_density_matrix(77);
    std::vector<double> medians;
    for (double shots : {1e2, 1e3, 1e4, 1e5}) {
        std::vector<double> d;
        for (std::uint64_t seed = 0; seed < 20; seed++) {
            auto data = simulate_tomography(rho, standard_settings(), shots, seed);
            d.push_back(trace_distance(mle_reconstruct(data).rho, rho));
        }
        medians.push_back(median(d));
    }
    for (std::size_t k = 1; k < medians.size(); k++) EXPECT_LT(medians[k], medians[k - 1]);
}

TEST(Figures, FidelityBasics) {
    const PolarizationVector psi = fixtures::psi_prime(0.59);
    EXPECT_NEAR(fidelity_pure(DensityMatrix::pure(psi), psi), 1.0, 1e-15);
    EXPECT_NEAR(fidelity_pure(DensityMatrix::maximally_mixed(), psi), 0.25, 1e-15);
    const DensityMatrix rho = random_density_matrix(9);
    EXPECT_DOUBLE_EQ(fidelity_pure(rho, psi), fidelity_pure(rho, psi * std::polar(1.0, 1.234)));
    EXPECT_NEAR(purity(DensityMatrix::pure(psi)), 1.0, 1e-15);
    EXPECT_NEAR(trace_distance(rho, rho), 0.0, 1e-15);
}

TEST(Figures, SingletVersusUnbalancedState) {
    const PolarizationVector s = fixtures::singlet();
    const PolarizationVector p = fixtures::psi_prime(0.59);
    // Two pure states: trace distance sqrt(1 - |<s|p>|^2), overlap from the amplitudes.
    const double a = p(1).real(), b = -p(2).real();
    const double overlap = 0.5 * (a + b) * (a + b);
    EXPECT_NEAR(std::norm(s.dot(p)), overlap, 1e-15);
    EXPECT_NEAR(trace_distance(DensityMatrix::pure(s), DensityMatrix::pure(p)), std::sqrt(1 - overlap), 1e-12);
    EXPECT_NEAR(overlap, 0.5 * (0.5706 + 0.8212) * (0.5706 + 0.8212), 1e-4);
}

TEST(Figures, SyntheticMixtureReproducesHeadlineFidelities) {
    const DensityMatrix rho = synthetic_state(0.59, 0.929);
    EXPECT_NEAR(fidelity_pure(rho, fixtures::psi_prime(0.59)), 0.929, 1e-12);
    // The singlet figure follows from the same mixture to printed precision.
    EXPECT_NEAR(fidelity_pure(rho, fixtures::singlet()), 0.895, 5e-3);
}

TEST(Csv, RoundTrip) {
    auto data = simulate_tomography(random_density_matrix(5), standard_settings(), 1e3, 5);
    const std::string csv = data.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "setting_q1,setting_q2,counts");
    TomographyData back = TomographyData::from_csv(csv);
    EXPECT_EQ(back.settings, data.settings);
    EXPECT_EQ(back.counts, data.counts);
    EXPECT_EQ(back.to_csv(), csv);

    auto exact = simulate_tomography(random_density_matrix(5), standard_settings(), 1e3, std::nullopt);
    EXPECT_EQ(TomographyData::from_csv(exact.to_csv()).counts, exact.counts);
}

TEST(Csv, RejectsMalformed) {
    EXPECT_THROW(TomographyData::from_csv("a,b,c\nH,V,1\n"), AnalysisError);
    EXPECT_THROW(TomographyData::from_csv("setting_q1,setting_q2,counts\nH,Q,1\n"), AnalysisError);
    EXPECT_THROW(TomographyData::from_csv("setting_q1,setting_q2,counts\nH,V,-1\n"), AnalysisError);
    EXPECT_THROW(TomographyData::from_csv("setting_q1,setting_q2,counts\nH,V\n"), AnalysisError);
}
