// SPDX-License-Identifier: Apache-2.0
//
// starcov: coverage analysis and passive beamforming for STAR-RIS massive MIMO
// Copyright (C) 2026 The starcov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "starcov/channel.hpp"
#include "starcov/montecarlo.hpp"
#include "starcov/random.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace starcov;

namespace {

const double pi = std::acos(-1.0);

mc::SnrScenario toy_scenario(int M, int N, std::uint64_t seed, PhaseErrorModel<double> errors) {
    auto rng = make_engine(seed, Stream::Scenario);
    mc::SnrScenario s;
    s.G.resize(M, N);
    for (int a = 0; a < M; ++a)
        for (int n = 0; n < N; ++n)
            s.G(a, n) = std::polar(1.0, 2 * pi * uniform01(rng));
    const double lambda = 0.1;
    const auto c = build_ris_correlation(N, 1, lambda / 6, lambda / 6, lambda);
    s.R = c.R;
    s.R_half = c.R_half;
    s.pbm.resize(N);
    for (int n = 0; n < N; ++n)
        s.pbm(n) = std::polar(std::sqrt(0.5), 2 * pi * uniform01(rng));
    s.beta_k = 0.3;
    s.sigma0 = 0.05;
    s.phase_errors = errors;
    return s;
}

} // namespace

TEST_CASE("closed-form covariance of the scenario") {
    const auto s = toy_scenario(3, 4, 1, PhaseErrorModel<double>::von_mises_from_cf(0.5));
    MatrixXd Rt = 0.25 * s.R;
    Rt.diagonal().array() += 0.75;
    const CMatrixXd B = s.G * s.pbm.asDiagonal();
    const CMatrixXd expect = s.beta_k * B * Rt.cast<std::complex<double>>() * B.adjoint();
    CHECK((mc::closed_form_covariance(s) - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Monte Carlo moments without phase errors") {
    const auto s = toy_scenario(4, 6, 3, PhaseErrorModel<double>::none());
    mc::McOptions opt;
    opt.trials = 100000;
    opt.seed = 5;
    opt.estimate_covariance = true;
    const auto rep = mc::estimate_snr_terms(s, opt);
    CHECK(rep.trials == 100000);
    CHECK(rep.rel_err_tr < 0.01);
    CHECK(rep.rel_err_fourth < 0.02);
    CHECK(rep.rel_err_snr < 0.02);
    CHECK(!rep.degenerate);
    CHECK(rep.se_tr > 0);
    // the estimate lies within a few standard errors of the closed form
    CHECK(std::abs(rep.est_tr - rep.cf_tr) < 5 * rep.se_tr);
    const double scale = rep.cf_covariance.cwiseAbs().maxCoeff();
    CHECK((rep.est_covariance - rep.cf_covariance).cwiseAbs().maxCoeff() < 0.03 * scale);
}

TEST_CASE("second moment with phase errors matches the deflated covariance") {
    const auto s = toy_scenario(3, 5, 4, PhaseErrorModel<double>::von_mises_from_cf(0.7));
    mc::McOptions opt;
    opt.trials = 60000;
    const auto rep = mc::estimate_snr_terms(s, opt);
    CHECK(rep.rel_err_tr < 0.01);
}

TEST_CASE("results do not depend on the thread count") {
    const auto s = toy_scenario(3, 4, 7, PhaseErrorModel<double>::von_mises(2.0));
    mc::McOptions opt;
    opt.trials = 10000; // several blocks, last one partial
    opt.seed = 99;
    const auto a = mc::estimate_snr_terms(s, opt);
    opt.threads = 4;
    const auto b = mc::estimate_snr_terms(s, opt);
    opt.threads = 3;
    const auto c = mc::estimate_snr_terms(s, opt);
    CHECK(a.est_tr == b.est_tr);
    CHECK(a.est_fourth == b.est_fourth);
    CHECK(a.snr_mc == b.snr_mc);
    CHECK(a.se_snr == c.se_snr);
    CHECK(a.est_fourth == c.est_fourth);
    opt.seed = 100;
    CHECK(mc::estimate_snr_terms(s, opt).est_tr != a.est_tr);
}

TEST_CASE("deflated correlation estimate") {
    const double lambda = 0.12;
    const auto c = build_ris_correlation(4, 4, lambda / 8, lambda / 8, lambda);
    const auto model = PhaseErrorModel<double>::von_mises_from_cf(0.5);
    const CMatrixXd est = mc::estimate_deflated_correlation(c.R, model, 20000, 3);
    MatrixXd expect = 0.25 * c.R;
    expect.diagonal().array() += 0.75;
    CHECK((est - expect.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 0.03);
    CHECK_THROWS_AS(mc::estimate_deflated_correlation(c.R, model, 0, 3), DomainError);
}

TEST_CASE("validation table") {
    std::vector<mc::ValidationCase> cases{{"a", toy_scenario(2, 3, 1, PhaseErrorModel<double>::none())},
                                          {"b", toy_scenario(2, 3, 2, PhaseErrorModel<double>::none())}};
    cases[1].scenario.pbm.setZero();
    mc::McOptions opt;
    opt.trials = 3000;
    const auto rows = mc::validate_closed_form(cases, opt);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].scenario_id == "a");
    CHECK(rows[0].quantity == "second_moment");
    CHECK(rows[2].quantity == "snr");
    CHECK(rows[6].quantity == "degenerate");
    CHECK(rows[6].scenario_id == "b");

    std::ostringstream os;
    mc::write_validation_csv(rows, os);
    const std::string text = os.str();
    CHECK(text.rfind("scenario_id,quantity,estimate,closed_form,rel_error,std_error,trials\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 8);
    CHECK(text.find("\r") == std::string::npos);

    CHECK_THROWS_AS(mc::validate_closed_form({}, opt), DomainError);
    opt.trials = 0;
    CHECK_THROWS_AS(mc::estimate_snr_terms(cases[0].scenario, opt), DomainError);
    auto bad = cases[0].scenario;
    bad.pbm.resize(5);
    opt.trials = 10;
    CHECK_THROWS_AS(mc::estimate_snr_terms(bad, opt), DimensionError);
}

TEST_CASE("finite-difference gradient helper") {
    SideProblem<double> p;
    p.side = Side::Reflect;
    auto s = toy_scenario(3, 4, 8, PhaseErrorModel<double>::none());
    p.G = s.G;
    p.R_tilde = s.R;
    p.amplitudes = VectorXd::Constant(4, 0.6);
    p.beta_k = 1.0;
    p.sigma0 = 0.1;
    p.params = CoverageParams<double>::make(2.0, 3);
    const VectorXd ph = (VectorXd(4) << 0.1, 1.2, -0.7, 2.5).finished();
    const auto st = make_phase_state(p.amplitudes, ph, Side::Reflect);
    const VectorXd analytic = phase_gradient(st.s, coverage_wirtinger_gradient(p, st.s));
    const VectorXd fd = mc::finite_difference_gradient(p, ph, 1e-6);
    CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-6 * analytic.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(mc::finite_difference_gradient(p, ph, 0.0), DomainError);
}
