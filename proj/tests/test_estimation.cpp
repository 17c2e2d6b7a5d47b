#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "magpol/estimation.hpp"
#include "magpol/polariton.hpp"
#include "magpol/rng.hpp"
#include "magpol/spectrum.hpp"

using namespace magpol;

namespace {

PolaritonModel paper_model(ModelVariant variant = ModelVariant::dicke) {
    PolaritonModel m;
    m.f_p = 5.041e9;
    m.magnon.gamma_over_2pi = 28.0e9;
    m.magnon.mu0_Meff = 1.108;
    m.coupling = CouplingParams::from_G_eff(512.3e6);
    m.variant = variant;
    return m;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

double lorentzian(double f, double f0, double hwhm, double amp) {
    const double x = (f - f0) / hwhm;
    return amp / (1.0 + x * x);
}

} // namespace

TEST_CASE("peak extraction finds two Lorentzians with widths") {
    const auto freq = linspace(4.0e9, 6.0e9, 2001);
    std::vector<double> value;
    for (const double f : freq)
        value.push_back(lorentzian(f, 4.6e9, 30e6, 1.0) + lorentzian(f, 5.4e9, 60e6, 0.7) + 0.01);
    const auto peaks = extract_peaks(freq, value, {});
    REQUIRE(peaks.size() == 2);
    const double step = freq[1] - freq[0];
    CHECK(std::abs(peaks[0].frequency - 4.6e9) <= step);
    CHECK(std::abs(peaks[1].frequency - 5.4e9) <= step);
    CHECK(peaks[0].hwhm == doctest::Approx(30e6).epsilon(0.10));
    CHECK(peaks[1].hwhm == doctest::Approx(60e6).epsilon(0.10));
    CHECK(peaks[0].amplitude > peaks[1].amplitude);
}

TEST_CASE("dip extraction mirrors peak extraction on inverted traces") {
    const auto freq = linspace(4.0e9, 6.0e9, 1501);
    std::vector<double> value;
    for (const double f : freq) value.push_back(1.0 - lorentzian(f, 5.0e9, 40e6, 0.8));
    const auto dips = extract_dips(freq, value, {});
    REQUIRE(dips.size() == 1);
    CHECK(std::abs(dips[0].frequency - 5.0e9) <= freq[1] - freq[0]);
    CHECK(dips[0].hwhm == doctest::Approx(40e6).epsilon(0.10));
}

TEST_CASE("flat traces produce no peaks") {
    const auto freq = linspace(4.0e9, 6.0e9, 101);
    const std::vector<double> value(freq.size(), 0.25);
    CHECK(extract_peaks(freq, value, {}).empty());
}

TEST_CASE("max_peaks keeps the most prominent features") {
    const auto freq = linspace(4.0e9, 6.0e9, 2001);
    std::vector<double> value;
    for (const double f : freq)
        value.push_back(lorentzian(f, 4.4e9, 20e6, 0.3) + lorentzian(f, 5.0e9, 20e6, 1.0) +
                        lorentzian(f, 5.6e9, 20e6, 0.6));
    PeakConfig cfg;
    cfg.max_peaks = 2;
    const auto peaks = extract_peaks(freq, value, cfg);
    REQUIRE(peaks.size() == 2);
    // survivors are the two tallest, reported in frequency order
    CHECK(std::abs(peaks[0].frequency - 5.0e9) <= 2e6);
    CHECK(std::abs(peaks[1].frequency - 5.6e9) <= 2e6);
}

TEST_CASE("bare resonator fit recovers all line-shape parameters") {
    ResonatorLineShape truth;
    truth.f_r = 5.041e9;
    truth.Q_int = 1.0e4;
    truth.Q_ext_mag = 5625.0;
    truth.phi = 0.12;
    truth.env_amp = 0.85;
    truth.env_phase = 0.6;
    truth.cable_delay = 28e-9;

    ComplexTrace trace;
    trace.freq = linspace(5.041e9 - 8e6, 5.041e9 + 8e6, 801);
    for (const double f : trace.freq) trace.s21.push_back(bare_s21(f, truth));

    const FitResult fit = fit_bare_resonator(trace);
    REQUIRE(fit.converged);
    CHECK(fit.value("f_r") == doctest::Approx(truth.f_r).epsilon(1e-9));
    CHECK(fit.value("Q_int") == doctest::Approx(truth.Q_int).epsilon(1e-5));
    CHECK(fit.value("Q_ext_mag") == doctest::Approx(truth.Q_ext_mag).epsilon(1e-5));
    CHECK(fit.value("phi") == doctest::Approx(truth.phi).epsilon(1e-4));
    CHECK(fit.value("env_amp") == doctest::Approx(truth.env_amp).epsilon(1e-5));
    CHECK(fit.value("tau") == doctest::Approx(truth.cable_delay).epsilon(1e-4));
    CHECK(fit.residual_rms < 1e-8);

    const auto shape = line_shape_from_fit(fit);
    CHECK(total_Q(shape.Q_int, shape.Q_ext_mag) == doctest::Approx(3600.0).epsilon(1e-5));
}

TEST_CASE("dispersion fit round-trips clean two-branch data") {
    const auto truth = paper_model(ModelVariant::dicke);
    std::vector<ObservedPoint> points;
    for (const double h : linspace(0.005, 0.145, 30)) {
        const auto pair = polariton_frequencies_eig(truth, h);
        points.push_back({h, pair.f_lower, Branch::lower, std::nullopt});
        points.push_back({h, pair.f_upper, Branch::upper, std::nullopt});
    }
    DispersionFitConfig cfg;
    cfg.variant = ModelVariant::dicke;
    const FitResult fit = fit_dispersion(points, cfg);
    REQUIRE(fit.converged);
    CHECK(fit.value("f_p") == doctest::Approx(5.041e9).epsilon(1e-7));
    CHECK(fit.value("mu0_Meff") == doctest::Approx(1.108).epsilon(1e-6));
    CHECK(fit.value("G_eff") == doctest::Approx(512.3e6).epsilon(1e-6));
}

TEST_CASE("dispersion fit assigns untagged points to branches") {
    const auto truth = paper_model(ModelVariant::dicke);
    std::vector<ObservedPoint> points;
    for (const double h : linspace(0.005, 0.145, 30)) {
        const auto pair = polariton_frequencies_eig(truth, h);
        points.push_back({h, pair.f_lower, std::nullopt, std::nullopt});
        points.push_back({h, pair.f_upper, std::nullopt, std::nullopt});
    }
    DispersionFitConfig cfg;
    cfg.variant = ModelVariant::dicke;
    const FitResult fit = fit_dispersion(points, cfg);
    REQUIRE(fit.converged);
    CHECK(fit.value("f_p") == doctest::Approx(5.041e9).epsilon(1e-7));
    CHECK(fit.value("G_eff") == doctest::Approx(512.3e6).epsilon(1e-5));
}

TEST_CASE("lower branch alone still identifies the coupling") {
    const auto truth = paper_model(ModelVariant::dicke);
    std::vector<ObservedPoint> points;
    for (const double h : linspace(0.005, 0.145, 40)) {
        const auto pair = polariton_frequencies_eig(truth, h);
        points.push_back({h, pair.f_lower, Branch::lower, std::nullopt});
    }
    DispersionFitConfig cfg;
    cfg.variant = ModelVariant::dicke;
    const FitResult fit = fit_dispersion(points, cfg);
    REQUIRE(fit.converged);
    CHECK(fit.value("f_p") == doctest::Approx(5.041e9).epsilon(1e-5));
    CHECK(fit.value("mu0_Meff") == doctest::Approx(1.108).epsilon(1e-4));
    CHECK(fit.value("G_eff") == doctest::Approx(512.3e6).epsilon(1e-4));
}

TEST_CASE("hopfield fit recovers the quadratic coefficient when freed") {
    auto truth = paper_model(ModelVariant::hopfield);
    truth.dia = DiamagneticSpec::from_beta(4.89e17);
    std::vector<ObservedPoint> points;
    for (const double h : linspace(0.003, 0.30, 60)) {
        const auto pair = polariton_frequencies_eig(truth, h);
        points.push_back({h, pair.f_lower, Branch::lower, std::nullopt});
        points.push_back({h, pair.f_upper, Branch::upper, std::nullopt});
    }
    DispersionFitConfig cfg;
    cfg.variant = ModelVariant::hopfield;
    cfg.fit_beta = true;
    const FitResult fit = fit_dispersion(points, cfg);
    REQUIRE(fit.converged);
    CHECK(fit.value("f_p") == doctest::Approx(5.041e9).epsilon(1e-6));
    CHECK(fit.value("G_eff") == doctest::Approx(512.3e6).epsilon(1e-4));
    CHECK(fit.value("beta_dia") == doctest::Approx(4.89e17).epsilon(1e-2));
}

TEST_CASE("too few points for the parameter count is rejected as unidentifiable") {
    std::vector<ObservedPoint> points = {{0.01, 4.5e9, Branch::lower, std::nullopt},
                                         {0.02, 4.7e9, Branch::lower, std::nullopt}};
    DispersionFitConfig cfg;
    cfg.variant = ModelVariant::dicke;
    const FitResult fit = fit_dispersion(points, cfg);
    CHECK_FALSE(fit.converged);
    CHECK(fit.status == FitStatus::unidentifiable);
}

TEST_CASE("invalid observation fields are rejected") {
    std::vector<ObservedPoint> points = {{0.0, 4.5e9, Branch::lower, std::nullopt},
                                         {0.02, 4.7e9, Branch::lower, std::nullopt},
                                         {0.03, 4.8e9, Branch::lower, std::nullopt},
                                         {0.04, 4.9e9, Branch::lower, std::nullopt}};
    DispersionFitConfig cfg;
    CHECK_THROWS_AS((void)fit_dispersion(points, cfg), std::invalid_argument);
}

TEST_CASE("linewidth fit recovers coupling and both damping rates") {
    const double f_p = 5.041e9;
    const double g_true = 129e6;
    const DampingParams d_true{0.53e6, 4.0e6};
    MagnonParams magnon;
    magnon.gamma_over_2pi = 28.0e9;
    magnon.mu0_Meff = 1.108;

    std::vector<ObservedPoint> points;
    for (const double h : linspace(0.020, 0.038, 25)) {
        const double f_m = kittel_frequency(h, magnon);
        const auto freqs = rwa_frequencies(f_p, f_m, g_true);
        const auto widths = rwa_linewidths(f_p, f_m, d_true, g_true);
        points.push_back({h, freqs.f_lower, Branch::lower, widths.kappa_minus});
        points.push_back({h, freqs.f_upper, Branch::upper, widths.kappa_plus});
    }

    LinewidthFitConfig cfg;
    cfg.f_p = f_p;
    cfg.mu0_Meff = magnon.mu0_Meff;
    cfg.gamma_over_2pi = magnon.gamma_over_2pi;
    const LinewidthFit lw = fit_linewidths(points, cfg);
    REQUIRE(lw.fit.converged);
    CHECK(lw.fit.value("G_eff") == doctest::Approx(g_true).epsilon(1e-6));
    CHECK(lw.fit.value("kappa_p") == doctest::Approx(d_true.kappa_p).epsilon(1e-4));
    CHECK(lw.fit.value("kappa_m") == doctest::Approx(d_true.kappa_m).epsilon(1e-4));
    CHECK(lw.regime.regime == Regime::strong);
}

TEST_CASE("linewidth fit requires observed widths") {
    std::vector<ObservedPoint> points = {{0.02, 4.5e9, Branch::lower, std::nullopt},
                                         {0.03, 4.7e9, Branch::lower, 2e6},
                                         {0.04, 4.9e9, Branch::lower, 2e6},
                                         {0.05, 5.0e9, Branch::lower, 2e6}};
    LinewidthFitConfig cfg;
    cfg.f_p = 5.041e9;
    cfg.mu0_Meff = 1.108;
    cfg.gamma_over_2pi = 28.0e9;
    CHECK_THROWS_AS((void)fit_linewidths(points, cfg), std::invalid_argument);
}

TEST_CASE("sqrt(n) scaling recovers the slope exactly on exact data") {
    for (const double alpha : {1520.0, 1791.0}) {
        std::vector<ScalingSample> samples;
        for (const int n : {1, 2, 4, 9, 16, 26})
            samples.push_back({static_cast<double>(n), alpha * std::sqrt(n)});
        const auto fit = fit_sqrt_n_scaling(samples);
        CHECK(fit.identifiable);
        CHECK(fit.alpha == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(fit.residual_rms < 1e-9 * alpha);
    }
}

TEST_CASE("single scaling sample degenerates to its own ratio") {
    const auto fit = fit_sqrt_n_scaling({{1.0, 7215.49}});
    CHECK(fit.identifiable);
    CHECK(fit.alpha == doctest::Approx(7215.49).epsilon(1e-12));
}

TEST_CASE("scaling samples sharing one n cannot fix the exponent") {
    const auto fit = fit_sqrt_n_scaling({{4.0, 3000.0}, {4.0, 3100.0}, {4.0, 2950.0}});
    CHECK_FALSE(fit.identifiable);
}

TEST_CASE("single-spin coupling from the fitted slope") {
    const double N = 1.55e13;
    CHECK(infer_gs(1520.0, 5.041e9, N) == doctest::Approx(27.411707411721117).epsilon(1e-12));
    CHECK(infer_gs(1791.0, 5.041e9, N) == doctest::Approx(32.29892629894245).epsilon(1e-12));
    // sanity brackets around the published estimates
    CHECK(infer_gs(1520.0, 5.041e9, N) > 27.0);
    CHECK(infer_gs(1520.0, 5.041e9, N) < 29.0);
    CHECK(infer_gs(1791.0, 5.041e9, N) > 32.0);
    CHECK(infer_gs(1791.0, 5.041e9, N) < 36.0);
}

TEST_CASE("shift-versus-epsilon-squared line fit") {
    std::vector<BsSample> samples;
    for (int n = 1; n <= 8; ++n) {
        const double eps_sq = 5.2e7 * n;
        samples.push_back({eps_sq, -0.021 * eps_sq - 1.0e4});
    }
    const auto fit = fit_bs_scaling(samples);
    CHECK(fit.identifiable);
    CHECK(fit.slope == doctest::Approx(-0.021).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(-1.0e4).epsilon(1e-8));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    const auto degenerate = fit_bs_scaling({{5.2e7, -1e6}});
    CHECK_FALSE(degenerate.identifiable);
}
