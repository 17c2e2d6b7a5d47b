#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "magpol/open_system.hpp"
#include "magpol/rng.hpp"

using namespace magpol;

TEST_CASE("complex eigenfrequencies in the magnon-loss-dominated case") {
    // kappa_m - kappa_p > 2G: the root is imaginary, branches share Re = f_0
    // and split in linewidth instead of frequency
    const DampingParams d{0.53e6, 461e6};
    const auto modes = complex_eigenfrequencies(5.041e9, 5.041e9, d, 129e6);
    CHECK(modes.plus.real() == doctest::Approx(5.041e9).epsilon(1e-12));
    CHECK(modes.minus.real() == doctest::Approx(5.041e9).epsilon(1e-12));
    CHECK(modes.plus.imag() == doctest::Approx(-40063255.84174642).epsilon(1e-9));
    CHECK(modes.minus.imag() == doctest::Approx(-421466744.15825355).epsilon(1e-9));
}

TEST_CASE("mode sum equals the trace exactly") {
    detail::SplitMix64 rng{31};
    for (int i = 0; i < 2000; ++i) {
        const double f_p = 1e9 + 9e9 * detail::uniform_pos(rng);
        const double f_m = 1e9 + 9e9 * detail::uniform_pos(rng);
        const DampingParams d{1e9 * detail::uniform_pos(rng), 1e9 * detail::uniform_pos(rng)};
        const double g = 1e9 * detail::uniform_pos(rng);
        const auto modes = complex_eigenfrequencies(f_p, f_m, d, g);
        const std::complex<double> trace{f_p + f_m, -(d.kappa_p + d.kappa_m)};
        // minus is defined as trace - plus, so the identity is bitwise
        CHECK(modes.plus + modes.minus == trace);
    }
}

TEST_CASE("lossless limit reduces to the co-rotating closed form") {
    detail::SplitMix64 rng{32};
    const DampingParams lossless{0.0, 0.0};
    for (int i = 0; i < 2000; ++i) {
        const double f_p = 1e9 + 9e9 * detail::uniform_pos(rng);
        const double f_m = 1e9 + 9e9 * detail::uniform_pos(rng);
        // keep the lower branch positive: g below the critical point
        const double g = 0.9 * std::sqrt(f_p * f_m) * detail::uniform_pos(rng);
        const auto modes = complex_eigenfrequencies(f_p, f_m, lossless, g);
        const auto pair = rwa_frequencies(f_p, f_m, g);
        CHECK(std::abs(modes.plus.real() - pair.f_upper) <= 1e-12 * pair.f_upper);
        CHECK(std::abs(modes.minus.real() - pair.f_lower) <= 1e-12 * pair.f_upper);
        CHECK(modes.plus.imag() == 0.0);
        CHECK(modes.minus.imag() == 0.0);
    }
}

TEST_CASE("co-rotating resonance positions at large coupling") {
    const auto pair = rwa_frequencies(5e9, 4e9, 0.5e9);
    CHECK(pair.f_upper == doctest::Approx(5207106781.186547).epsilon(1e-12));
    CHECK(pair.f_lower == doctest::Approx(3792893218.8134527).epsilon(1e-12));
}

TEST_CASE("branch linewidths mix the bare rates and conserve their sum") {
    const DampingParams d{0.53e6, 461e6};
    const double g = 129e6;
    const double f_p = 5.041e9;
    // magnon detuned above the photon by 2G: the upper branch hugs the lossy
    // magnon and takes most of its linewidth
    const auto widths = rwa_linewidths(f_p, f_p + 2 * g, d, g);
    CHECK(widths.kappa_plus == doctest::Approx(393565729.76648474).epsilon(1e-9));
    CHECK(widths.kappa_minus == doctest::Approx(67964270.23351523).epsilon(1e-9));

    detail::SplitMix64 rng{33};
    for (int i = 0; i < 2000; ++i) {
        const double fp = 1e9 + 9e9 * detail::uniform_pos(rng);
        const double fm = 1e9 + 9e9 * detail::uniform_pos(rng);
        const DampingParams dd{1e9 * detail::uniform_pos(rng), 1e9 * detail::uniform_pos(rng)};
        const double gg = 1e9 * detail::uniform_pos(rng);
        const auto w = rwa_linewidths(fp, fm, dd, gg);
        // Sterbenz pairing keeps the sum exact, not just approximate
        CHECK(w.kappa_plus + w.kappa_minus == dd.kappa_p + dd.kappa_m);
        CHECK(w.kappa_plus >= 0.0);
        CHECK(w.kappa_minus >= 0.0);
    }
}

TEST_CASE("on resonance the branch linewidths are the average") {
    const DampingParams d{2e6, 10e6};
    const auto w = rwa_linewidths(5e9, 5e9, d, 1e8);
    CHECK(w.kappa_plus == doctest::Approx(6e6).epsilon(1e-12));
    CHECK(w.kappa_minus == doctest::Approx(6e6).epsilon(1e-12));
}

TEST_CASE("cooperativity and regime classification") {
    const DampingParams d{0.53e6, 461e6};
    CHECK(cooperativity(129e6, d) == doctest::Approx(68.1087054393648).epsilon(1e-12));
    const auto report = classify_regime(129e6, d);
    CHECK(report.regime == Regime::purcell); // C > 1 but G < kappa_m
    CHECK(report.cooperativity == doctest::Approx(68.1087054393648).epsilon(1e-12));

    // scaling G by sqrt(26) scales C by 26 and crosses into strong coupling
    const double g26 = 129e6 * std::sqrt(26.0);
    CHECK(cooperativity(g26, d) == doctest::Approx(1770.8263414234846).epsilon(1e-9));
    CHECK(classify_regime(g26, d).regime == Regime::strong);
}

TEST_CASE("regime boundaries are strict inequalities") {
    const DampingParams d{1e6, 4e6};
    // G equal to the larger rate: neither strong nor between the rates
    CHECK(classify_regime(4e6, d).regime == Regime::weak);
    CHECK(classify_regime(std::nextafter(4e6, 1e9), d).regime == Regime::strong);
    // G equal to the smaller rate: not yet between them
    CHECK(classify_regime(1e6, d).regime == Regime::weak);
    CHECK(classify_regime(std::nextafter(1e6, 1e9), d).regime == Regime::purcell);
    CHECK(classify_regime(2e6, d).regime == Regime::purcell);
    CHECK(classify_regime(0.0, d).regime == Regime::weak);
}

TEST_CASE("exceptional point is flagged") {
    // f_p = f_m, 2G = kappa_m - kappa_p: square root argument vanishes
    const DampingParams d{1e6, 41e6};
    const auto modes = complex_eigenfrequencies(5e9, 5e9, d, 20e6);
    CHECK(modes.near_exceptional_point);
    const auto away = complex_eigenfrequencies(5e9, 5e9, d, 120e6);
    CHECK_FALSE(away.near_exceptional_point);
}

TEST_CASE("sweep keeps branch continuity through the crossing") {
    const DampingParams d{0.53e6, 461e6};
    std::vector<double> f_m;
    for (int i = 0; i <= 400; ++i) f_m.push_back(3e9 + i * 1e7);
    const auto modes = complex_eigenfrequencies_sweep(f_m, 5.041e9, d, 129e6);
    REQUIRE(modes.size() == f_m.size());
    for (std::size_t i = 1; i < modes.size(); ++i) {
        const double jump_plus = std::abs(modes[i].plus - modes[i - 1].plus);
        const double jump_swapped = std::abs(modes[i].plus - modes[i - 1].minus);
        CHECK(jump_plus <= jump_swapped);
    }
}
