#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "magpol/constants.hpp"
#include "magpol/model_core.hpp"
#include "magpol/rng.hpp"

using namespace magpol;

namespace {

MagnonParams permalloy() {
    MagnonParams m;
    m.gamma_over_2pi = 28.0e9;
    m.mu0_Meff = 1.108;
    return m;
}

} // namespace

TEST_CASE("Kittel dispersion matches the closed form") {
    const auto m = permalloy();
    CHECK(kittel_frequency(0.1, m) == doctest::Approx(9731762430.31035).epsilon(1e-12));
    CHECK(kittel_frequency(0.0, m) == 0.0);
    // negative fields fold onto the magnitude
    CHECK(kittel_frequency(-0.1, m) == kittel_frequency(0.1, m));
}

TEST_CASE("Kittel dispersion is monotone in field") {
    const auto m = permalloy();
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double f = kittel_frequency(2.5e-3 * i, m);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("kittel_field inverts kittel_frequency") {
    const auto m = permalloy();
    CHECK(kittel_field(5.041e9, m) == doctest::Approx(0.028519406044440143).epsilon(1e-12));
    for (double h = 1e-3; h < 0.3; h += 7.3e-3) {
        const double f = kittel_frequency(h, m);
        CHECK(kittel_field(f, m) == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("coupling algebra reproduces the reference chain") {
    const double N = 1.55e13;
    const double g0_a = collective_coupling(28.4, N);
    const double g0_b = collective_coupling(35.8, N);
    CHECK(g0_a == doctest::Approx(111810911.81096771).epsilon(1e-12));
    CHECK(g0_b == doctest::Approx(140944740.9448114).epsilon(1e-12));
    CHECK(bright_mode_coupling(g0_a, 26) == doctest::Approx(570126021.1567264).epsilon(1e-12));
    CHECK(bright_mode_coupling(g0_a, 1) == g0_a);
}

TEST_CASE("coupling algebra closure g_s*sqrt(N*n)") {
    detail::SplitMix64 rng{99};
    for (int i = 0; i < 10000; ++i) {
        const double g_s = 1.0 + 99.0 * detail::uniform_pos(rng);
        const double N = 1e10 + 1e13 * detail::uniform_pos(rng);
        const int n = 1 + static_cast<int>(63.0 * detail::uniform_pos(rng));
        const double chained = bright_mode_coupling(collective_coupling(g_s, N), n);
        const double direct = g_s * std::sqrt(N * static_cast<double>(n));
        CHECK(std::abs(chained - direct) <= 1e-12 * direct);
    }
}

TEST_CASE("normalized coupling and the sqrt(n) enhancement") {
    const double f_p = 5.041e9;
    CHECK(normalized_coupling(512.3e6, f_p) == doctest::Approx(7215.492957746479).epsilon(1e-12));
    const double g0 = 1520.0 * std::sqrt(f_p); // alpha = 1520 sqrt(Hz)
    for (int n = 1; n <= 64; ++n) {
        const double ratio = normalized_coupling(bright_mode_coupling(g0, n), f_p) /
                             normalized_coupling(g0, f_p);
        CHECK(ratio == doctest::Approx(std::sqrt(static_cast<double>(n))).epsilon(1e-14));
    }
}

TEST_CASE("ultrastrong classification is strict at eta = 0.1") {
    const auto r = coupling_ratio(512.3e6, 5.041e9);
    CHECK(r.eta == doctest::Approx(0.10162666137671097).epsilon(1e-12));
    CHECK(r.ultrastrong);
    CHECK_FALSE(coupling_ratio(0.1 * 5e9, 5e9).ultrastrong); // boundary is not ultrastrong
    // one ulp above the threshold ratio; a 1-ulp bump of G alone would be
    // absorbed when the quotient rounds
    CHECK(coupling_ratio(std::nextafter(0.1, 1.0) * 5e9, 5e9).ultrastrong);
}

TEST_CASE("rescaled coupling G' = G*sqrt(f_m/f_p)") {
    CHECK(rescaled_coupling(512.3e6, 2 * 5.041e9, 5.041e9) ==
          doctest::Approx(724501608.0037366).epsilon(1e-12));
    CHECK(rescaled_coupling(512.3e6, 5.041e9, 5.041e9) == 512.3e6);
    CHECK(rescaled_coupling(512.3e6, 0.0, 5.041e9) == 0.0);
}

TEST_CASE("diamagnetic term under both conventions") {
    const double f_m = 5.041e9;
    const double g_prime = 512.3e6;
    CHECK(diamagnetic_D(DiamagneticSpec::from_beta(4.89e17), f_m, g_prime) ==
          doctest::Approx(2457154.2750001573).epsilon(1e-12));
    CHECK(diamagnetic_D(DiamagneticSpec::from_suppression(0.047), f_m, g_prime) ==
          doctest::Approx(2446976.9152945844).epsilon(1e-12));
    CHECK(diamagnetic_D(DiamagneticSpec::off(), f_m, g_prime) == 0.0);
    CHECK_THROWS_AS(diamagnetic_D(DiamagneticSpec::from_beta(1e17), 0.0, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(DiamagneticSpec::from_suppression(1.0), std::invalid_argument);
    CHECK_THROWS_AS(DiamagneticSpec::from_suppression(-0.1), std::invalid_argument);
}

TEST_CASE("spin count from stripe geometry") {
    MagnonParams m = permalloy();
    m.mu0_Ms = 1.0;
    m.stripe_width = 15e-6;
    m.stripe_length = 400e-6;
    m.film_thickness = 30e-9;
    CHECK(spin_count(m) == doctest::Approx(15445254811386.05).epsilon(1e-12));
    m.stripe_width = 0.0; // unset geometry reports zero rather than throwing
    CHECK(spin_count(m) == 0.0);
}

TEST_CASE("parameter validation rejects nonphysical input") {
    CHECK_THROWS_AS(CouplingParams::from_G_eff(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(CouplingParams::from_g_s(-1.0, 1e13), std::invalid_argument);
    MagnonParams m = permalloy();
    m.gamma_over_2pi = 0.0;
    CHECK_THROWS_AS(kittel_frequency(0.1, m), std::invalid_argument);
    CHECK_THROWS_AS(normalized_coupling(1e8, 0.0), std::invalid_argument);
}
