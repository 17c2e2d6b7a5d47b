// Compares the OpenMP kernels against their serial twins: wall time per call
// and a bitwise equality check, printed as one row per kernel.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include <omp.h>

#include "magpol/polariton.hpp"
#include "magpol/spectrum.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = clock_type::now();
        fn();
        const auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

bool grids_identical(const magpol::SpectrumGrid& a, const magpol::SpectrumGrid& b) {
    if (a.values.size() != b.values.size()) return false;
    return std::memcmp(a.values.data(), b.values.data(),
                       a.values.size() * sizeof(a.values[0])) == 0;
}

} // namespace

int main() {
    magpol::PolaritonModel model;
    model.f_p = 5.041e9;
    model.magnon.mu0_Meff = 0.1822;
    model.coupling = magpol::CouplingParams::from_G_eff(512.3e6);
    model.variant = magpol::ModelVariant::dicke;

    magpol::ResonatorLineShape shape;
    shape.f_r = 5.041e9;
    shape.Q_int = 1.0e4;
    shape.Q_ext_mag = 5625.0;

    magpol::DampingParams damping{0.53e6, 4.61e8};

    const auto fields = linspace(5e-3, 0.25, 400);
    const auto freqs = linspace(3.0e9, 7.5e9, 2001);
    const int repeats = 5;

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-18s %12s %12s %9s  %s\n", "kernel", "serial [ms]", "parallel [ms]", "speedup",
                "bitwise");

    {
        std::vector<magpol::DispersionPoint> serial, parallel;
        const double ts =
            best_of(repeats, [&] { serial = magpol::reference::dispersion_serial(model, fields); });
        const double tp = best_of(repeats, [&] { parallel = magpol::dispersion(model, fields); });
        bool same = serial.size() == parallel.size();
        for (std::size_t i = 0; same && i < serial.size(); ++i)
            same = serial[i].branches.f_lower == parallel[i].branches.f_lower &&
                   serial[i].branches.f_upper == parallel[i].branches.f_upper;
        std::printf("%-18s %12.3f %12.3f %9.2f  %s\n", "dispersion", ts * 1e3, tp * 1e3, ts / tp,
                    same ? "identical" : "DIFFERS");
    }

    magpol::SpectrumGrid grid;
    {
        magpol::SpectrumGrid serial;
        const double ts = best_of(repeats, [&] {
            serial = magpol::reference::synthesize_grid_serial(shape, model, damping, fields, freqs);
        });
        const double tp = best_of(repeats, [&] {
            grid = magpol::synthesize_grid(shape, model, damping, fields, freqs);
        });
        std::printf("%-18s %12.3f %12.3f %9.2f  %s\n", "synthesize_grid", ts * 1e3, tp * 1e3,
                    ts / tp, grids_identical(serial, grid) ? "identical" : "DIFFERS");
    }

    {
        magpol::SpectrumGrid serial, parallel;
        const double ts = best_of(
            repeats, [&] { serial = magpol::reference::add_noise_serial(grid, 40.0, 1234); });
        const double tp =
            best_of(repeats, [&] { parallel = magpol::add_noise(grid, 40.0, 1234); });
        std::printf("%-18s %12.3f %12.3f %9.2f  %s\n", "add_noise", ts * 1e3, tp * 1e3, ts / tp,
                    grids_identical(serial, parallel) ? "identical" : "DIFFERS");
    }
    return 0;
}
