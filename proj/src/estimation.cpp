#include "magpol/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "magpol/errors.hpp"

namespace magpol {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

double mad_of(const std::vector<double>& v, double center) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - center);
    return median_of(std::move(dev));
}

void check_axis(const std::vector<double>& freq, const std::vector<double>& value) {
    require(freq.size() == value.size(), "trace: frequency and value lengths differ");
    require(freq.size() >= 8, "trace: need at least 8 samples");
    for (std::size_t i = 0; i < freq.size(); ++i) {
        require(std::isfinite(freq[i]) && std::isfinite(value[i]), "trace: non-finite sample");
        if (i > 0) require(freq[i] > freq[i - 1], "trace: frequency axis must be strictly increasing");
    }
}

} // namespace

std::vector<Peak> extract_peaks(const std::vector<double>& freq,
                                const std::vector<double>& value,
                                const PeakConfig& config) {
    check_axis(freq, value);
    require(config.threshold_mads >= 0.0, "extract_peaks: threshold must be >= 0");

    const double baseline = median_of(value);
    const double mad = mad_of(value, baseline);
    const double threshold = baseline + config.threshold_mads * mad;
    const std::size_t n = freq.size();

    std::vector<Peak> found;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(value[i] > value[i - 1] && value[i] >= value[i + 1])) continue;
        if (!(value[i] > threshold)) continue;

        const double vm = value[i - 1];
        const double v0 = value[i];
        const double vp = value[i + 1];
        const double curvature = vm - 2.0 * v0 + vp;
        double shift = 0.0;
        if (curvature < 0.0) shift = std::clamp(0.5 * (vm - vp) / curvature, -0.5, 0.5);
        const double step = 0.5 * (freq[i + 1] - freq[i - 1]);

        Peak peak;
        peak.frequency = freq[i] + shift * step;
        peak.amplitude = v0 - 0.25 * (vm - vp) * shift;
        peak.prominence = peak.amplitude - baseline;

        // half width from the half-prominence crossings on each side
        const double level = baseline + 0.5 * peak.prominence;
        double left = -1.0;
        for (std::size_t j = i; j-- > 0;) {
            if (value[j] <= level) {
                const double t = (level - value[j]) / (value[j + 1] - value[j]);
                left = peak.frequency - (freq[j] + t * (freq[j + 1] - freq[j]));
                break;
            }
        }
        double right = -1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (value[j] <= level) {
                const double t = (level - value[j - 1]) / (value[j] - value[j - 1]);
                right = (freq[j - 1] + t * (freq[j] - freq[j - 1])) - peak.frequency;
                break;
            }
        }
        if (left > 0.0 && right > 0.0) peak.hwhm = 0.5 * (left + right);
        else if (left > 0.0) peak.hwhm = left;
        else if (right > 0.0) peak.hwhm = right;
        else peak.hwhm = step; // unresolved peak: fall back to the grid scale
        found.push_back(peak);
    }

    if (config.max_peaks > 0 && found.size() > config.max_peaks) {
        std::sort(found.begin(), found.end(),
                  [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
        found.resize(config.max_peaks);
    }
    std::sort(found.begin(), found.end(),
              [](const Peak& a, const Peak& b) { return a.frequency < b.frequency; });
    return found;
}

std::vector<Peak> extract_dips(const std::vector<double>& freq,
                               const std::vector<double>& value,
                               const PeakConfig& config) {
    std::vector<double> neg(value.size());
    std::transform(value.begin(), value.end(), neg.begin(), [](double v) { return -v; });
    auto peaks = extract_peaks(freq, neg, config);
    for (auto& p : peaks) p.amplitude = -p.amplitude; // report the dip minimum
    return peaks;
}

// ---------------------------------------------------------------------------
// fit results

bool FitResult::has(std::string_view name) const {
    return std::any_of(parameters.begin(), parameters.end(),
                       [&](const FitParameter& p) { return p.name == name; });
}

namespace {

const FitParameter& find_parameter(const FitResult& fit, std::string_view name) {
    for (const auto& p : fit.parameters)
        if (p.name == name) return p;
    throw std::out_of_range("no fit parameter named '" + std::string(name) + "'");
}

} // namespace

double FitResult::value(std::string_view name) const { return find_parameter(*this, name).value; }
double FitResult::sigma(std::string_view name) const { return find_parameter(*this, name).sigma; }

nlohmann::json fit_result_json(const FitResult& fit) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : fit.parameters) {
        params.push_back({{"name", p.name},
                          {"unit", p.unit},
                          {"value", p.value},
                          {"sigma", p.sigma}});
    }
    return nlohmann::json{{"converged", fit.converged},
                          {"status", to_string(fit.status)},
                          {"message", fit.message},
                          {"residual_rms", fit.residual_rms},
                          {"iterations", fit.iterations},
                          {"parameters", std::move(params)}};
}

namespace {

struct ParamSpec {
    const char* name;
    const char* unit;
};

FitResult package_fit(const LevmarResult& lm, const std::vector<ParamSpec>& spec) {
    FitResult out;
    out.converged = lm.converged;
    out.status = lm.status;
    out.message = lm.message;
    out.residual_rms = lm.residual_rms;
    out.iterations = lm.iterations;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        FitParameter p;
        p.name = spec[k].name;
        p.unit = spec[k].unit;
        p.value = lm.params(static_cast<Eigen::Index>(k));
        p.sigma = lm.sigma.size() == lm.params.size() ? lm.sigma(static_cast<Eigen::Index>(k)) : 0.0;
        out.parameters.push_back(std::move(p));
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// bare resonator

namespace {

ResonatorLineShape initial_line_shape(const ComplexTrace& trace) {
    const std::size_t n = trace.freq.size();
    const std::size_t edge = std::max<std::size_t>(2, n / 10);
    std::vector<std::size_t> edge_idx;
    for (std::size_t i = 0; i < edge; ++i) edge_idx.push_back(i);
    for (std::size_t i = n - edge; i < n; ++i) edge_idx.push_back(i);

    ResonatorLineShape guess;

    std::vector<double> edge_mag;
    edge_mag.reserve(edge_idx.size());
    for (std::size_t i : edge_idx) edge_mag.push_back(std::abs(trace.s21[i]));
    guess.env_amp = std::max(median_of(edge_mag), 1e-30);

    // cable delay and global phase from a line through the unwrapped
    // off-resonant phase; the notch contributes no net phase across the dip
    std::vector<double> phase(n);
    phase[0] = std::arg(trace.s21[0]);
    for (std::size_t i = 1; i < n; ++i) {
        double d = std::arg(trace.s21[i]) - std::arg(trace.s21[i - 1]);
        while (d > constants::pi) d -= constants::two_pi;
        while (d < -constants::pi) d += constants::two_pi;
        phase[i] = phase[i - 1] + d;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i : edge_idx) {
        sx += trace.freq[i];
        sy += phase[i];
        sxx += trace.freq[i] * trace.freq[i];
        sxy += trace.freq[i] * phase[i];
    }
    const double m = static_cast<double>(edge_idx.size());
    const double det = m * sxx - sx * sx;
    const double slope = det != 0.0 ? (m * sxy - sx * sy) / det : 0.0;
    const double icept = (sy - slope * sx) / m;
    guess.cable_delay = -slope / constants::two_pi;
    guess.env_phase = std::remainder(icept, constants::two_pi);

    std::size_t i_min = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(trace.s21[i]) < std::abs(trace.s21[i_min])) i_min = i;
    guess.f_r = trace.freq[i_min];

    const double dip = std::abs(trace.s21[i_min]);
    const double level = 0.5 * (guess.env_amp + dip);
    double f_left = trace.freq.front();
    for (std::size_t j = i_min; j-- > 0;) {
        if (std::abs(trace.s21[j]) >= level) { f_left = trace.freq[j]; break; }
    }
    double f_right = trace.freq.back();
    for (std::size_t j = i_min + 1; j < n; ++j) {
        if (std::abs(trace.s21[j]) >= level) { f_right = trace.freq[j]; break; }
    }
    const double fwhm = std::max(f_right - f_left, trace.freq[1] - trace.freq[0]);
    const double q_tot = guess.f_r / fwhm;
    const double depth = std::clamp(1.0 - dip / guess.env_amp, 0.05, 0.95);
    guess.Q_ext_mag = q_tot / depth;
    guess.Q_int = q_tot / (1.0 - depth);
    guess.phi = 0.0;
    return guess;
}

} // namespace

FitResult fit_bare_resonator(const ComplexTrace& trace,
                             const std::optional<ResonatorLineShape>& init) {
    const std::size_t n = trace.freq.size();
    require(n == trace.s21.size(), "fit_bare_resonator: axis and data lengths differ");
    require(n >= 8, "fit_bare_resonator: need at least 8 samples");
    for (std::size_t i = 0; i < n; ++i) {
        require(std::isfinite(trace.freq[i]) && std::isfinite(trace.s21[i].real()) &&
                    std::isfinite(trace.s21[i].imag()),
                "fit_bare_resonator: non-finite sample");
        if (i > 0)
            require(trace.freq[i] > trace.freq[i - 1],
                    "fit_bare_resonator: frequency axis must be strictly increasing");
    }
    require(trace.freq.front() > 0.0, "fit_bare_resonator: frequencies must be > 0");

    const ResonatorLineShape guess = init ? *init : initial_line_shape(trace);

    Eigen::VectorXd x0(7);
    x0 << guess.f_r, guess.Q_int, guess.Q_ext_mag, guess.phi, guess.env_amp,
        guess.env_phase, guess.cable_delay;

    const auto m = static_cast<int>(2 * n);
    ResidualFn fn = [&trace, n](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        if (!(x(0) > 0.0 && x(1) > 0.0 && x(2) > 0.0 && x(4) > 0.0)) return false;
        ResonatorLineShape s;
        s.f_r = x(0);
        s.Q_int = x(1);
        s.Q_ext_mag = x(2);
        s.phi = x(3);
        s.env_amp = x(4);
        s.env_phase = x(5);
        s.cable_delay = x(6);
        r.resize(static_cast<Eigen::Index>(2 * n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto d = bare_s21(trace.freq[i], s) - trace.s21[i];
            r(static_cast<Eigen::Index>(2 * i)) = d.real();
            r(static_cast<Eigen::Index>(2 * i + 1)) = d.imag();
        }
        return true;
    };

    LevmarOptions opt;
    opt.typical_scale.resize(7);
    opt.typical_scale << guess.f_r, std::max(guess.Q_int, 1.0), std::max(guess.Q_ext_mag, 1.0),
        1.0, std::max(guess.env_amp, 1e-6), 1.0, 1.0 / guess.f_r;

    const auto lm = levmar_fit(fn, m, x0, opt);
    return package_fit(lm, {{"f_r", "Hz"},
                            {"Q_int", ""},
                            {"Q_ext_mag", ""},
                            {"phi", "rad"},
                            {"env_amp", ""},
                            {"env_phase", "rad"},
                            {"tau", "s"}});
}

ResonatorLineShape line_shape_from_fit(const FitResult& fit) {
    ResonatorLineShape s;
    s.f_r = fit.value("f_r");
    s.Q_int = fit.value("Q_int");
    s.Q_ext_mag = fit.value("Q_ext_mag");
    s.phi = fit.value("phi");
    s.env_amp = fit.value("env_amp");
    s.env_phase = fit.value("env_phase");
    s.cable_delay = fit.value("tau");
    return s;
}

// ---------------------------------------------------------------------------
// dispersion fit

namespace {

// Branch frequencies of the selected variant at one field; false when the
// parameter set is infeasible there (supercritical or out of domain).
bool variant_branches(ModelVariant variant, double gamma, double f_p, double mu0_Meff,
                      double G_eff, double beta, double mu0_H, FrequencyPair& out) {
    MagnonParams mp;
    mp.gamma_over_2pi = gamma;
    mp.mu0_Meff = mu0_Meff;
    try {
        const double f_m = kittel_frequency(mu0_H, mp);
        if (f_m <= 0.0) return false;
        if (variant == ModelVariant::rwa) {
            const double g_prime = rescaled_coupling(G_eff, f_m, f_p);
            if (g_prime * g_prime >= f_p * f_m) return false;
            out = rwa_frequencies(f_p, f_m, g_prime);
        } else {
            const auto dia = variant == ModelVariant::hopfield ? DiamagneticSpec::from_beta(beta)
                                                               : DiamagneticSpec::off();
            const auto pair = polariton_frequencies_quartic(f_p, f_m, G_eff, dia);
            out.f_upper = pair.f_upper;
            out.f_lower = pair.f_lower;
        }
        return true;
    } catch (const SupercriticalError&) {
        return false;
    } catch (const std::invalid_argument&) {
        return false;
    } catch (const std::domain_error&) {
        return false;
    }
}

// Distance tie: take the branch carrying the larger photon fraction.
Branch tie_break_branch(ModelVariant variant, double gamma, double f_p, double mu0_Meff,
                        double G_eff, double beta, double mu0_H) {
    try {
        PolaritonModel model;
        model.f_p = f_p;
        model.magnon.gamma_over_2pi = gamma;
        model.magnon.mu0_Meff = mu0_Meff;
        model.coupling = CouplingParams::from_G_eff(G_eff);
        model.dia = variant == ModelVariant::hopfield ? DiamagneticSpec::from_beta(beta)
                                                      : DiamagneticSpec::off();
        model.variant = variant;
        const auto pair = polariton_frequencies_eig(model, mu0_H);
        return pair.photon_fraction_upper >= pair.photon_fraction_lower ? Branch::upper
                                                                        : Branch::lower;
    } catch (...) {
        return Branch::lower; // infeasible tie point: the choice cannot matter
    }
}

std::vector<Branch> assign_branches(const std::vector<ObservedPoint>& points,
                                    ModelVariant variant, double gamma, double f_p,
                                    double mu0_Meff, double G_eff, double beta) {
    std::vector<Branch> tags(points.size(), Branch::lower);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].branch) {
            tags[i] = *points[i].branch;
            continue;
        }
        FrequencyPair pair;
        if (!variant_branches(variant, gamma, f_p, mu0_Meff, G_eff, beta, points[i].mu0_H, pair))
            continue;
        const double d_lower = std::abs(points[i].f - pair.f_lower);
        const double d_upper = std::abs(points[i].f - pair.f_upper);
        if (d_lower < d_upper) tags[i] = Branch::lower;
        else if (d_upper < d_lower) tags[i] = Branch::upper;
        else tags[i] = tie_break_branch(variant, gamma, f_p, mu0_Meff, G_eff, beta, points[i].mu0_H);
    }
    return tags;
}

// Rough per-point df/dH within each tag group; infinity for isolated points.
std::vector<double> point_slopes(const std::vector<ObservedPoint>& points) {
    const std::size_t n = points.size();
    std::vector<double> slopes(n, std::numeric_limits<double>::infinity());
    auto group_of = [](const ObservedPoint& p) {
        return p.branch ? (*p.branch == Branch::upper ? 1 : 0) : 2;
    };
    for (std::size_t i = 0; i < n; ++i) {
        double best_dh = std::numeric_limits<double>::infinity();
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || group_of(points[j]) != group_of(points[i])) continue;
            const double dh = std::abs(points[j].mu0_H - points[i].mu0_H);
            if (dh > 0.0 && dh < best_dh) {
                best_dh = dh;
                best = j;
            }
        }
        if (best < n)
            slopes[i] = (points[best].f - points[i].f) / (points[best].mu0_H - points[i].mu0_H);
    }
    return slopes;
}

struct DispersionInits {
    double f_p;
    double mu0_Meff;
    double G_eff;
    double beta;
};

DispersionInits dispersion_inits(const std::vector<ObservedPoint>& points,
                                 const DispersionFitConfig& config) {
    const std::size_t n = points.size();
    const auto slopes = point_slopes(points);

    // photon frequency from the flattest (most photon-like) point
    std::size_t flattest = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(slopes[i])) continue;
        if (flattest == n || std::abs(slopes[i]) < std::abs(slopes[flattest])) flattest = i;
    }
    double f_p0;
    if (flattest < n) {
        f_p0 = points[flattest].f;
    } else {
        std::vector<double> fs(n);
        for (std::size_t i = 0; i < n; ++i) fs[i] = points[i].f;
        f_p0 = median_of(fs);
    }

    // Kittel inversion M = (f/gamma)^2/H - H at the two steepest (most
    // magnon-like) points; fall back to the farthest-field point
    auto invert = [&](const ObservedPoint& p) {
        const double h = std::abs(p.mu0_H);
        const double c = p.f / config.gamma_over_2pi;
        return c * c / h - h;
    };
    std::vector<std::size_t> steep;
    for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(slopes[i])) steep.push_back(i);
    std::sort(steep.begin(), steep.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(slopes[a]) > std::abs(slopes[b]);
    });
    double meff0;
    if (steep.size() >= 2) meff0 = 0.5 * (invert(points[steep[0]]) + invert(points[steep[1]]));
    else if (steep.size() == 1) meff0 = invert(points[steep[0]]);
    else {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(points[i].mu0_H) > std::abs(points[far].mu0_H)) far = i;
        meff0 = invert(points[far]);
    }
    meff0 = std::max(meff0, 1e-3);

    // half the smallest splitting between two points sharing a field
    double min_split = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (points[i].mu0_H == points[j].mu0_H)
                min_split = std::min(min_split, std::abs(points[i].f - points[j].f));
    const double g0 = std::isfinite(min_split) ? 0.5 * min_split : 0.1 * f_p0;

    DispersionInits init{f_p0, meff0, g0, 0.0};
    if (config.f_p_init) init.f_p = *config.f_p_init;
    if (config.mu0_Meff_init) init.mu0_Meff = *config.mu0_Meff_init;
    if (config.G_eff_init) init.G_eff = *config.G_eff_init;
    if (config.beta_init) init.beta = *config.beta_init;
    return init;
}

} // namespace

FitResult fit_dispersion(const std::vector<ObservedPoint>& points,
                         const DispersionFitConfig& config) {
    require(!points.empty(), "fit_dispersion: no points");
    for (const auto& p : points) {
        require(std::isfinite(p.mu0_H) && std::isfinite(p.f), "fit_dispersion: non-finite point");
        require(p.mu0_H != 0.0, "fit_dispersion: field must be nonzero");
        require(p.f > 0.0, "fit_dispersion: frequency must be > 0");
    }
    require(config.gamma_over_2pi > 0.0, "fit_dispersion: gamma must be > 0");
    require(!config.fit_beta || config.variant == ModelVariant::hopfield,
            "fit_dispersion: beta is only free under the hopfield variant");

    const auto init = dispersion_inits(points, config);
    const bool with_beta = config.fit_beta;
    const double fixed_beta = config.variant == ModelVariant::hopfield ? init.beta : 0.0;
    const Eigen::Index n_par = with_beta ? 4 : 3;

    Eigen::VectorXd x(n_par);
    x(0) = init.f_p;
    x(1) = init.mu0_Meff;
    x(2) = init.G_eff;
    if (with_beta) x(3) = init.beta;

    LevmarOptions opt = config.levmar;
    if (opt.typical_scale.size() != n_par) {
        opt.typical_scale.resize(n_par);
        opt.typical_scale(0) = 1e9;
        opt.typical_scale(1) = 0.1;
        opt.typical_scale(2) = 1e8;
        if (with_beta) opt.typical_scale(3) = 1e17;
    }

    const auto m = static_cast<int>(points.size());
    auto tags = assign_branches(points, config.variant, config.gamma_over_2pi, x(0), x(1), x(2),
                                with_beta ? x(3) : fixed_beta);

    LevmarResult lm;
    for (int pass = 0; pass < std::max(config.max_branch_passes, 1); ++pass) {
        ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            const double f_p = p(0);
            const double meff = p(1);
            const double g = p(2);
            const double beta = with_beta ? p(3) : fixed_beta;
            if (!(f_p > 0.0 && meff > 0.0 && g >= 0.0 && beta >= 0.0)) return false;
            r.resize(m);
            for (std::size_t i = 0; i < points.size(); ++i) {
                FrequencyPair pair;
                if (!variant_branches(config.variant, config.gamma_over_2pi, f_p, meff, g, beta,
                                      points[i].mu0_H, pair))
                    return false;
                const double model_f = tags[i] == Branch::upper ? pair.f_upper : pair.f_lower;
                r(static_cast<Eigen::Index>(i)) = model_f - points[i].f;
            }
            return true;
        };

        lm = levmar_fit(fn, m, x, opt);
        x = lm.params;
        if (!lm.converged) break;
        auto next = assign_branches(points, config.variant, config.gamma_over_2pi, x(0), x(1),
                                    x(2), with_beta ? x(3) : fixed_beta);
        if (next == tags) break;
        tags = std::move(next);
    }

    std::vector<ParamSpec> spec = {{"f_p", "Hz"}, {"mu0_Meff", "T"}, {"G_eff", "Hz"}};
    if (with_beta) spec.push_back({"beta_dia", "(rad/s)^2"});
    return package_fit(lm, spec);
}

// ---------------------------------------------------------------------------
// linewidth fit

LinewidthFit fit_linewidths(const std::vector<ObservedPoint>& points,
                            const LinewidthFitConfig& config) {
    require(!points.empty(), "fit_linewidths: no points");
    require(config.f_p > 0.0, "fit_linewidths: f_p must be > 0");
    require(config.mu0_Meff > 0.0, "fit_linewidths: mu0_Meff must be > 0");
    require(config.gamma_over_2pi > 0.0, "fit_linewidths: gamma must be > 0");
    for (const auto& p : points) {
        require(std::isfinite(p.mu0_H) && std::isfinite(p.f), "fit_linewidths: non-finite point");
        require(p.mu0_H != 0.0, "fit_linewidths: field must be nonzero");
        require(p.hwhm.has_value() && *p.hwhm > 0.0,
                "fit_linewidths: every point needs an observed half width");
    }

    MagnonParams mp;
    mp.gamma_over_2pi = config.gamma_over_2pi;
    mp.mu0_Meff = config.mu0_Meff;
    std::vector<double> f_m(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        f_m[i] = kittel_frequency(points[i].mu0_H, mp);

    // starting values: splitting for G; the most photon-like point's width for
    // kappa_p, the most magnon-like one's for kappa_m
    double min_split = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i].mu0_H == points[j].mu0_H)
                min_split = std::min(min_split, std::abs(points[i].f - points[j].f));
    double g0 = std::isfinite(min_split) ? 0.5 * min_split : 0.02 * config.f_p;

    std::size_t most_photon = 0;
    std::size_t most_magnon = 0;
    double best_p = std::numeric_limits<double>::infinity();
    double best_m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dp = std::abs(points[i].f - config.f_p);
        const double dm = std::abs(points[i].f - f_m[i]);
        if (dp < best_p) { best_p = dp; most_photon = i; }
        if (dm < best_m) { best_m = dm; most_magnon = i; }
    }
    double kp0 = *points[most_photon].hwhm;
    double km0 = *points[most_magnon].hwhm;

    if (config.G_eff_init) g0 = *config.G_eff_init;
    if (config.kappa_p_init) kp0 = *config.kappa_p_init;
    if (config.kappa_m_init) km0 = *config.kappa_m_init;

    Eigen::VectorXd x(3);
    x << g0, kp0, km0;

    LevmarOptions opt = config.levmar;
    if (opt.typical_scale.size() != 3) {
        opt.typical_scale.resize(3);
        opt.typical_scale << 1e8, std::max(kp0, 1e3), std::max(km0, 1e3);
    }

    auto assign = [&](double g) {
        std::vector<Branch> tags(points.size(), Branch::lower);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].branch) {
                tags[i] = *points[i].branch;
                continue;
            }
            const auto pair = rwa_frequencies(config.f_p, f_m[i], g);
            const double d_lower = std::abs(points[i].f - pair.f_lower);
            const double d_upper = std::abs(points[i].f - pair.f_upper);
            if (d_lower < d_upper) tags[i] = Branch::lower;
            else if (d_upper < d_lower) tags[i] = Branch::upper;
            else {
                try {
                    const auto modes = solve_rwa_block(config.f_p, f_m[i], g);
                    tags[i] = modes.photon_fraction_upper >= modes.photon_fraction_lower
                                  ? Branch::upper
                                  : Branch::lower;
                } catch (const SupercriticalError&) {
                    tags[i] = Branch::lower;
                }
            }
        }
        return tags;
    };

    const auto m = static_cast<int>(2 * points.size());
    auto tags = assign(x(0));
    LevmarResult lm;
    for (int pass = 0; pass < std::max(config.max_branch_passes, 1); ++pass) {
        ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            const double g = p(0);
            const double kp = p(1);
            const double km = p(2);
            if (!(g >= 0.0 && kp > 0.0 && km > 0.0)) return false;
            DampingParams damping{kp, km};
            r.resize(m);
            for (std::size_t i = 0; i < points.size(); ++i) {
                const auto freqs = rwa_frequencies(config.f_p, f_m[i], g);
                const auto widths = rwa_linewidths(config.f_p, f_m[i], damping, g);
                const bool upper = tags[i] == Branch::upper;
                r(static_cast<Eigen::Index>(2 * i)) =
                    (upper ? freqs.f_upper : freqs.f_lower) - points[i].f;
                r(static_cast<Eigen::Index>(2 * i + 1)) =
                    (upper ? widths.kappa_plus : widths.kappa_minus) - *points[i].hwhm;
            }
            return true;
        };

        lm = levmar_fit(fn, m, x, opt);
        x = lm.params;
        if (!lm.converged) break;
        auto next = assign(x(0));
        if (next == tags) break;
        tags = std::move(next);
    }

    LinewidthFit out;
    out.fit = package_fit(lm, {{"G_eff", "Hz"}, {"kappa_p", "Hz"}, {"kappa_m", "Hz"}});
    DampingParams fitted{std::max(x(1), std::numeric_limits<double>::min()),
                         std::max(x(2), std::numeric_limits<double>::min())};
    out.regime = classify_regime(x(0), fitted);
    return out;
}

// ---------------------------------------------------------------------------
// scaling fits

SqrtScalingFit fit_sqrt_n_scaling(const std::vector<ScalingSample>& samples) {
    require(!samples.empty(), "fit_sqrt_n_scaling: no samples");
    for (const auto& s : samples) {
        require(std::isfinite(s.n) && s.n > 0.0, "fit_sqrt_n_scaling: n must be > 0");
        require(std::isfinite(s.epsilon), "fit_sqrt_n_scaling: non-finite epsilon");
    }

    double swe = 0.0;
    double sn = 0.0;
    for (const auto& s : samples) {
        swe += std::sqrt(s.n) * s.epsilon;
        sn += s.n;
    }

    SqrtScalingFit out;
    out.alpha = swe / sn;
    double ss = 0.0;
    for (const auto& s : samples) {
        const double r = s.epsilon - out.alpha * std::sqrt(s.n);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(samples.size()));

    const bool all_same_n = std::all_of(samples.begin(), samples.end(), [&](const ScalingSample& s) {
        return s.n == samples.front().n;
    });
    out.identifiable = samples.size() == 1 || !all_same_n;
    return out;
}

double infer_gs(double alpha, double f_p, double N) {
    require(std::isfinite(alpha) && alpha >= 0.0, "infer_gs: alpha must be >= 0");
    require(f_p > 0.0, "infer_gs: f_p must be > 0");
    require(N > 0.0, "infer_gs: N must be > 0");
    return alpha * std::sqrt(f_p) / std::sqrt(N);
}

LineFit fit_bs_scaling(const std::vector<BsSample>& samples) {
    require(!samples.empty(), "fit_bs_scaling: no samples");
    for (const auto& s : samples)
        require(std::isfinite(s.epsilon_sq) && std::isfinite(s.delta_f_bs),
                "fit_bs_scaling: non-finite sample");

    const double n = static_cast<double>(samples.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& s : samples) {
        mx += s.epsilon_sq;
        my += s.delta_f_bs;
    }
    mx /= n;
    my /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& s : samples) {
        const double dx = s.epsilon_sq - mx;
        const double dy = s.delta_f_bs - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    LineFit out;
    out.identifiable = samples.size() >= 2 && sxx > 0.0;
    out.slope = out.identifiable ? sxy / sxx : 0.0;
    out.intercept = my - out.slope * mx;

    double ss_res = 0.0;
    for (const auto& s : samples) {
        const double r = s.delta_f_bs - (out.intercept + out.slope * s.epsilon_sq);
        ss_res += r * r;
    }
    out.residual_rms = std::sqrt(ss_res / n);
    out.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    return out;
}

} // namespace magpol
