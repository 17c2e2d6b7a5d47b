#include "magpol/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magpol {

const char* to_string(FitStatus s) {
    switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::stalled: return "stalled";
    case FitStatus::unidentifiable: return "unidentifiable";
    case FitStatus::infeasible_start: return "infeasible_start";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd effective_scale(const LevmarOptions& options, Eigen::Index n) {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
    if (options.typical_scale.size() == n) {
        for (Eigen::Index k = 0; k < n; ++k) {
            s(k) = std::max(std::abs(options.typical_scale(k)),
                            std::numeric_limits<double>::min());
        }
    }
    return s;
}

// Forward differences, falling back to a backward step when the forward probe
// leaves the feasible region. A column where both probes fail is zeroed; the
// damping term keeps the solve well posed.
bool numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                      const Eigen::VectorXd& scale, double rel_step, Eigen::MatrixXd& jac) {
    const Eigen::Index m = r.size();
    const Eigen::Index n = x.size();
    jac.resize(m, n);
    Eigen::VectorXd probe = x;
    Eigen::VectorXd rp(m);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double h = rel_step * std::max(std::abs(x(k)), scale(k));
        probe(k) = x(k) + h;
        if (fn(probe, rp) && rp.size() == m) {
            jac.col(k) = (rp - r) / h;
        } else {
            probe(k) = x(k) - h;
            if (fn(probe, rp) && rp.size() == m) {
                jac.col(k) = (r - rp) / h;
            } else {
                jac.col(k).setZero();
            }
        }
        probe(k) = x(k);
    }
    return true;
}

bool step_small(const Eigen::VectorXd& delta, const Eigen::VectorXd& x,
                const Eigen::VectorXd& scale, double tol) {
    for (Eigen::Index k = 0; k < delta.size(); ++k) {
        if (std::abs(delta(k)) > tol * std::max(std::abs(x(k)), scale(k))) return false;
    }
    return true;
}

} // namespace

LevmarResult levmar_fit(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x0,
                        const LevmarOptions& options) {
    LevmarResult out;
    out.params = x0;

    const Eigen::Index n = x0.size();
    const Eigen::Index m = n_residuals;
    if (n == 0) {
        out.status = FitStatus::unidentifiable;
        out.message = "no free parameters";
        return out;
    }
    if (m < n) {
        out.status = FitStatus::unidentifiable;
        out.message = "fewer residuals than free parameters";
        return out;
    }

    const Eigen::VectorXd scale = effective_scale(options, n);

    Eigen::VectorXd x = x0;
    Eigen::VectorXd r(m);
    if (!fn(x, r) || r.size() != m) {
        out.status = FitStatus::infeasible_start;
        out.message = "residual function rejected the initial point";
        return out;
    }
    double ssr = r.squaredNorm();

    Eigen::MatrixXd jac;
    Eigen::VectorXd r_try(m);
    double lambda = options.lambda_init;
    bool done = false;

    for (int iter = 0; iter < options.max_iterations && !done; ++iter) {
        out.iterations = iter + 1;
        numeric_jacobian(fn, x, r, scale, options.jacobian_step, jac);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        const double diag_floor = std::max(jtj.diagonal().maxCoeff(), 1.0) * 1e-30;

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index k = 0; k < n; ++k) {
                a(k, k) += lambda * std::max(jtj(k, k), diag_floor);
            }
            const Eigen::VectorXd delta = a.ldlt().solve(-jtr);
            const Eigen::VectorXd x_try = x + delta;
            const bool feasible = fn(x_try, r_try) && r_try.size() == m;
            const double ssr_try = feasible ? r_try.squaredNorm()
                                            : std::numeric_limits<double>::infinity();
            if (std::isfinite(ssr_try) && ssr_try < ssr) {
                x = x_try;
                r = r_try;
                ssr = ssr_try;
                lambda = std::max(lambda * 0.1, 1e-14);
                accepted = true;
                if (step_small(delta, x, scale, options.step_tolerance)) {
                    out.converged = true;
                    out.status = FitStatus::converged;
                    done = true;
                }
            } else {
                lambda *= 10.0;
                if (lambda > options.lambda_max) {
                    // No descent direction left: a vanishing trial step means the
                    // minimum is already resolved to tolerance.
                    if (step_small(delta, x, scale, options.step_tolerance)) {
                        out.converged = true;
                        out.status = FitStatus::converged;
                    } else {
                        out.status = FitStatus::stalled;
                        out.message = "no strict-descent step before lambda_max";
                    }
                    done = true;
                    break;
                }
            }
        }
    }

    out.params = x;
    out.residual_rms = std::sqrt(ssr / static_cast<double>(m));
    if (!done && !out.converged) {
        out.status = FitStatus::max_iterations;
        out.message = "iteration limit reached";
    }

    if (out.converged) {
        numeric_jacobian(fn, x, r, scale, options.jacobian_step, jac);
        // rank-test in normalized parameters: otherwise a healthy fit whose
        // parameters differ by orders of magnitude looks rank deficient.
        // The test runs on the Jacobian itself; squaring it into J^T J first
        // would double the log-condition and reject identifiable problems.
        Eigen::MatrixXd js = jac;
        for (Eigen::Index k = 0; k < n; ++k) js.col(k) *= scale(k);
        // threshold sits above the forward-difference noise floor (eps / 1e-6
        // step = 1e-10): a truly dependent column cannot rise past it, while a
        // stiff-but-identifiable physical fit keeps its pivots well above
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(js);
        qr.setThreshold(1e-8);
        if (qr.rank() < n) {
            out.converged = false;
            out.status = FitStatus::unidentifiable;
            out.message = "normal equations are rank deficient at the solution";
            return out;
        }
        const double dof = static_cast<double>(m > n ? m - n : 1);
        // undoing the column scaling recovers (J^T J)^-1 * ssr/dof exactly
        const Eigen::MatrixXd jtj_s = js.transpose() * js;
        out.covariance = scale.asDiagonal() * jtj_s.fullPivLu().inverse() * scale.asDiagonal() *
                         (ssr / dof);
        out.sigma.resize(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            out.sigma(k) = std::sqrt(std::max(out.covariance(k, k), 0.0));
        }
    }
    return out;
}

} // namespace magpol
