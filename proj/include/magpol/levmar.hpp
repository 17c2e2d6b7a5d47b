#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

// Damped Gauss-Newton (Levenberg-Marquardt) least squares. Small and
// deterministic: forward-difference Jacobian, strict-descent step acceptance,
// covariance from the inverse normal matrix scaled by residual variance.

namespace magpol {

// Fill r with the m residuals at x; return false when x is infeasible (the
// step is then rejected as if the residual were infinite).
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LevmarOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;   // relative step size declaring convergence
    double jacobian_step = 1e-6;     // relative forward-difference step
    double lambda_init = 1e-3;
    double lambda_max = 1e12;
    // per-parameter magnitude floor for steps and tolerances; defaults to 1
    Eigen::VectorXd typical_scale;
};

enum class FitStatus {
    converged,
    max_iterations,
    stalled,          // no descent direction found before lambda_max
    unidentifiable,   // fewer residuals than parameters or singular normal matrix
    infeasible_start, // residual_fn rejected the initial point
};

const char* to_string(FitStatus s);

struct LevmarResult {
    Eigen::VectorXd params;
    Eigen::VectorXd sigma;      // one-sigma; zero-sized unless converged
    Eigen::MatrixXd covariance; // zero-sized unless converged
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
    FitStatus status = FitStatus::max_iterations;
    std::string message;
};

LevmarResult levmar_fit(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x0,
                        const LevmarOptions& options = {});

} // namespace magpol
