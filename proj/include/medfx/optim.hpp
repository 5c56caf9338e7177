#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace medfx {

struct BfgsOptions {
    std::size_t max_iter = 200;
    double grad_tol = 1e-6;
    double rel_tol = 1e-10;
    double diff_step = 1e-5;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Quasi-Newton minimization with central-difference gradients and an Armijo
/// backtracking line search. Non-finite objective values are treated as
/// infeasible. Holds no state between calls.
OptimResult bfgs_minimize(const std::function<double(const Eigen::VectorXd &)> &objective, Eigen::VectorXd start,
                          const BfgsOptions &options = {});

} // namespace medfx
