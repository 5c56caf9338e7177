#include "medfx/optim.hpp"

#include <cmath>
#include <limits>

namespace medfx {

namespace {

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd &)> &f, const Eigen::VectorXd &x,
                                 double step) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double safe_eval(const std::function<double(const Eigen::VectorXd &)> &f, const Eigen::VectorXd &x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

OptimResult bfgs_minimize(const std::function<double(const Eigen::VectorXd &)> &objective, Eigen::VectorXd start,
                          const BfgsOptions &options) {
    OptimResult result;
    result.x = std::move(start);
    result.value = safe_eval(objective, result.x);
    const Eigen::Index n = result.x.size();
    if (n == 0 || !std::isfinite(result.value)) {
        result.converged = std::isfinite(result.value);
        return result;
    }

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd grad = numeric_gradient(objective, result.x, options.diff_step);
    for (result.iterations = 0; result.iterations < options.max_iter; ++result.iterations) {
        if (!grad.allFinite())
            return result;
        if (grad.lpNorm<Eigen::Infinity>() < options.grad_tol) {
            result.converged = true;
            return result;
        }
        Eigen::VectorXd direction = -inv_hessian * grad;
        double slope = grad.dot(direction);
        if (!(slope < 0.0)) {
            inv_hessian.setIdentity();
            direction = -grad;
            slope = -grad.squaredNorm();
        }

        double step = 1.0;
        Eigen::VectorXd candidate;
        double value = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int tries = 0; tries < 50; ++tries) {
            candidate = result.x + step * direction;
            value = safe_eval(objective, candidate);
            if (value <= result.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent along the quasi-Newton direction: restart once from steepest descent.
            if (!inv_hessian.isIdentity()) {
                inv_hessian.setIdentity();
                continue;
            }
            result.converged = true; // stationary to line-search precision
            return result;
        }

        const Eigen::VectorXd new_grad = numeric_gradient(objective, candidate, options.diff_step);
        const Eigen::VectorXd s = candidate - result.x;
        const Eigen::VectorXd yv = new_grad - grad;
        const double previous = result.value;
        result.x = candidate;
        result.value = value;
        grad = new_grad;

        if (std::abs(previous - value) <= options.rel_tol * (std::abs(previous) + options.rel_tol)) {
            result.converged = true;
            ++result.iterations;
            return result;
        }
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const Eigen::VectorXd hy = inv_hessian * yv;
            const double yhy = yv.dot(hy);
            inv_hessian += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) - (hy * s.transpose() + s * hy.transpose()) / sy;
        }
    }
    return result;
}

} // namespace medfx
