#pragma once

#include <entropic/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

namespace entropic {

struct NewtonOptions {
    double gradient_tolerance = 1e-9;
    int max_iterations = 200;
    /// Armijo sufficient-decrease constant.
    double armijo = 1e-4;
    int max_backtracks = 60;
};

struct SmoothEvaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

struct NewtonOutcome {
    Eigen::VectorXd x;
    SmoothEvaluation last;
    int iterations = 0;
};

/// Damped Newton for a smooth convex function. `evaluate(x)` returns value,
/// gradient and Hessian. Steps solve the (Levenberg-regularised when needed)
/// Newton system and are backtracked until the Armijo condition holds; near
/// the optimum, where the objective no longer resolves the decrease, a step
/// that reduces the gradient norm is accepted instead.
template <class Evaluate>
NewtonOutcome newton_minimize(Evaluate&& evaluate, Eigen::VectorXd x0, const NewtonOptions& options) {
    NewtonOutcome out;
    out.x = std::move(x0);
    out.last = evaluate(out.x);
    require(std::isfinite(out.last.value), ErrorCode::invalid_input, "non-finite dual objective at the start point");

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const double gnorm = out.last.gradient.size() ? out.last.gradient.template lpNorm<Eigen::Infinity>() : 0.0;
        if (gnorm < options.gradient_tolerance) {
            out.iterations = iter;
            return out;
        }

        Eigen::VectorXd step;
        {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(out.last.hessian);
            bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
            if (ok) {
                step = ldlt.solve(-out.last.gradient);
                ok = step.allFinite() && step.dot(out.last.gradient) < 0.0;
            }
            double shift = 1e-12 * std::max(1.0, out.last.hessian.diagonal().cwiseAbs().maxCoeff());
            while (!ok) {
                Eigen::MatrixXd damped = out.last.hessian;
                damped.diagonal().array() += shift;
                Eigen::LDLT<Eigen::MatrixXd> reg(damped);
                step = reg.solve(-out.last.gradient);
                ok = reg.info() == Eigen::Success && step.allFinite() && step.dot(out.last.gradient) < 0.0;
                shift *= 10.0;
                if (shift > 1e12)
                    step = -out.last.gradient, ok = true;
            }
        }

        const double slope = step.dot(out.last.gradient);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < options.max_backtracks; ++k) {
            Eigen::VectorXd trial = out.x + t * step;
            SmoothEvaluation eval = evaluate(trial);
            if (std::isfinite(eval.value)) {
                const bool armijo = eval.value <= out.last.value + options.armijo * t * slope;
                const double scale = std::max(1.0, std::abs(out.last.value));
                const bool flat = eval.value <= out.last.value + 1e-13 * scale &&
                                  eval.gradient.template lpNorm<Eigen::Infinity>() < gnorm;
                if (armijo || flat) {
                    out.x = std::move(trial);
                    out.last = std::move(eval);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "line search failed after " << iter << " iterations; gradient norm " << gnorm;
            throw Error(ErrorCode::convergence, msg.str());
        }
    }
    const double gnorm = out.last.gradient.size() ? out.last.gradient.template lpNorm<Eigen::Infinity>() : 0.0;
    if (gnorm < options.gradient_tolerance) {
        out.iterations = options.max_iterations;
        return out;
    }
    std::ostringstream msg;
    msg << "maximum iterations (" << options.max_iterations << ") exceeded; final gradient norm " << gnorm;
    throw Error(ErrorCode::convergence, msg.str());
}

} // namespace entropic
