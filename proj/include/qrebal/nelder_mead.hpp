#pragma once

#include "qrebal/common.hpp"

#include <functional>

namespace qrebal {

struct NelderMeadResult {
    Vector x;
    double fx = 0.0;
    int evaluations = 0;
};

/// Derivative-free simplex minimiser (Nelder-Mead with the standard
/// reflection 1, expansion 2, contraction 1/2, shrink 1/2 coefficients).
///
/// The initial simplex is x0 plus `step` along each axis. Stops after
/// `max_evals` objective calls or once the simplex spread in f falls below
/// `ftol`. Tolerates a noisy objective: the best point ever evaluated is
/// returned, not the final simplex vertex.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0, double step,
                             int max_evals, double ftol = 1e-8);

}  // namespace qrebal
