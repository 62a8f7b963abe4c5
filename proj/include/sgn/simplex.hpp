#pragma once

#include <functional>
#include <vector>

namespace sgn {

struct SimplexOptions {
    double initial_step = 0.5;
    double tolerance = 1e-8;  ///< stop when the simplex diameter falls below this
    /// ... or when the vertex values agree to this relative spread
    double value_tolerance = 1e-13;
    int max_iterations = 2000;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead minimisation with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Non-finite objective values
/// are treated as +infinity.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const SimplexOptions& options = {});

}  // namespace sgn
