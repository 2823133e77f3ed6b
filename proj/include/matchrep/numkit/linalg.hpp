#pragma once
#include <optional>
#include <vector>

#include "matchrep/numkit/matrix.hpp"

namespace matchrep::num {

// Solves A x = b for symmetric positive-definite A by Cholesky factorization.
// Returns nullopt when A is not numerically positive definite.
std::optional<std::vector<double>> solve_spd(const Matrix& a, const std::vector<double>& b);

}  // namespace matchrep::num
