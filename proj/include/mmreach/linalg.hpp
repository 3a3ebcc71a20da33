#pragma once

#include "mmreach/types.hpp"

namespace mmreach {

/// Largest accepted condition-number estimate for shape matrices.
inline constexpr double kMaxCondition = 1e12;
/// Smallest accepted |det| for shape matrices.
inline constexpr double kMinDeterminant = 1e-12;

/// Inverse by LU with partial pivoting. Throws GeometryError when the matrix
/// is singular by either the determinant or the condition threshold, and
/// DimensionError when it is not square.
Matrix checked_inverse(const Matrix& m);

/// True when `m` passes the same checks as `checked_inverse`.
bool is_well_conditioned(const Matrix& m) noexcept;

} // namespace mmreach
