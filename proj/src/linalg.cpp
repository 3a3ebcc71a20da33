#include "mmreach/linalg.hpp"

#include "mmreach/errors.hpp"

#include <cmath>
#include <string>

namespace mmreach {

namespace {

struct LuCheck {
    bool ok;
    double det;
    double rcond;
};

LuCheck check(const Eigen::PartialPivLU<Matrix>& lu)
{
    const double det = lu.determinant();
    const double rcond = lu.rcond();
    const bool ok = std::isfinite(det) && std::abs(det) > kMinDeterminant && rcond * kMaxCondition >= 1.0;
    return {ok, det, rcond};
}

} // namespace

Matrix checked_inverse(const Matrix& m)
{
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionError("shape matrix must be square and nonempty, got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
    if (!m.allFinite())
        throw GeometryError("shape matrix has non-finite entries");
    Eigen::PartialPivLU<Matrix> lu(m);
    const auto c = check(lu);
    if (!c.ok)
        throw GeometryError("singular shape matrix (det = " + std::to_string(c.det) +
                            ", rcond = " + std::to_string(c.rcond) + ")");
    return lu.inverse();
}

bool is_well_conditioned(const Matrix& m) noexcept
{
    if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite())
        return false;
    Eigen::PartialPivLU<Matrix> lu(m);
    return check(lu).ok;
}

} // namespace mmreach
