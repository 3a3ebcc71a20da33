#pragma once

#include "mmreach/expr.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mmreach {

/// Right-hand side x' = F(x, w) with w ranging over a disturbance box.
/// Everything downstream (decompositions, integrators, samplers) works through
/// this interface.
class VectorField {
public:
    virtual ~VectorField() = default;

    virtual int state_dim() const = 0;
    virtual int disturbance_dim() const = 0;
    virtual const Box& disturbance() const = 0;

    /// Writes F(x, w) into `out` (length n). Throws NumericError on
    /// non-finite values.
    virtual void evaluate(std::span<const double> x, std::span<const double> w, std::span<double> out) const = 0;

    /// F_i(x, w). The default evaluates the whole field.
    virtual double component(int i, std::span<const double> x, std::span<const double> w) const;

    /// Stable text identifying the field; equal fingerprints mean equal fields.
    virtual std::string fingerprint() const = 0;

    Vector operator()(const Vector& x, const Vector& w) const;
};

using FieldPtr = std::shared_ptr<const VectorField>;

/// A disturbed ODE defined by one expression per state component.
class SystemDef final : public VectorField {
public:
    SystemDef(int n, int m, std::vector<Expr> field, Box disturbance, std::string note = {});

    /// Parses `field` (one expression per state) with dimensions (n, m).
    static SystemDef from_strings(int n, int m, const std::vector<std::string>& field, Box disturbance,
                                  std::string note = {});

    int state_dim() const override { return n_; }
    int disturbance_dim() const override { return m_; }
    const Box& disturbance() const override { return disturbance_; }
    const std::vector<Expr>& field() const noexcept { return field_; }
    const std::string& note() const noexcept { return note_; }

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<double> out) const override;
    double component(int i, std::span<const double> x, std::span<const double> w) const override;
    std::string fingerprint() const override;

private:
    int n_;
    int m_;
    std::vector<Expr> field_;
    Box disturbance_;
    std::string note_;
};

/// y' = T^-1 F(T y, w) for a nonsingular shape matrix T. The disturbance is
/// not transformed.
class TransformedSystem final : public VectorField {
public:
    TransformedSystem(std::shared_ptr<const SystemDef> base, Matrix shape);

    const SystemDef& base() const noexcept { return *base_; }
    std::shared_ptr<const SystemDef> base_ptr() const noexcept { return base_; }
    const Matrix& shape() const noexcept { return shape_; }
    const Matrix& shape_inverse() const noexcept { return inverse_; }

    int state_dim() const override { return base_->state_dim(); }
    int disturbance_dim() const override { return base_->disturbance_dim(); }
    const Box& disturbance() const override { return base_->disturbance(); }

    void evaluate(std::span<const double> y, std::span<const double> w, std::span<double> out) const override;
    std::string fingerprint() const override;

private:
    std::shared_ptr<const SystemDef> base_;
    Matrix shape_;
    Matrix inverse_;
};

Vector eval_field(const VectorField& s, const Vector& x, const Vector& w);

TransformedSystem transform(const SystemDef& s, const Matrix& shape);
TransformedSystem transform(std::shared_ptr<const SystemDef> s, const Matrix& shape);

/// The system with field -F, same disturbance box.
SystemDef reverse_time(const SystemDef& s);
/// -F_T, built as the transform of the reversed base system.
TransformedSystem reverse_time(const TransformedSystem& s);

} // namespace mmreach
