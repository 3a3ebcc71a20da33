#pragma once

#include "mmreach/expr.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/optimize.hpp"
#include "mmreach/system.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mmreach {

enum class DecompMethod { Tight, JacobianSign, Monotone, ClosedForm, Combined };

const char* to_string(DecompMethod m) noexcept;
DecompMethod decomp_method_from_string(const std::string& s);

namespace decomp_detail {

/// Evaluates d for arguments already known to be ordered; `lower_side` is true
/// when (x, w) <= (xh, wh).
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                          std::span<const double> wh, bool lower_side, std::span<double> out) const = 0;
};

} // namespace decomp_detail

/// Decomposition function d(x, w, xh, wh) of a vector field, defined on
/// ordered argument pairs.
class Decomposition {
public:
    using Params = std::vector<std::pair<std::string, std::string>>;

    Decomposition(FieldPtr source, DecompMethod method, std::shared_ptr<const decomp_detail::Evaluator> impl,
                  Params params = {});

    int state_dim() const { return source_->state_dim(); }
    int disturbance_dim() const { return source_->disturbance_dim(); }
    DecompMethod method() const noexcept { return method_; }
    const FieldPtr& source() const noexcept { return source_; }
    const Params& params() const noexcept { return params_; }

    /// Throws OrderError when neither (x, w) <= (xh, wh) nor the reverse.
    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                  std::span<const double> wh, std::span<double> out) const;

    Vector operator()(const Vector& x, const Vector& w, const Vector& xh, const Vector& wh) const;

private:
    FieldPtr source_;
    DecompMethod method_;
    std::shared_ptr<const decomp_detail::Evaluator> impl_;
    Params params_;
};

/// The tight decomposition: componentwise min of F_i over the box spanned by
/// the arguments with y_i pinned to x_i (max on the reversed side).
Decomposition tight_decomposition(FieldPtr s, const BoxOptimizerOptions& opts = {});

/// Counters shared by every tight decomposition evaluator in the process.
BoxOptimizerStats tight_optimizer_stats();

/// Off-diagonal Jacobian and disturbance signs estimated on `domain`; throws
/// IndefiniteError when an entry takes both signs.
Decomposition jacobian_sign_decomposition(FieldPtr s, const Box& domain, int samples, std::uint64_t seed = 0x5eed);

/// d = F(x, w). Throws MonotonicityError when a sampled off-diagonal or
/// disturbance partial is negative.
Decomposition monotone_decomposition(FieldPtr s, const Box& domain, int samples, std::uint64_t seed = 0x5eed);

/// Componentwise max on the lower side and min on the upper side.
Decomposition combine(const Decomposition& d1, const Decomposition& d2);

/// Decomposition given by expressions over x, w, xh, wh.
Decomposition closed_form_decomposition(FieldPtr s, std::vector<Expr> exprs);
Decomposition closed_form_decomposition(FieldPtr s, const std::vector<std::string>& exprs);

/// Construction recipe used by configs and transform plans.
struct DecompositionSpec {
    DecompMethod method = DecompMethod::Tight;
    std::optional<Box> domain;
    int samples = 1000;
    std::vector<std::string> exprs;
};

Decomposition build_decomposition(FieldPtr s, const DecompositionSpec& spec);

// ---------------------------------------------------------------- checking

struct CheckOptions {
    int probes = 1000;
    std::uint64_t seed = 1;
    /// State box the probe pairs are drawn from; required.
    Box state_box;
    /// Disturbance box; defaults to the source field's W.
    std::optional<Box> disturbance_box;
    double h = kDefaultFdStep;
    double slack = 1e-7;
};

struct CheckWitness {
    int condition; // 1..4
    std::string detail;
    Vector x, w, xh, wh;
};

struct DecompositionReport {
    int probes = 0;
    double consistency_residual = 0.0;
    int violations[5] = {0, 0, 0, 0, 0}; // indexed by condition; [0] unused
    int skipped = 0;
    std::vector<CheckWitness> witnesses;

    int total_violations() const { return violations[2] + violations[3] + violations[4]; }
};

/// Samples the four mixed-monotonicity conditions: diagonal consistency, and
/// finite-difference signs of the partials at random ordered pairs.
DecompositionReport check_decomposition(const Decomposition& d, const CheckOptions& opts);

} // namespace mmreach
