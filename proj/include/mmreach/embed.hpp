#pragma once

#include "mmreach/decomp.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/system.hpp"

#include <functional>
#include <ostream>
#include <vector>

namespace mmreach {

enum class Direction { Forward, Backward };

const char* to_string(Direction d) noexcept;

/// Horizon, step, and direction of a reachability query.
struct ReachSpec {
    double horizon = 1.0;
    double dt = 1e-3;
    Direction direction = Direction::Forward;

    /// Throws ConfigError unless horizon >= 0, dt > 0, horizon/dt <= 1e8 and
    /// dt <= horizon (or horizon = 0).
    void validate() const;
};

/// Fixed-step grid covering [0, horizon]; the last step is shortened so the
/// final time equals the horizon exactly.
struct StepSchedule {
    std::size_t steps = 0;
    double dt = 0.0;
    double last_dt = 0.0;

    explicit StepSchedule(const ReachSpec& spec);
    double time(std::size_t k) const;
    double step(std::size_t k) const { return k + 1 == steps ? last_dt : dt; }
};

/// Order violations up to this size are rounding and get clipped.
inline constexpr double kOrderClipTol = 1e-6;

/// E(x, xh) = (d(x, w_lo, xh, w_hi), d(xh, w_hi, x, w_lo)).
class EmbeddingFunction {
public:
    explicit EmbeddingFunction(Decomposition d);

    const Decomposition& decomposition() const noexcept { return d_; }
    int state_dim() const { return d_.state_dim(); }

    /// `a` and `out` have length 2n laid out as (lower, upper).
    void evaluate(std::span<const double> a, std::span<double> out) const;
    EmbeddingState operator()(const EmbeddingState& a) const;

private:
    Decomposition d_;
    Vector wlo_;
    Vector whi_;
};

EmbeddingFunction embedding_function(const Decomposition& d);

/// Times and states of an integration; embedding states are stored as the
/// concatenation (lower, upper).
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;

    void write_csv(std::ostream& os) const;
};

/// Classical RK4 on the 2n-dimensional embedding system. Stored states keep
/// lower <= upper exactly; violations up to kOrderClipTol are clipped to the
/// midpoint and larger ones throw IntegratorStepError. Non-finite states
/// throw DivergenceError.
Trajectory integrate(const EmbeddingFunction& e, const EmbeddingState& a0, const ReachSpec& spec);

/// Same integration, keeping only the final state.
EmbeddingState integrate_final(const EmbeddingFunction& e, const EmbeddingState& a0, const ReachSpec& spec);

/// Box from a single embedding simulation from (X0.lo, X0.hi).
Box forward_reach_box(const VectorField& s, const Decomposition& d, const Box& x0, const ReachSpec& spec);

/// Over-approximation of the backward reachable set: forward embedding
/// integration of -F, given a decomposition of the time-reversed system.
Box backward_reach_box(const SystemDef& s, const Decomposition& d_neg, const Box& x0, const ReachSpec& spec);
Box backward_reach_box(const TransformedSystem& s, const Decomposition& d_neg, const Box& x0, const ReachSpec& spec);

// ---------------------------------------------------------------- plain ODE

/// Piecewise-constant disturbance on the step grid: segment s holds
/// `levels[s]` from step `starts[s]` until the next start.
struct StepSignal {
    std::vector<std::size_t> starts{0};
    std::vector<Vector> levels;

    static StepSignal constant(const Vector& w) { return StepSignal{{0}, {w}}; }
};

/// Reusable RK4 integrator for x' = F(x, w(t)) on the same step grid as the
/// embedding integration. Returns false when the state becomes non-finite
/// or the field throws NumericError.
class OdeIntegrator {
public:
    OdeIntegrator(const VectorField& f, const ReachSpec& spec);

    bool run(std::span<double> x, const StepSignal& w);

private:
    const VectorField& f_;
    StepSchedule sched_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Endpoint of x' = F(x, w(t)) from x0; throws DivergenceError on escape.
Vector simulate(const VectorField& f, const Vector& x0, const StepSignal& w, const ReachSpec& spec);

} // namespace mmreach
