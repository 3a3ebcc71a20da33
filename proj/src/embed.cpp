#include "mmreach/embed.hpp"

#include "mmreach/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace mmreach {

const char* to_string(Direction d) noexcept { return d == Direction::Forward ? "forward" : "backward"; }

void ReachSpec::validate() const
{
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ConfigError("horizon must be a finite value >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("dt must be positive");
    if (horizon > 0.0 && dt > horizon)
        throw ConfigError("dt must not exceed the horizon");
    if (horizon / dt > 1e8)
        throw ConfigError("horizon / dt exceeds 1e8 steps");
}

StepSchedule::StepSchedule(const ReachSpec& spec) : dt(spec.dt)
{
    spec.validate();
    if (spec.horizon == 0.0)
        return;
    const double ratio = spec.horizon / spec.dt;
    auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    const double rest = spec.horizon - static_cast<double>(full) * spec.dt;
    steps = rest > 1e-12 * std::max(1.0, spec.horizon) ? full + 1 : full;
    last_dt = spec.horizon - static_cast<double>(steps - 1) * spec.dt;
}

double StepSchedule::time(std::size_t k) const
{
    if (k >= steps)
        return static_cast<double>(steps - 1) * dt + last_dt;
    return static_cast<double>(k) * dt;
}

// ---------------------------------------------------------------- embedding

EmbeddingFunction::EmbeddingFunction(Decomposition d)
    : d_(std::move(d)), wlo_(d_.source()->disturbance().lo()), whi_(d_.source()->disturbance().hi())
{
}

EmbeddingFunction embedding_function(const Decomposition& d) { return EmbeddingFunction(d); }

void EmbeddingFunction::evaluate(std::span<const double> a, std::span<double> out) const
{
    const auto n = static_cast<std::size_t>(state_dim());
    if (a.size() != 2 * n || out.size() != 2 * n)
        throw DimensionError("embedding state must have length 2n");
    d_.evaluate(a.subspan(0, n), view(wlo_), a.subspan(n), view(whi_), out.subspan(0, n));
    d_.evaluate(a.subspan(n), view(whi_), a.subspan(0, n), view(wlo_), out.subspan(n));
}

EmbeddingState EmbeddingFunction::operator()(const EmbeddingState& a) const
{
    const auto n = a.dim();
    Vector in(2 * n), out(2 * n);
    in << a.lower(), a.upper();
    evaluate(view(in), view(out));
    // Derivatives are not ordered in general; return them through a raw pair.
    return EmbeddingState(out.head(n).cwiseMin(out.tail(n)), out.head(n).cwiseMax(out.tail(n)));
}

void Trajectory::write_csv(std::ostream& os) const
{
    os << "time";
    const auto dim = states.empty() ? 0 : states.front().size();
    for (Eigen::Index i = 0; i < dim; ++i)
        os << ",s" << i + 1;
    os << "\n";
    char buf[40];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        os << buf;
        for (Eigen::Index i = 0; i < dim; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", states[k][i]);
            os << "," << buf;
        }
        os << "\n";
    }
}

namespace {

void restore_order(std::span<double> a, std::size_t n, double t)
{
    for (std::size_t j = 0; j < n; ++j) {
        double& lo = a[j];
        double& hi = a[n + j];
        if (lo <= hi)
            continue;
        const double gap = lo - hi;
        if (!(gap <= kOrderClipTol))
            throw IntegratorStepError("embedding order violated by " + std::to_string(gap) + " in component " +
                                      std::to_string(j + 1) + " near t = " + std::to_string(t) +
                                      "; try a smaller dt");
        const double mid = 0.5 * (lo + hi);
        lo = hi = mid;
    }
}

template <class Observer>
void run_embedding(const EmbeddingFunction& e, const EmbeddingState& a0, const ReachSpec& spec, Observer&& observe)
{
    const StepSchedule sched(spec);
    const auto n = static_cast<std::size_t>(e.state_dim());
    if (static_cast<std::size_t>(a0.dim()) != n)
        throw DimensionError("initial embedding state has dimension " + std::to_string(a0.dim()) +
                             " but the system has n = " + std::to_string(n));
    std::vector<double> a(2 * n), s(2 * n), k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n);
    std::copy(a0.lower().begin(), a0.lower().end(), a.begin());
    std::copy(a0.upper().begin(), a0.upper().end(), a.begin() + static_cast<std::ptrdiff_t>(n));
    observe(0.0, a);

    double t = 0.0;
    for (std::size_t k = 0; k < sched.steps; ++k) {
        const double h = sched.step(k);
        try {
            e.evaluate(a, k1);
            for (std::size_t i = 0; i < 2 * n; ++i)
                s[i] = a[i] + 0.5 * h * k1[i];
            restore_order(s, n, t);
            e.evaluate(s, k2);
            for (std::size_t i = 0; i < 2 * n; ++i)
                s[i] = a[i] + 0.5 * h * k2[i];
            restore_order(s, n, t);
            e.evaluate(s, k3);
            for (std::size_t i = 0; i < 2 * n; ++i)
                s[i] = a[i] + h * k3[i];
            restore_order(s, n, t);
            e.evaluate(s, k4);
        } catch (const NumericError& err) {
            throw DivergenceError("embedding trajectory left the finite domain after t = " + std::to_string(t) +
                                  ": " + err.what());
        }
        for (std::size_t i = 0; i < 2 * n; ++i) {
            a[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(a[i]))
                throw DivergenceError("embedding trajectory became non-finite; last valid time t = " +
                                      std::to_string(t));
        }
        t = sched.time(k + 1);
        restore_order(a, n, t);
        observe(t, a);
    }
}

EmbeddingState to_state(const std::vector<double>& a)
{
    const auto n = static_cast<Eigen::Index>(a.size() / 2);
    return EmbeddingState(Eigen::Map<const Vector>(a.data(), n), Eigen::Map<const Vector>(a.data() + n, n));
}

Box run_box(const Decomposition& d, const Box& x0, const ReachSpec& spec)
{
    ReachSpec fwd = spec;
    fwd.direction = Direction::Forward;
    return integrate_final(embedding_function(d), EmbeddingState(x0.lo(), x0.hi()), fwd).rect();
}

void require_source(const Decomposition& d, const std::string& expected, const char* what)
{
    if (d.source()->fingerprint() != expected)
        throw MismatchError(std::string(what) + ": decomposition was built for a different system");
}

} // namespace

Trajectory integrate(const EmbeddingFunction& e, const EmbeddingState& a0, const ReachSpec& spec)
{
    Trajectory traj;
    run_embedding(e, a0, spec, [&](double t, const std::vector<double>& a) {
        traj.times.push_back(t);
        traj.states.emplace_back(Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size())));
    });
    return traj;
}

EmbeddingState integrate_final(const EmbeddingFunction& e, const EmbeddingState& a0, const ReachSpec& spec)
{
    std::vector<double> last;
    run_embedding(e, a0, spec, [&](double, const std::vector<double>& a) { last = a; });
    return to_state(last);
}

Box forward_reach_box(const VectorField& s, const Decomposition& d, const Box& x0, const ReachSpec& spec)
{
    if (spec.direction != Direction::Forward)
        throw ConfigError("forward_reach_box needs a forward ReachSpec");
    require_source(d, s.fingerprint(), "forward_reach_box");
    return run_box(d, x0, spec);
}

Box backward_reach_box(const SystemDef& s, const Decomposition& d_neg, const Box& x0, const ReachSpec& spec)
{
    if (spec.direction != Direction::Backward)
        throw ConfigError("backward_reach_box needs a backward ReachSpec");
    require_source(d_neg, reverse_time(s).fingerprint(), "backward_reach_box");
    return run_box(d_neg, x0, spec);
}

Box backward_reach_box(const TransformedSystem& s, const Decomposition& d_neg, const Box& x0, const ReachSpec& spec)
{
    if (spec.direction != Direction::Backward)
        throw ConfigError("backward_reach_box needs a backward ReachSpec");
    require_source(d_neg, reverse_time(s).fingerprint(), "backward_reach_box");
    return run_box(d_neg, x0, spec);
}

// ---------------------------------------------------------------- plain ODE

OdeIntegrator::OdeIntegrator(const VectorField& f, const ReachSpec& spec) : f_(f), sched_(spec)
{
    const auto n = static_cast<std::size_t>(f.state_dim());
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
}

bool OdeIntegrator::run(std::span<double> x, const StepSignal& w)
{
    const std::size_t n = x.size();
    if (w.levels.empty() || w.levels.size() != w.starts.size())
        throw ConfigError("disturbance signal needs one level per segment");
    std::size_t seg = 0;
    try {
        for (std::size_t k = 0; k < sched_.steps; ++k) {
            while (seg + 1 < w.starts.size() && k >= w.starts[seg + 1])
                ++seg;
            const std::span<const double> wk = view(w.levels[seg]);
            const double h = sched_.step(k);
            f_.evaluate(x, wk, k1_);
            for (std::size_t i = 0; i < n; ++i)
                tmp_[i] = x[i] + 0.5 * h * k1_[i];
            f_.evaluate(tmp_, wk, k2_);
            for (std::size_t i = 0; i < n; ++i)
                tmp_[i] = x[i] + 0.5 * h * k2_[i];
            f_.evaluate(tmp_, wk, k3_);
            for (std::size_t i = 0; i < n; ++i)
                tmp_[i] = x[i] + h * k3_[i];
            f_.evaluate(tmp_, wk, k4_);
            bool finite = true;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
                finite = finite && std::isfinite(x[i]);
            }
            if (!finite)
                return false;
        }
    } catch (const NumericError&) {
        return false;
    }
    return true;
}

Vector simulate(const VectorField& f, const Vector& x0, const StepSignal& w, const ReachSpec& spec)
{
    OdeIntegrator ode(f, spec);
    Vector x = x0;
    if (!ode.run(view(x), w))
        throw DivergenceError("trajectory escaped to non-finite values before t = " + std::to_string(spec.horizon));
    return x;
}

} // namespace mmreach
