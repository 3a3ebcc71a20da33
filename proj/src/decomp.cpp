#include "mmreach/decomp.hpp"

#include "mmreach/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace mmreach {

using decomp_detail::Evaluator;

namespace {

std::atomic<std::uint64_t> g_tight_corner{0};
std::atomic<std::uint64_t> g_tight_search{0};

constexpr double kSignZero = 1e-8;

std::string fmt_point(std::span<const double> v)
{
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

Vector to_vector(std::span<const double> s)
{
    Vector v(static_cast<Eigen::Index>(s.size()));
    std::copy(s.begin(), s.end(), v.data());
    return v;
}

// Central difference of F_i along one coordinate of the concatenated (x, w).
double field_partial(const VectorField& f, int i, std::vector<double>& xw, std::size_t coord, int n)
{
    const double base = xw[coord];
    const double step = kDefaultFdStep * std::max(1.0, std::abs(base));
    auto value = [&] {
        std::span<const double> all(xw);
        return f.component(i, all.subspan(0, static_cast<std::size_t>(n)), all.subspan(static_cast<std::size_t>(n)));
    };
    xw[coord] = base + step;
    const double up = value();
    xw[coord] = base - step;
    const double down = value();
    xw[coord] = base;
    return (up - down) / (2.0 * step);
}

struct SignSample {
    std::vector<double> pos_witness;
    std::vector<double> neg_witness;
};

// Samples sign information for every off-diagonal state partial and every
// disturbance partial. Entry (i, c) with c < n is dF_i/dx_c, c >= n is
// dF_i/dw_{c-n}.
std::vector<SignSample> sample_signs(const VectorField& f, const Box& domain, int samples, std::uint64_t seed)
{
    const int n = f.state_dim();
    const int m = f.disturbance_dim();
    if (domain.dim() != n)
        throw DimensionError("sign-sampling domain has dimension " + std::to_string(domain.dim()) +
                             " but n = " + std::to_string(n));
    if (samples < 1)
        throw ConfigError("sign sampling needs at least one sample");
    const auto cols = static_cast<std::size_t>(n + m);
    std::vector<SignSample> out(static_cast<std::size_t>(n) * cols);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> xw(cols);
    const Box& W = f.disturbance();
    for (int s = 0; s < samples; ++s) {
        for (int j = 0; j < n; ++j)
            xw[static_cast<std::size_t>(j)] = domain.lo()[j] + unit(rng) * (domain.hi()[j] - domain.lo()[j]);
        for (int k = 0; k < m; ++k)
            xw[static_cast<std::size_t>(n + k)] = W.lo()[k] + unit(rng) * (W.hi()[k] - W.lo()[k]);
        for (int i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < cols; ++c) {
                if (c == static_cast<std::size_t>(i))
                    continue;
                auto& entry = out[static_cast<std::size_t>(i) * cols + c];
                const double g = field_partial(f, i, xw, c, n);
                if (g > kSignZero && entry.pos_witness.empty())
                    entry.pos_witness = xw;
                else if (g < -kSignZero && entry.neg_witness.empty())
                    entry.neg_witness = xw;
            }
        }
    }
    return out;
}

std::string entry_name(int i, std::size_t c, int n)
{
    const bool state = c < static_cast<std::size_t>(n);
    return "(" + std::to_string(i + 1) + ", " + (state ? "x" : "w") +
           std::to_string(state ? c + 1 : c - static_cast<std::size_t>(n) + 1) + ")";
}

std::string domain_param(const Box& b)
{
    std::ostringstream os;
    os.precision(17);
    os << "[" << b.lo().transpose() << "] .. [" << b.hi().transpose() << "]";
    return os.str();
}

// ---------------------------------------------------------------- evaluators

class TightEvaluator final : public Evaluator {
public:
    TightEvaluator(FieldPtr f, BoxOptimizerOptions opts) : f_(std::move(f)), opts_(opts) {}

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                  std::span<const double> wh, bool lower_side, std::span<double> out) const override
    {
        const int n = f_->state_dim();
        const int m = f_->disturbance_dim();
        const auto dim = static_cast<std::size_t>(n + m);
        std::vector<double> lo(dim), hi(dim);
        for (int j = 0; j < n; ++j) {
            const auto u = static_cast<std::size_t>(j);
            lo[u] = lower_side ? x[u] : xh[u];
            hi[u] = lower_side ? xh[u] : x[u];
        }
        for (int k = 0; k < m; ++k) {
            const auto u = static_cast<std::size_t>(k);
            lo[static_cast<std::size_t>(n) + u] = lower_side ? w[u] : wh[u];
            hi[static_cast<std::size_t>(n) + u] = lower_side ? wh[u] : w[u];
        }
        BoxOptimizerStats stats;
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            const double li = lo[u];
            const double hi_i = hi[u];
            lo[u] = hi[u] = x[u];
            auto objective = [&](std::span<const double> q) {
                return f_->component(i, q.subspan(0, static_cast<std::size_t>(n)),
                                     q.subspan(static_cast<std::size_t>(n)));
            };
            out[u] = box_extremum(objective, lo, hi, lower_side, opts_, &stats);
            lo[u] = li;
            hi[u] = hi_i;
        }
        g_tight_corner.fetch_add(stats.corner, std::memory_order_relaxed);
        g_tight_search.fetch_add(stats.search, std::memory_order_relaxed);
    }

private:
    FieldPtr f_;
    BoxOptimizerOptions opts_;
};

class SignEvaluator final : public Evaluator {
public:
    // use_hat[i * (n+m) + c]: take the hatted argument for that entry.
    SignEvaluator(FieldPtr f, std::vector<bool> use_hat) : f_(std::move(f)), use_hat_(std::move(use_hat)) {}

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                  std::span<const double> wh, bool, std::span<double> out) const override
    {
        const int n = f_->state_dim();
        const int m = f_->disturbance_dim();
        const auto cols = static_cast<std::size_t>(n + m);
        std::vector<double> xi(static_cast<std::size_t>(n)), zeta(static_cast<std::size_t>(m));
        for (int i = 0; i < n; ++i) {
            const std::size_t row = static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < n; ++j) {
                const auto u = static_cast<std::size_t>(j);
                xi[u] = (j != i && use_hat_[row + u]) ? xh[u] : x[u];
            }
            for (int k = 0; k < m; ++k) {
                const auto u = static_cast<std::size_t>(k);
                zeta[u] = use_hat_[row + static_cast<std::size_t>(n) + u] ? wh[u] : w[u];
            }
            out[static_cast<std::size_t>(i)] = f_->component(i, xi, zeta);
        }
    }

private:
    FieldPtr f_;
    std::vector<bool> use_hat_;
};

class FieldEvaluator final : public Evaluator {
public:
    explicit FieldEvaluator(FieldPtr f) : f_(std::move(f)) {}

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double>,
                  std::span<const double>, bool, std::span<double> out) const override
    {
        f_->evaluate(x, w, out);
    }

private:
    FieldPtr f_;
};

class ExprEvaluator final : public Evaluator {
public:
    explicit ExprEvaluator(std::vector<Expr> exprs) : exprs_(std::move(exprs)) {}

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                  std::span<const double> wh, bool, std::span<double> out) const override
    {
        const Bindings b{x, w, xh, wh};
        for (std::size_t i = 0; i < exprs_.size(); ++i)
            out[i] = exprs_[i].eval(b);
    }

private:
    std::vector<Expr> exprs_;
};

class CombinedEvaluator final : public Evaluator {
public:
    CombinedEvaluator(Decomposition a, Decomposition b) : a_(std::move(a)), b_(std::move(b)) {}

    void evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                  std::span<const double> wh, bool lower_side, std::span<double> out) const override
    {
        std::vector<double> other(out.size());
        a_.evaluate(x, w, xh, wh, out);
        b_.evaluate(x, w, xh, wh, other);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = lower_side ? std::max(out[i], other[i]) : std::min(out[i], other[i]);
    }

private:
    Decomposition a_;
    Decomposition b_;
};

} // namespace

const char* to_string(DecompMethod m) noexcept
{
    switch (m) {
    case DecompMethod::Tight: return "tight";
    case DecompMethod::JacobianSign: return "jacobian_sign";
    case DecompMethod::Monotone: return "monotone";
    case DecompMethod::ClosedForm: return "closed_form";
    case DecompMethod::Combined: return "combined";
    }
    return "unknown";
}

DecompMethod decomp_method_from_string(const std::string& s)
{
    for (auto m : {DecompMethod::Tight, DecompMethod::JacobianSign, DecompMethod::Monotone, DecompMethod::ClosedForm,
                   DecompMethod::Combined})
        if (s == to_string(m))
            return m;
    throw ConfigError("unknown decomposition method '" + s +
                      "' (expected tight, jacobian_sign, monotone, closed_form)");
}

// ---------------------------------------------------------------- Decomposition

Decomposition::Decomposition(FieldPtr source, DecompMethod method, std::shared_ptr<const Evaluator> impl,
                             Params params)
    : source_(std::move(source)), method_(method), impl_(std::move(impl)), params_(std::move(params))
{
}

void Decomposition::evaluate(std::span<const double> x, std::span<const double> w, std::span<const double> xh,
                             std::span<const double> wh, std::span<double> out) const
{
    const auto n = static_cast<std::size_t>(state_dim());
    const auto m = static_cast<std::size_t>(disturbance_dim());
    if (x.size() != n || xh.size() != n || w.size() != m || wh.size() != m || out.size() != n)
        throw DimensionError("decomposition arguments do not match (n, m) = (" + std::to_string(n) + ", " +
                             std::to_string(m) + ")");
    bool lower = true;
    bool upper = true;
    for (std::size_t j = 0; j < n; ++j) {
        lower = lower && x[j] <= xh[j];
        upper = upper && xh[j] <= x[j];
    }
    for (std::size_t k = 0; k < m; ++k) {
        lower = lower && w[k] <= wh[k];
        upper = upper && wh[k] <= w[k];
    }
    if (!lower && !upper)
        throw OrderError("decomposition evaluated at unordered arguments (x, w) = " + fmt_point(x) + fmt_point(w) +
                         ", (xh, wh) = " + fmt_point(xh) + fmt_point(wh));
    impl_->evaluate(x, w, xh, wh, lower, out);
}

Vector Decomposition::operator()(const Vector& x, const Vector& w, const Vector& xh, const Vector& wh) const
{
    Vector out(state_dim());
    evaluate(view(x), view(w), view(xh), view(wh), view(out));
    return out;
}

// ---------------------------------------------------------------- constructors

Decomposition tight_decomposition(FieldPtr s, const BoxOptimizerOptions& opts)
{
    auto impl = std::make_shared<TightEvaluator>(s, opts);
    return Decomposition(std::move(s), DecompMethod::Tight, std::move(impl),
                         {{"grid_points", std::to_string(opts.grid_points)},
                          {"tolerance", "1e-8"},
                          {"optimizer", "sign-probe corner / dense grid + coordinate descent"}});
}

BoxOptimizerStats tight_optimizer_stats()
{
    return {g_tight_corner.load(std::memory_order_relaxed), g_tight_search.load(std::memory_order_relaxed)};
}

Decomposition jacobian_sign_decomposition(FieldPtr s, const Box& domain, int samples, std::uint64_t seed)
{
    const int n = s->state_dim();
    const int m = s->disturbance_dim();
    const auto cols = static_cast<std::size_t>(n + m);
    const auto signs = sample_signs(*s, domain, samples, seed);
    std::vector<bool> use_hat(signs.size(), false);
    for (int i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& e = signs[static_cast<std::size_t>(i) * cols + c];
            if (!e.pos_witness.empty() && !e.neg_witness.empty())
                throw IndefiniteError("Jacobian entry " + entry_name(i, c, n) +
                                      " changes sign on the domain: positive at (x, w) = " +
                                      fmt_point(e.pos_witness) + ", negative at " + fmt_point(e.neg_witness));
            use_hat[static_cast<std::size_t>(i) * cols + c] = !e.neg_witness.empty();
        }
    }
    auto impl = std::make_shared<SignEvaluator>(s, std::move(use_hat));
    return Decomposition(std::move(s), DecompMethod::JacobianSign, std::move(impl),
                         {{"domain", domain_param(domain)}, {"samples", std::to_string(samples)},
                          {"seed", std::to_string(seed)}});
}

Decomposition monotone_decomposition(FieldPtr s, const Box& domain, int samples, std::uint64_t seed)
{
    const int n = s->state_dim();
    const int m = s->disturbance_dim();
    const auto cols = static_cast<std::size_t>(n + m);
    const auto signs = sample_signs(*s, domain, samples, seed);
    for (int i = 0; i < n; ++i)
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& e = signs[static_cast<std::size_t>(i) * cols + c];
            if (c != static_cast<std::size_t>(i) && !e.neg_witness.empty())
                throw MonotonicityError("system is not monotone: partial " + entry_name(i, c, n) +
                                        " is negative at (x, w) = " + fmt_point(e.neg_witness));
        }
    auto impl = std::make_shared<FieldEvaluator>(s);
    return Decomposition(std::move(s), DecompMethod::Monotone, std::move(impl),
                         {{"domain", domain_param(domain)}, {"samples", std::to_string(samples)},
                          {"seed", std::to_string(seed)}});
}

Decomposition combine(const Decomposition& d1, const Decomposition& d2)
{
    if (d1.source() != d2.source() && d1.source()->fingerprint() != d2.source()->fingerprint())
        throw MismatchError("combine: decompositions belong to different systems");
    auto impl = std::make_shared<CombinedEvaluator>(d1, d2);
    return Decomposition(d1.source(), DecompMethod::Combined, std::move(impl),
                         {{"first", to_string(d1.method())}, {"second", to_string(d2.method())}});
}

Decomposition closed_form_decomposition(FieldPtr s, std::vector<Expr> exprs)
{
    if (exprs.size() != static_cast<std::size_t>(s->state_dim()))
        throw DimensionError("closed-form decomposition needs " + std::to_string(s->state_dim()) +
                             " expressions, got " + std::to_string(exprs.size()));
    Decomposition::Params params;
    for (std::size_t i = 0; i < exprs.size(); ++i) {
        if (exprs[i].state_dim() > s->state_dim() || exprs[i].disturbance_dim() > s->disturbance_dim())
            throw DimensionError("closed-form expression " + std::to_string(i + 1) + " exceeds system dimensions");
        params.emplace_back("d" + std::to_string(i + 1), exprs[i].str());
    }
    auto impl = std::make_shared<ExprEvaluator>(std::move(exprs));
    return Decomposition(std::move(s), DecompMethod::ClosedForm, std::move(impl), std::move(params));
}

Decomposition closed_form_decomposition(FieldPtr s, const std::vector<std::string>& exprs)
{
    std::vector<Expr> parsed;
    parsed.reserve(exprs.size());
    for (const auto& e : exprs)
        parsed.push_back(Expr::parse_decomposition(e, s->state_dim(), s->disturbance_dim()));
    return closed_form_decomposition(std::move(s), std::move(parsed));
}

Decomposition build_decomposition(FieldPtr s, const DecompositionSpec& spec)
{
    switch (spec.method) {
    case DecompMethod::Tight: return tight_decomposition(std::move(s));
    case DecompMethod::JacobianSign:
    case DecompMethod::Monotone:
        if (!spec.domain)
            throw ConfigError(std::string(to_string(spec.method)) + " decomposition needs a sampling domain");
        return spec.method == DecompMethod::JacobianSign
                   ? jacobian_sign_decomposition(std::move(s), *spec.domain, spec.samples)
                   : monotone_decomposition(std::move(s), *spec.domain, spec.samples);
    case DecompMethod::ClosedForm: return closed_form_decomposition(std::move(s), spec.exprs);
    case DecompMethod::Combined: break;
    }
    throw ConfigError("combined decompositions are built with combine(), not from a spec");
}

// ---------------------------------------------------------------- checking

DecompositionReport check_decomposition(const Decomposition& d, const CheckOptions& opts)
{
    if (opts.probes < 1)
        throw ConfigError("check_decomposition needs at least one probe");
    const int n = d.state_dim();
    const int m = d.disturbance_dim();
    const Box W = opts.disturbance_box.value_or(d.source()->disturbance());
    if (opts.state_box.dim() != n || W.dim() != m)
        throw DimensionError("check_decomposition: probe boxes do not match (n, m)");

    DecompositionReport report;
    report.probes = opts.probes;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto un = static_cast<std::size_t>(n);
    const auto um = static_cast<std::size_t>(m);

    // Argument blocks: 0 = x, 1 = w, 2 = xh, 3 = wh.
    std::array<std::vector<double>, 4> args{std::vector<double>(un), std::vector<double>(um),
                                            std::vector<double>(un), std::vector<double>(um)};
    std::vector<double> out(un), up(un), down(un), field(un);

    auto eval_d = [&](std::vector<double>& dst) { d.evaluate(args[0], args[1], args[2], args[3], dst); };
    auto record = [&](int cond, std::string detail) {
        ++report.violations[cond];
        if (report.witnesses.size() < 10)
            report.witnesses.push_back({cond, std::move(detail), to_vector(args[0]), to_vector(args[1]),
                                        to_vector(args[2]), to_vector(args[3])});
    };

    for (int p = 0; p < opts.probes; ++p) {
        std::vector<double> a(un + um), b(un + um);
        for (std::size_t c = 0; c < un + um; ++c) {
            const double lo = c < un ? opts.state_box.lo()[static_cast<Eigen::Index>(c)] : W.lo()[static_cast<Eigen::Index>(c - un)];
            const double hi = c < un ? opts.state_box.hi()[static_cast<Eigen::Index>(c)] : W.hi()[static_cast<Eigen::Index>(c - un)];
            const double u = lo + unit(rng) * (hi - lo);
            const double v = lo + unit(rng) * (hi - lo);
            a[c] = std::min(u, v);
            b[c] = std::max(u, v);
        }
        const bool lower_side = unit(rng) < 0.5;
        const auto& first = lower_side ? a : b;
        const auto& second = lower_side ? b : a;
        std::copy_n(first.begin(), un, args[0].begin());
        std::copy_n(first.begin() + static_cast<std::ptrdiff_t>(un), um, args[1].begin());
        std::copy_n(second.begin(), un, args[2].begin());
        std::copy_n(second.begin() + static_cast<std::ptrdiff_t>(un), um, args[3].begin());

        // Condition 1 at the first argument.
        {
            const auto saved_xh = args[2];
            const auto saved_wh = args[3];
            args[2] = args[0];
            args[3] = args[1];
            eval_d(out);
            d.source()->evaluate(args[0], args[1], field);
            for (std::size_t i = 0; i < un; ++i)
                report.consistency_residual = std::max(report.consistency_residual, std::abs(out[i] - field[i]));
            args[2] = saved_xh;
            args[3] = saved_wh;
        }

        for (int block = 0; block < 4; ++block) {
            const bool hat = block >= 2;
            const bool state = block % 2 == 0;
            auto& vals = args[static_cast<std::size_t>(block)];
            const auto& partner = args[static_cast<std::size_t>(hat ? block - 2 : block + 2)];
            for (std::size_t j = 0; j < vals.size(); ++j) {
                const double base = vals[j];
                const double step = opts.h * std::max(1.0, std::abs(base));
                if (std::abs(base - partner[j]) < step) {
                    ++report.skipped;
                    continue;
                }
                vals[j] = base + step;
                eval_d(up);
                vals[j] = base - step;
                eval_d(down);
                vals[j] = base;
                for (std::size_t i = 0; i < un; ++i) {
                    const double g = (up[i] - down[i]) / (2.0 * step);
                    const std::string var = std::string(state ? "x" : "w") + (hat ? "h" : "") + std::to_string(j + 1);
                    const std::string what = "d" + std::to_string(i + 1) + "/d" + var + " = " + std::to_string(g);
                    if (!hat && state && i != j && g < -opts.slack)
                        record(2, what);
                    else if (hat && state && g > opts.slack)
                        record(3, what);
                    else if (!state && !hat && g < -opts.slack)
                        record(4, what);
                    else if (!state && hat && g > opts.slack)
                        record(4, what);
                }
            }
        }
    }
    return report;
}

} // namespace mmreach
