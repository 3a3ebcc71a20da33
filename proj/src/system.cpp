#include "mmreach/system.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/linalg.hpp"

#include <cstdio>
#include <sstream>

namespace mmreach {

namespace {

std::string format_vector(const Vector& v)
{
    std::string s = "[";
    char buf[40];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        s += (i ? "," : "") + std::string(buf);
    }
    return s + "]";
}

} // namespace

double VectorField::component(int i, std::span<const double> x, std::span<const double> w) const
{
    std::vector<double> out(static_cast<std::size_t>(state_dim()));
    evaluate(x, w, out);
    return out[static_cast<std::size_t>(i)];
}

Vector VectorField::operator()(const Vector& x, const Vector& w) const
{
    Vector out(state_dim());
    evaluate(view(x), view(w), view(out));
    return out;
}

Vector eval_field(const VectorField& s, const Vector& x, const Vector& w)
{
    if (x.size() != s.state_dim() || w.size() != s.disturbance_dim())
        throw DimensionError("eval_field: expected (" + std::to_string(s.state_dim()) + ", " +
                             std::to_string(s.disturbance_dim()) + ") got (" + std::to_string(x.size()) + ", " +
                             std::to_string(w.size()) + ")");
    return s(x, w);
}

// ---------------------------------------------------------------- SystemDef

SystemDef::SystemDef(int n, int m, std::vector<Expr> field, Box disturbance, std::string note)
    : n_(n), m_(m), field_(std::move(field)), disturbance_(std::move(disturbance)), note_(std::move(note))
{
    if (n < 1 || m < 0)
        throw DimensionError("system needs n >= 1 and m >= 0");
    if (field_.size() != static_cast<std::size_t>(n))
        throw DimensionError("system with n = " + std::to_string(n) + " needs " + std::to_string(n) +
                             " field expressions, got " + std::to_string(field_.size()));
    if (disturbance_.dim() != m)
        throw DimensionError("disturbance box has dimension " + std::to_string(disturbance_.dim()) +
                             " but m = " + std::to_string(m));
    for (std::size_t i = 0; i < field_.size(); ++i)
        if (field_[i].state_dim() > n || field_[i].disturbance_dim() > m)
            throw DimensionError("field expression " + std::to_string(i + 1) + " exceeds declared dimensions");
}

SystemDef SystemDef::from_strings(int n, int m, const std::vector<std::string>& field, Box disturbance,
                                  std::string note)
{
    std::vector<Expr> exprs;
    exprs.reserve(field.size());
    for (const auto& f : field)
        exprs.push_back(Expr::parse(f, n, m));
    return SystemDef(n, m, std::move(exprs), std::move(disturbance), std::move(note));
}

void SystemDef::evaluate(std::span<const double> x, std::span<const double> w, std::span<double> out) const
{
    for (std::size_t i = 0; i < field_.size(); ++i)
        out[i] = field_[i].eval(x, w);
}

double SystemDef::component(int i, std::span<const double> x, std::span<const double> w) const
{
    return field_[static_cast<std::size_t>(i)].eval(x, w);
}

std::string SystemDef::fingerprint() const
{
    std::ostringstream os;
    os << "system(n=" << n_ << ",m=" << m_ << ";";
    for (const auto& f : field_)
        os << f.str() << ";";
    os << "W=" << format_vector(disturbance_.lo()) << format_vector(disturbance_.hi()) << ")";
    return os.str();
}

// ---------------------------------------------------------------- TransformedSystem

TransformedSystem::TransformedSystem(std::shared_ptr<const SystemDef> base, Matrix shape)
    : base_(std::move(base)), shape_(std::move(shape)), inverse_(checked_inverse(shape_))
{
    if (shape_.rows() != base_->state_dim())
        throw DimensionError("shape matrix is " + std::to_string(shape_.rows()) + "x" +
                             std::to_string(shape_.cols()) + " for a system with n = " +
                             std::to_string(base_->state_dim()));
}

void TransformedSystem::evaluate(std::span<const double> y, std::span<const double> w, std::span<double> out) const
{
    const auto n = shape_.rows();
    // Stack buffers; the field is evaluated millions of times inside the tight
    // decomposition optimizer.
    double xs[16];
    double fs[16];
    std::vector<double> xh;
    std::vector<double> fh;
    double* x = xs;
    double* f = fs;
    if (n > 16) {
        xh.resize(static_cast<std::size_t>(n));
        fh.resize(static_cast<std::size_t>(n));
        x = xh.data();
        f = fh.data();
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c)
            acc += shape_(r, c) * y[static_cast<std::size_t>(c)];
        x[r] = acc;
    }
    base_->evaluate({x, static_cast<std::size_t>(n)}, w, {f, static_cast<std::size_t>(n)});
    for (Eigen::Index r = 0; r < n; ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c)
            acc += inverse_(r, c) * f[c];
        out[static_cast<std::size_t>(r)] = acc;
    }
}

std::string TransformedSystem::fingerprint() const
{
    std::ostringstream os;
    os << "transform(T=";
    for (Eigen::Index r = 0; r < shape_.rows(); ++r)
        os << format_vector(shape_.row(r).transpose());
    os << ";" << base_->fingerprint() << ")";
    return os.str();
}

TransformedSystem transform(const SystemDef& s, const Matrix& shape)
{
    return TransformedSystem(std::make_shared<const SystemDef>(s), shape);
}

TransformedSystem transform(std::shared_ptr<const SystemDef> s, const Matrix& shape)
{
    return TransformedSystem(std::move(s), shape);
}

SystemDef reverse_time(const SystemDef& s)
{
    std::vector<Expr> neg;
    neg.reserve(s.field().size());
    for (const auto& f : s.field())
        neg.push_back(f.negated());
    return SystemDef(s.state_dim(), s.disturbance_dim(), std::move(neg), s.disturbance(), s.note());
}

TransformedSystem reverse_time(const TransformedSystem& s)
{
    return TransformedSystem(std::make_shared<const SystemDef>(reverse_time(s.base())), s.shape());
}

} // namespace mmreach
