#include "mmreach/config.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/linalg.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace mmreach {

using nlohmann::json;

const char* to_string(InitialKind k) noexcept
{
    switch (k) {
    case InitialKind::Box: return "box";
    case InitialKind::Parallelotope: return "parallelotope";
    case InitialKind::Vertices: return "vertices";
    case InitialKind::Union: return "union";
    }
    return "?";
}

std::vector<Vector> InitialSetConfig::vertex_list() const
{
    switch (kind) {
    case InitialKind::Box: return vertices(Parallelotope(Matrix::Identity(box->dim(), box->dim()), *box));
    case InitialKind::Parallelotope: return vertices(*parallelotope);
    case InitialKind::Vertices: return points;
    case InitialKind::Union: break;
    }
    std::vector<Vector> out;
    for (const auto& p : union_set.members)
        for (auto& v : vertices(p))
            out.push_back(std::move(v));
    return out;
}

InitialSet InitialSetConfig::sampling_set() const
{
    switch (kind) {
    case InitialKind::Box: return *box;
    case InitialKind::Parallelotope: return *parallelotope;
    case InitialKind::Union: return union_set;
    case InitialKind::Vertices: break;
    }
    if (points.front().size() != 2)
        throw ConfigError("sampling a vertex polytope is only supported in the plane");
    std::vector<Point2> pts;
    for (const auto& p : points)
        pts.emplace_back(p[0], p[1]);
    return convex_hull(pts);
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        fail(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key))
            fail(where, "unknown key '" + key + "'");
}

const json& require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key))
        fail(where, std::string("missing required key '") + key + "'");
    return obj.at(key);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

std::string idx(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

int parse_count(const json& v, const std::string& where, int min)
{
    if (!v.is_number_integer())
        fail(where, "expected an integer");
    const auto x = v.get<long long>();
    if (x < min)
        fail(where, "must be >= " + std::to_string(min));
    return static_cast<int>(x);
}

Vector parse_vector(const json& v, const std::string& where, Eigen::Index expected = -1)
{
    if (!v.is_array())
        fail(where, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = parse_scalar(v[i], idx(where, i));
    if (expected >= 0 && out.size() != expected)
        throw DimensionError(where + ": expected " + std::to_string(expected) + " entries, got " +
                             std::to_string(out.size()));
    return out;
}

Matrix parse_matrix(const json& v, const std::string& where, Eigen::Index n)
{
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != n)
        throw DimensionError(where + ": expected " + std::to_string(n) + " rows");
    Matrix t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        t.row(i) = parse_vector(v[static_cast<std::size_t>(i)], idx(where, static_cast<std::size_t>(i)), n);
    if (!is_well_conditioned(t))
        throw GeometryError(where + ": shape matrix is singular or ill-conditioned (|det| <= 1e-12 or condition "
                                    "> 1e12)");
    return t;
}

Box parse_box(const json& v, const std::string& where, Eigen::Index dim)
{
    check_keys(v, where, {"lo", "hi"});
    Vector lo = parse_vector(require(v, "lo", where), join(where, "lo"), dim);
    Vector hi = parse_vector(require(v, "hi", where), join(where, "hi"), dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        if (!(lo[j] <= hi[j]))
            fail(where, "lo exceeds hi in entry " + std::to_string(j));
    return Box(std::move(lo), std::move(hi));
}

Parallelotope parse_parallelotope(const json& v, const std::string& where, Eigen::Index n)
{
    check_keys(v, where, {"type", "shape", "lo", "hi"});
    Matrix t = parse_matrix(require(v, "shape", where), join(where, "shape"), n);
    json coords = {{"lo", require(v, "lo", where)}, {"hi", require(v, "hi", where)}};
    return Parallelotope(std::move(t), parse_box(coords, where, n));
}

std::shared_ptr<const SystemDef> parse_system(const json& v, const std::string& where)
{
    check_keys(v, where, {"n", "m", "field", "disturbance", "note"});
    const int n = parse_count(require(v, "n", where), join(where, "n"), 1);
    const int m = parse_count(require(v, "m", where), join(where, "m"), 0);
    const json& field = require(v, "field", where);
    const std::string fwhere = join(where, "field");
    if (!field.is_array() || static_cast<int>(field.size()) != n)
        throw DimensionError(fwhere + ": expected " + std::to_string(n) + " expressions");
    std::vector<Expr> exprs;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!field[i].is_string())
            fail(idx(fwhere, i), "expected an expression string");
        try {
            exprs.push_back(Expr::parse(field[i].get<std::string>(), n, m));
        } catch (const ParseError& e) {
            throw ExpressionError(idx(fwhere, i) + " (F" + std::to_string(i + 1) + "): " + e.what());
        }
    }
    const Box w = parse_box(require(v, "disturbance", where), join(where, "disturbance"), m);
    std::string note = v.contains("note") ? v.at("note").get<std::string>() : std::string();
    return std::make_shared<const SystemDef>(n, m, std::move(exprs), w, std::move(note));
}

InitialSetConfig parse_initial(const json& v, const std::string& where, Eigen::Index n)
{
    if (!v.is_object())
        fail(where, "expected an object");
    const std::string type = require(v, "type", where).get<std::string>();
    InitialSetConfig out;
    if (type == "box") {
        check_keys(v, where, {"type", "lo", "hi"});
        out.kind = InitialKind::Box;
        out.box = parse_box(json{{"lo", require(v, "lo", where)}, {"hi", require(v, "hi", where)}}, where, n);
    } else if (type == "parallelotope") {
        out.kind = InitialKind::Parallelotope;
        out.parallelotope = parse_parallelotope(v, where, n);
    } else if (type == "vertices") {
        check_keys(v, where, {"type", "points"});
        out.kind = InitialKind::Vertices;
        const json& pts = require(v, "points", where);
        if (!pts.is_array() || pts.empty())
            fail(join(where, "points"), "expected a nonempty array of points");
        for (std::size_t i = 0; i < pts.size(); ++i)
            out.points.push_back(parse_vector(pts[i], idx(join(where, "points"), i), n));
    } else if (type == "union") {
        check_keys(v, where, {"type", "members"});
        out.kind = InitialKind::Union;
        const json& members = require(v, "members", where);
        if (!members.is_array() || members.empty())
            fail(join(where, "members"), "expected a nonempty array of parallelotopes");
        for (std::size_t i = 0; i < members.size(); ++i)
            out.union_set.members.push_back(parse_parallelotope(members[i], idx(join(where, "members"), i), n));
    } else {
        fail(join(where, "type"), "unknown initial set type '" + type + "' (expected box | parallelotope | "
                                  "vertices | union)");
    }
    return out;
}

DecompositionSpec parse_decomposition(const json& v, const std::string& where, const SystemDef& s)
{
    check_keys(v, where, {"method", "domain", "samples", "exprs"});
    DecompositionSpec spec;
    const std::string method = v.value("method", std::string("tight"));
    try {
        spec.method = decomp_method_from_string(method);
    } catch (const Error& e) {
        fail(join(where, "method"), e.what());
    }
    if (spec.method == DecompMethod::Combined)
        fail(join(where, "method"), "'combined' is not configurable; it is built from other decompositions");
    if (v.contains("domain"))
        spec.domain = parse_box(v.at("domain"), join(where, "domain"), s.state_dim());
    if (v.contains("samples"))
        spec.samples = parse_count(v.at("samples"), join(where, "samples"), 1);
    if ((spec.method == DecompMethod::JacobianSign || spec.method == DecompMethod::Monotone) && !spec.domain)
        fail(where, "method '" + method + "' needs a sampling 'domain'");
    if (spec.method == DecompMethod::ClosedForm) {
        const json& exprs = require(v, "exprs", where);
        const std::string ew = join(where, "exprs");
        if (!exprs.is_array() || static_cast<int>(exprs.size()) != s.state_dim())
            throw DimensionError(ew + ": expected " + std::to_string(s.state_dim()) + " expressions");
        for (std::size_t i = 0; i < exprs.size(); ++i) {
            const std::string src = exprs[i].get<std::string>();
            try {
                Expr::parse_decomposition(src, s.state_dim(), s.disturbance_dim());
            } catch (const ParseError& e) {
                throw ExpressionError(idx(ew, i) + " (d" + std::to_string(i + 1) + "): " + e.what());
            }
            spec.exprs.push_back(src);
        }
    } else if (v.contains("exprs")) {
        fail(join(where, "exprs"), "only the closed_form method takes expressions");
    }
    return spec;
}

Direction parse_direction(const json& v, const std::string& where)
{
    const std::string d = v.get<std::string>();
    if (d == "forward")
        return Direction::Forward;
    if (d == "backward")
        return Direction::Backward;
    fail(where, "expected 'forward' or 'backward', got '" + d + "'");
}

} // namespace

double parse_scalar(const json& v, const std::string& where)
{
    double x;
    if (v.is_number()) {
        x = v.get<double>();
    } else if (v.is_string()) {
        try {
            x = Expr::parse(v.get<std::string>(), 0, 0).eval({}, {});
        } catch (const ParseError& e) {
            throw ExpressionError(where + ": " + e.what());
        } catch (const NumericError& e) {
            throw ExpressionError(where + ": " + e.what());
        }
    } else {
        fail(where, "expected a number or a constant expression string");
    }
    if (!std::isfinite(x))
        fail(where, "value is not finite");
    return x;
}

ProblemConfig parse_config(const json& doc, const std::string& fallback_name)
{
    check_keys(doc, "config", {"name", "system", "initial_set", "horizon", "dt", "direction", "decomposition",
                               "transforms", "sampling", "witness_search", "output"});
    ProblemConfig cfg;
    cfg.name = doc.value("name", fallback_name);
    cfg.system = parse_system(require(doc, "system", "config"), "system");
    const int n = cfg.system->state_dim();
    cfg.initial = parse_initial(require(doc, "initial_set", "config"), "initial_set", n);

    if (doc.contains("horizon"))
        cfg.spec.horizon = parse_scalar(doc.at("horizon"), "horizon");
    if (doc.contains("dt"))
        cfg.spec.dt = parse_scalar(doc.at("dt"), "dt");
    if (doc.contains("direction"))
        cfg.spec.direction = parse_direction(doc.at("direction"), "direction");
    try {
        cfg.spec.validate();
    } catch (const ConfigError& e) {
        fail("horizon/dt", e.what());
    }

    if (doc.contains("decomposition"))
        cfg.decomp = parse_decomposition(doc.at("decomposition"), "decomposition", *cfg.system);

    if (doc.contains("transforms")) {
        const json& t = doc.at("transforms");
        check_keys(t, "transforms", {"family", "count", "matrices", "decompositions"});
        std::vector<Matrix> shapes;
        if (t.contains("family")) {
            if (t.contains("matrices"))
                fail("transforms", "give either 'family' or 'matrices', not both");
            cfg.plan_family = t.at("family").get<std::string>();
            if (cfg.plan_family != "rotations")
                fail("transforms.family", "unknown family '" + cfg.plan_family + "' (expected rotations)");
            if (n != 2)
                throw DimensionError("transforms.family: the rotation family is planar (n = 2)");
            shapes = default_transform_family(parse_count(require(t, "count", "transforms"), "transforms.count", 1));
        } else {
            const json& ms = require(t, "matrices", "transforms");
            if (!ms.is_array() || ms.empty())
                fail("transforms.matrices", "expected a nonempty array of matrices");
            for (std::size_t k = 0; k < ms.size(); ++k)
                shapes.push_back(parse_matrix(ms[k], idx("transforms.matrices", k), n));
        }
        cfg.plan = TransformPlan::from_shapes(shapes, cfg.spec);
        for (auto& e : cfg.plan->entries)
            e.decomp = cfg.decomp;
        if (t.contains("decompositions")) {
            const json& ds = t.at("decompositions");
            if (!ds.is_array() || ds.size() != shapes.size())
                throw DimensionError("transforms.decompositions: expected one entry per transform");
            for (std::size_t k = 0; k < ds.size(); ++k)
                cfg.plan->entries[k].decomp =
                    parse_decomposition(ds[k], idx("transforms.decompositions", k), *cfg.system);
        }
        if (cfg.initial.kind == InitialKind::Union)
            fail("transforms", "a transform plan needs a single initial set, not a union");
    } else if (cfg.initial.kind == InitialKind::Vertices) {
        fail("initial_set", "a vertex polytope needs a 'transforms' plan to fit parallelotopes around it");
    }

    if (doc.contains("sampling")) {
        const json& s = doc.at("sampling");
        check_keys(s, "sampling", {"count", "seed", "switch_count", "init_mode", "threads", "occupancy_cell"});
        if (s.contains("count"))
            cfg.sampling.count = parse_count(s.at("count"), "sampling.count", 1);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned())
                fail("sampling.seed", "expected a nonnegative integer");
            cfg.sampling.seed = s.at("seed").get<std::uint64_t>();
        }
        if (s.contains("switch_count"))
            cfg.sampling.switch_count = parse_count(s.at("switch_count"), "sampling.switch_count", 0);
        if (s.contains("init_mode")) {
            try {
                cfg.sampling.init_mode = init_mode_from_string(s.at("init_mode").get<std::string>());
            } catch (const ConfigError& e) {
                fail("sampling.init_mode", e.what());
            }
        }
        if (s.contains("threads"))
            cfg.sampling.threads = parse_count(s.at("threads"), "sampling.threads", 0);
        if (s.contains("occupancy_cell")) {
            const double cell = parse_scalar(s.at("occupancy_cell"), "sampling.occupancy_cell");
            if (!(cell > 0.0))
                fail("sampling.occupancy_cell", "must be positive");
            if (n != 2)
                throw DimensionError("sampling.occupancy_cell: occupancy areas are planar (n = 2)");
            cfg.occupancy_cell = cell;
        }
    }
    if (doc.contains("witness_search"))
        cfg.witness_search = parse_box(doc.at("witness_search"), "witness_search", n);
    if (doc.contains("output")) {
        check_keys(doc.at("output"), "output", {"dir"});
        cfg.output_dir = doc.at("output").value("dir", std::string("out"));
    }
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed JSON: " + e.what());
    }
    try {
        return parse_config(doc, path.stem().string());
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace mmreach
