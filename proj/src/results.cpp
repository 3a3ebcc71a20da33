#include "mmreach/results.hpp"

#include "mmreach/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace mmreach {

using nlohmann::json;

namespace {

json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        rows.push_back(vec(m.row(i).transpose()));
    return rows;
}

std::string g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json decomp_json(const DecompositionSpec& d)
{
    json j = {{"method", to_string(d.method)}};
    if (d.domain)
        j["domain"] = to_json(*d.domain);
    if (d.method == DecompMethod::JacobianSign || d.method == DecompMethod::Monotone)
        j["samples"] = d.samples;
    if (!d.exprs.empty())
        j["exprs"] = d.exprs;
    return j;
}

json initial_json(const InitialSetConfig& s)
{
    json j = {{"type", to_string(s.kind)}};
    switch (s.kind) {
    case InitialKind::Box: j.update(to_json(*s.box)); break;
    case InitialKind::Parallelotope: j.update(to_json(*s.parallelotope)); break;
    case InitialKind::Vertices:
        j["points"] = json::array();
        for (const auto& p : s.points)
            j["points"].push_back(vec(p));
        break;
    case InitialKind::Union:
        j["members"] = json::array();
        for (const auto& p : s.union_set.members)
            j["members"].push_back(to_json(p));
        break;
    }
    return j;
}

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw ConfigError("result schema: " + where + ": " + what);
}

void need(const json& j, const char* key, const std::string& where, json::value_t type)
{
    if (!j.contains(key))
        bad(where, std::string("missing '") + key + "'");
    const auto& v = j.at(key);
    bool ok = v.type() == type;
    if (type == json::value_t::number_float)
        ok = v.is_number();
    else if (type == json::value_t::number_unsigned)
        ok = v.is_number_integer() && v.get<long long>() >= 0;
    if (!ok)
        bad(where + "." + key, "wrong type");
}

void check_numbers(const json& arr, const std::string& where, std::size_t expected)
{
    if (!arr.is_array() || (expected && arr.size() != expected))
        bad(where, "expected an array of " + std::to_string(expected) + " numbers");
    for (const auto& x : arr)
        if (!x.is_number())
            bad(where, "non-numeric entry");
}

void check_box(const json& b, const std::string& where, std::size_t n)
{
    if (!b.is_object())
        bad(where, "expected an object");
    need(b, "lo", where, json::value_t::array);
    need(b, "hi", where, json::value_t::array);
    check_numbers(b.at("lo"), where + ".lo", n);
    check_numbers(b.at("hi"), where + ".hi", n);
    for (std::size_t i = 0; i < n; ++i)
        if (b.at("lo")[i].get<double>() > b.at("hi")[i].get<double>())
            bad(where, "lo > hi");
}

} // namespace

json to_json(const Box& b) { return {{"lo", vec(b.lo())}, {"hi", vec(b.hi())}}; }

json to_json(const Parallelotope& p)
{
    return {{"shape", mat(p.shape())}, {"lo", vec(p.coords().lo())}, {"hi", vec(p.coords().hi())}};
}

json to_json(const Polygon2D& p)
{
    json pts = json::array();
    for (const auto& v : p.vertices())
        pts.push_back({v.x(), v.y()});
    return pts;
}

json to_json(const ContainmentReport& r)
{
    json w = json::array();
    for (const auto& x : r.witnesses)
        w.push_back(vec(x));
    return {{"total", r.total}, {"violations", r.violations}, {"worst_margin", r.worst_margin}, {"witnesses", w}};
}

std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json result_json(const ProblemConfig& cfg, const ReachOutcome& r)
{
    const SystemDef& s = *cfg.system;
    json field = json::array();
    for (const auto& e : s.field())
        field.push_back(e.str());

    json method = {{"pipeline", to_string(r.pipeline)},
                   {"direction", to_string(r.direction)},
                   {"horizon", cfg.spec.horizon},
                   {"dt", cfg.spec.dt},
                   {"integrator", "rk4"},
                   {"decomposition", decomp_json(cfg.decomp)}};
    if (cfg.plan) {
        json plan = json::array();
        for (const auto& e : cfg.plan->entries)
            plan.push_back({{"shape", mat(e.shape)}, {"decomposition", decomp_json(e.decomp)}});
        method["transforms"] = plan;
        if (!cfg.plan_family.empty())
            method["transform_family"] = cfg.plan_family;
    }

    json doc = {
        {"meta", {{"tool", "mmreach"}, {"schema", kResultSchemaVersion}, {"name", cfg.name}, {"timestamp", utc_timestamp()}}},
        {"system",
         {{"n", s.state_dim()}, {"m", s.disturbance_dim()}, {"field", field}, {"disturbance", to_json(s.disturbance())}}},
        {"initial_set", initial_json(cfg.initial)},
        {"method", method},
        {"boxes", json::array()},
        {"parallelotopes", json::array()},
    };
    for (const auto& b : r.boxes)
        doc["boxes"].push_back(to_json(b));
    for (const auto& p : r.parallelotopes)
        doc["parallelotopes"].push_back(to_json(p));
    if (r.polygon)
        doc["intersection_polygon"] = to_json(*r.polygon);
    if (!r.area_curve.empty()) {
        doc["area_curve"] = json::array();
        for (std::size_t k = 0; k < r.area_curve.size(); ++k)
            doc["area_curve"].push_back({{"k", k + 1}, {"area", r.area_curve[k]}});
    }
    if (r.volume)
        doc["volume"] = {{"value", r.volume->value},
                         {"ci95", {r.volume->ci_low, r.volume->ci_high}},
                         {"samples", r.volume->samples}};
    return doc;
}

void validate_result(const json& doc)
{
    if (!doc.is_object())
        bad("$", "expected an object");
    for (const auto& [key, _] : doc.items()) {
        static const char* known[] = {"meta",   "system",         "initial_set",          "method",     "boxes",
                                      "parallelotopes", "intersection_polygon", "area_curve", "volume", "reports"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            bad("$", "unknown key '" + key + "'");
    }
    need(doc, "meta", "$", json::value_t::object);
    need(doc.at("meta"), "timestamp", "meta", json::value_t::string);
    need(doc.at("meta"), "name", "meta", json::value_t::string);
    need(doc, "system", "$", json::value_t::object);
    const json& sys = doc.at("system");
    need(sys, "n", "system", json::value_t::number_unsigned);
    need(sys, "m", "system", json::value_t::number_unsigned);
    need(sys, "field", "system", json::value_t::array);
    const auto n = sys.at("n").get<std::size_t>();
    const auto m = sys.at("m").get<std::size_t>();
    if (sys.at("field").size() != n)
        bad("system.field", "expected n expressions");
    check_box(sys.at("disturbance"), "system.disturbance", m);
    need(doc, "initial_set", "$", json::value_t::object);
    need(doc.at("initial_set"), "type", "initial_set", json::value_t::string);
    need(doc, "method", "$", json::value_t::object);
    need(doc.at("method"), "pipeline", "method", json::value_t::string);
    need(doc.at("method"), "horizon", "method", json::value_t::number_float);
    need(doc.at("method"), "dt", "method", json::value_t::number_float);
    need(doc, "boxes", "$", json::value_t::array);
    need(doc, "parallelotopes", "$", json::value_t::array);
    for (std::size_t i = 0; i < doc.at("boxes").size(); ++i)
        check_box(doc.at("boxes")[i], "boxes[" + std::to_string(i) + "]", n);
    for (std::size_t i = 0; i < doc.at("parallelotopes").size(); ++i) {
        const std::string where = "parallelotopes[" + std::to_string(i) + "]";
        const json& p = doc.at("parallelotopes")[i];
        check_box(p, where, n);
        need(p, "shape", where, json::value_t::array);
        if (p.at("shape").size() != n)
            bad(where + ".shape", "expected n rows");
        for (std::size_t r = 0; r < n; ++r)
            check_numbers(p.at("shape")[r], where + ".shape[" + std::to_string(r) + "]", n);
    }
    if (doc.at("boxes").empty() && doc.at("parallelotopes").empty())
        bad("$", "result holds neither boxes nor parallelotopes");
    if (doc.contains("intersection_polygon")) {
        const json& poly = doc.at("intersection_polygon");
        if (!poly.is_array() || poly.size() < 3)
            bad("intersection_polygon", "expected at least 3 vertices");
        for (std::size_t i = 0; i < poly.size(); ++i)
            check_numbers(poly[i], "intersection_polygon[" + std::to_string(i) + "]", 2);
    }
    if (doc.contains("area_curve")) {
        const json& c = doc.at("area_curve");
        if (!c.is_array())
            bad("area_curve", "expected an array");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string where = "area_curve[" + std::to_string(i) + "]";
            need(c[i], "k", where, json::value_t::number_unsigned);
            need(c[i], "area", where, json::value_t::number_float);
            if (c[i].at("k").get<std::size_t>() != i + 1)
                bad(where + ".k", "expected consecutive transform counts from 1");
        }
    }
    if (doc.contains("reports")) {
        const json& reps = doc.at("reports");
        if (!reps.is_array())
            bad("reports", "expected an array");
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const std::string where = "reports[" + std::to_string(i) + "]";
            need(reps[i], "region", where, json::value_t::string);
            need(reps[i], "total", where, json::value_t::number_unsigned);
            need(reps[i], "violations", where, json::value_t::number_unsigned);
            if (reps[i].at("violations").get<long>() > reps[i].at("total").get<long>())
                bad(where, "more violations than samples");
        }
    }
}

void write_area_curve_csv(std::ostream& os, const std::vector<double>& curve)
{
    os << "k,area\n";
    for (std::size_t k = 0; k < curve.size(); ++k)
        os << k + 1 << "," << g17(curve[k]) << "\n";
}

void write_polygon(std::ostream& os, const Polygon2D& p)
{
    for (const auto& v : p.vertices())
        os << g17(v.x()) << " " << g17(v.y()) << "\n";
}

void write_points_csv(std::ostream& os, const std::vector<Vector>& pts)
{
    const auto n = pts.empty() ? 0 : pts.front().size();
    for (Eigen::Index j = 0; j < n; ++j)
        os << (j ? ",x" : "x") << j + 1;
    os << "\n";
    for (const auto& p : pts) {
        for (Eigen::Index j = 0; j < n; ++j)
            os << (j ? "," : "") << g17(p[j]);
        os << "\n";
    }
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

} // namespace mmreach
