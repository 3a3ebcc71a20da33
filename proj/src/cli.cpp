#include "mmreach/cli.hpp"

#include "mmreach/config.hpp"
#include "mmreach/errors.hpp"
#include "mmreach/pipeline.hpp"
#include "mmreach/results.hpp"

#include <cstdio>
#include <functional>
#include <sstream>

namespace mmreach {

using nlohmann::json;

namespace {

ProblemConfig load_with_overrides(const CliOptions& opts)
{
    ProblemConfig cfg = load_config(opts.config);
    if (opts.dt) {
        cfg.spec.dt = *opts.dt;
        try {
            cfg.spec.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("--dt: ") + e.what());
        }
        if (cfg.plan)
            cfg.plan->spec = cfg.spec;
    }
    if (opts.seed)
        cfg.sampling.seed = *opts.seed;
    if (opts.out)
        cfg.output_dir = *opts.out;
    return cfg;
}

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string fmt(const Vector& v)
{
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + num(v[i]);
    return s + ")";
}

template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const Error& e) {
        err << "error [" << e.kind() << "]: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

void print_outcome(std::ostream& out, const ReachOutcome& r)
{
    for (const auto& b : r.boxes)
        out << "box: lo = " << fmt(b.lo()) << ", hi = " << fmt(b.hi()) << ", volume = " << num(b.volume()) << "\n";
    for (std::size_t k = 0; k < r.parallelotopes.size(); ++k) {
        const auto& p = r.parallelotopes[k];
        out << "parallelotope " << k + 1 << ": coords lo = " << fmt(p.coords().lo())
            << ", hi = " << fmt(p.coords().hi()) << ", volume = " << num(p.volume()) << "\n";
    }
    for (std::size_t k = 0; k < r.area_curve.size(); ++k)
        out << "area after " << k + 1 << " transform" << (k ? "s" : "") << ": " << num(r.area_curve[k]) << "\n";
    if (r.volume)
        out << "intersection volume ~ " << num(r.volume->value) << " (95% CI " << num(r.volume->ci_low) << " .. "
            << num(r.volume->ci_high) << ")\n";
}

std::string str(const std::function<void(std::ostream&)>& f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

void write_outputs(const ProblemConfig& cfg, const ReachOutcome& r, const json& doc, const std::string& suffix,
                   std::ostream& out, bool quiet)
{
    const auto dir = cfg.output_dir;
    const auto path = dir / (cfg.name + suffix + ".json");
    write_file(path, doc.dump(2) + "\n");
    std::vector<std::filesystem::path> written{path};
    if (!r.area_curve.empty()) {
        const auto p = dir / (cfg.name + "_area_curve.csv");
        write_file(p, str([&](std::ostream& os) { write_area_curve_csv(os, r.area_curve); }));
        written.push_back(p);
    }
    if (cfg.system->state_dim() == 2) {
        for (std::size_t k = 0; k < r.boxes.size(); ++k) {
            const auto p = dir / (cfg.name + "_box" + std::to_string(k + 1) + ".txt");
            const Parallelotope as_ptope(Matrix::Identity(2, 2), r.boxes[k]);
            write_file(p, str([&](std::ostream& os) { write_polygon(os, to_polygon(as_ptope)); }));
            written.push_back(p);
        }
        for (std::size_t k = 0; k < r.parallelotopes.size(); ++k) {
            const auto p = dir / (cfg.name + "_parallelotope" + std::to_string(k + 1) + ".txt");
            write_file(p, str([&](std::ostream& os) { write_polygon(os, to_polygon(r.parallelotopes[k])); }));
            written.push_back(p);
        }
        if (r.polygon) {
            const auto p = dir / (cfg.name + "_intersection.txt");
            write_file(p, str([&](std::ostream& os) { write_polygon(os, *r.polygon); }));
            written.push_back(p);
        }
    }
    if (!quiet)
        for (const auto& p : written)
            out << "wrote " << p.string() << "\n";
}

} // namespace

int cmd_check(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ProblemConfig cfg = load_with_overrides(opts);
        if (!opts.quiet)
            out << "ok: " << cfg.name << ": n = " << cfg.system->state_dim() << ", m = " << cfg.system->disturbance_dim()
                << ", pipeline = " << to_string(pipeline_for(cfg)) << ", direction = "
                << to_string(cfg.spec.direction) << ", decomposition = " << to_string(cfg.decomp.method) << "\n";
        return static_cast<int>(kExitOk);
    });
}

int cmd_reach(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ProblemConfig cfg = load_with_overrides(opts);
        const ReachOutcome r = run_reach(cfg);
        const json doc = result_json(cfg, r);
        validate_result(doc);
        if (!opts.quiet)
            print_outcome(out, r);
        write_outputs(cfg, r, doc, "", out, opts.quiet);
        return static_cast<int>(kExitOk);
    });
}

int cmd_verify(const CliOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (!(opts.debug_scale > 0.0))
            throw ConfigError("--debug-scale must be positive");
        const ProblemConfig cfg = load_with_overrides(opts);
        const ReachOutcome r = run_reach(cfg);
        json doc = result_json(cfg, r);

        std::vector<Vector> points;
        json sampling = {{"count", cfg.sampling.count},
                         {"seed", cfg.sampling.seed},
                         {"switch_count", cfg.sampling.switch_count},
                         {"init_mode", to_string(cfg.sampling.init_mode)}};
        std::string points_name;
        if (cfg.spec.direction == Direction::Forward) {
            auto res = sample_endpoints(*cfg.system, cfg.initial.sampling_set(), cfg.spec, cfg.sampling);
            sampling["divergent"] = res.divergent;
            points = std::move(res.endpoints);
            points_name = "_endpoints.csv";
            if (cfg.occupancy_cell) {
                sampling["occupancy_cell"] = *cfg.occupancy_cell;
                sampling["occupancy_area"] = occupancy_area(points, *cfg.occupancy_cell);
            }
        } else {
            if (!cfg.witness_search)
                throw ConfigError("backward verification needs a 'witness_search' box");
            Parallelotope target = cfg.initial.kind == InitialKind::Parallelotope
                                       ? *cfg.initial.parallelotope
                                       : cfg.initial.kind == InitialKind::Box
                                             ? Parallelotope(Matrix::Identity(cfg.initial.box->dim(),
                                                                              cfg.initial.box->dim()),
                                                             *cfg.initial.box)
                                             : throw ConfigError("backward verification supports box and "
                                                                 "parallelotope initial sets only");
            auto res = backward_witnesses(*cfg.system, target, cfg.spec, cfg.sampling, *cfg.witness_search);
            sampling["candidates"] = res.candidates;
            sampling["divergent"] = res.divergent;
            sampling["witnesses"] = res.points.size();
            if (!res.warning.empty()) {
                sampling["warning"] = res.warning;
                err << "warning: " << res.warning << "\n";
            }
            points = std::move(res.points);
            points_name = "_witnesses.csv";
        }

        long violations = 0;
        doc["reports"] = json::array();
        for (const auto& [label, region] : r.audit_regions(opts.debug_scale)) {
            const ContainmentReport rep = audit_containment(points, region);
            json j = to_json(rep);
            j["region"] = label;
            j["sampling"] = sampling;
            doc["reports"].push_back(j);
            violations += rep.violations;
            if (!opts.quiet)
                out << label << ": " << rep.total << " points, " << rep.violations << " violations, worst margin "
                    << num(rep.worst_margin) << "\n";
        }
        if (!opts.quiet && sampling.contains("occupancy_area"))
            out << "occupancy area (cell " << num(*cfg.occupancy_cell)
                << "): " << num(sampling["occupancy_area"].get<double>()) << "\n";
        validate_result(doc);
        write_outputs(cfg, r, doc, "_verify", out, opts.quiet);
        write_file(cfg.output_dir / (cfg.name + points_name),
                   str([&](std::ostream& os) { write_points_csv(os, points); }));
        if (violations > 0) {
            err << "soundness violation: " << violations << " sampled points fall outside the computed sets\n";
            return static_cast<int>(kExitUnsound);
        }
        return static_cast<int>(kExitOk);
    });
}

} // namespace mmreach
