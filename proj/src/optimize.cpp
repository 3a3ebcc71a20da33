#include "mmreach/optimize.hpp"

#include "mmreach/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mmreach {

namespace {

// Mixed-radix counter over `dims` digits each in [0, radix).
bool next_index(std::vector<int>& idx, int radix)
{
    for (auto& d : idx) {
        if (++d < radix)
            return true;
        d = 0;
    }
    return false;
}

} // namespace

double box_extremum(const BoxObjective& f, std::span<const double> lo, std::span<const double> hi, bool minimize,
                    const BoxOptimizerOptions& opts, BoxOptimizerStats* stats)
{
    const std::size_t dim = lo.size();
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < dim; ++j) {
        if (hi[j] < lo[j])
            throw OrderError("box_extremum: lo > hi in coordinate " + std::to_string(j));
        if (hi[j] > lo[j])
            free.push_back(j);
    }
    std::vector<double> p(lo.begin(), lo.end());
    if (free.empty())
        return f(p);

    const double sgn = minimize ? 1.0 : -1.0;
    auto g = [&](std::span<const double> q) { return sgn * f(q); };

    // Stage 1: sign probe on {lo, mid, hi}^k.
    std::vector<bool> pos(free.size(), false);
    std::vector<bool> neg(free.size(), false);
    double grid_best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(free.size(), 0);
    do {
        for (std::size_t a = 0; a < free.size(); ++a) {
            const std::size_t j = free[a];
            p[j] = idx[a] == 0 ? lo[j] : idx[a] == 2 ? hi[j] : 0.5 * (lo[j] + hi[j]);
        }
        const double fp = f(p);
        grid_best = std::min(grid_best, sgn * fp);
        const double zero_tol = opts.sign_tolerance * std::max(1.0, std::abs(fp));
        for (std::size_t a = 0; a < free.size(); ++a) {
            const std::size_t j = free[a];
            const double base = p[j];
            const double h = std::min(1e-6 * std::max(1.0, std::abs(base)), 0.25 * (hi[j] - lo[j]));
            double slope;
            if (idx[a] == 0) {
                p[j] = base + h;
                slope = (f(p) - fp) / h;
            } else if (idx[a] == 2) {
                p[j] = base - h;
                slope = (fp - f(p)) / h;
            } else {
                p[j] = base + h;
                const double up = f(p);
                p[j] = base - h;
                slope = (up - f(p)) / (2.0 * h);
            }
            p[j] = base;
            if (slope > zero_tol)
                pos[a] = true;
            else if (slope < -zero_tol)
                neg[a] = true;
        }
    } while (next_index(idx, 3));

    bool stable = true;
    for (std::size_t a = 0; a < free.size(); ++a)
        stable = stable && !(pos[a] && neg[a]);

    // Dense grid; it also guards the corner shortcut against interior
    // extrema that fall between the probe points.
    if (static_cast<int>(free.size()) > opts.max_free_dims)
        throw SizeError("box_extremum: " + std::to_string(free.size()) +
                        " free coordinates exceed the dense-grid limit of " + std::to_string(opts.max_free_dims));
    const int radix = std::max(2, opts.grid_points);
    std::vector<double> best(p);
    double best_val = std::numeric_limits<double>::infinity();
    std::fill(idx.begin(), idx.end(), 0);
    do {
        for (std::size_t a = 0; a < free.size(); ++a) {
            const std::size_t j = free[a];
            p[j] = idx[a] == radix - 1 ? hi[j] : lo[j] + (hi[j] - lo[j]) * idx[a] / (radix - 1);
        }
        const double v = g(p);
        if (v < best_val) {
            best_val = v;
            best = p;
        }
    } while (next_index(idx, radix));
    best_val = std::min(best_val, grid_best);

    if (stable) {
        for (std::size_t a = 0; a < free.size(); ++a) {
            const std::size_t j = free[a];
            // f increasing in j: the minimum sits at lo, the maximum at hi.
            const bool at_hi = minimize ? neg[a] : pos[a];
            p[j] = at_hi ? hi[j] : lo[j];
        }
        const double corner = g(p);
        if (corner <= best_val + 1e-12 * std::max(1.0, std::abs(corner))) {
            if (stats)
                ++stats->corner;
            return sgn * std::min(corner, best_val);
        }
    }
    if (stats)
        ++stats->search;

    constexpr int kBrentBits = 28;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double largest_move = 0.0;
        bool improved = false;
        for (const std::size_t j : free) {
            const double spacing = (hi[j] - lo[j]) / (radix - 1);
            const double c = best[j];
            const double a = std::max(lo[j], c - spacing);
            const double b = std::min(hi[j], c + spacing);
            std::vector<double> q(best);
            auto line = [&](double t) {
                q[j] = t;
                return g(q);
            };
            double cand_t = c;
            double cand_v = best_val;
            for (const double t : {a, b}) {
                const double v = line(t);
                if (v < cand_v) {
                    cand_v = v;
                    cand_t = t;
                }
            }
            std::uintmax_t iters = 100;
            const auto [bt, bv] = boost::math::tools::brent_find_minima(line, a, b, kBrentBits, iters);
            if (bv < cand_v) {
                cand_v = bv;
                cand_t = bt;
            }
            if (cand_v < best_val) {
                largest_move = std::max(largest_move, std::abs(cand_t - c));
                best_val = cand_v;
                best[j] = cand_t;
                improved = true;
            }
        }
        if (!improved || largest_move < opts.tolerance)
            break;
    }
    return sgn * best_val;
}

} // namespace mmreach
