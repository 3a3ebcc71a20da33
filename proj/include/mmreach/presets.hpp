#pragma once

#include "mmreach/multiorder.hpp"
#include "mmreach/system.hpp"

#include <string>
#include <vector>

namespace mmreach::presets {

/// x' = (x1 x2 + w, x1 + 1), W = [0, 1/4].
SystemPtr bilinear_system();
/// x' = (x1 - x2 + x2^3 + w, x1 - x2), W = [-1, 1].
SystemPtr cubic_system();
/// x' = (x2 + sin x2 + w, x1 + cos x1 + 1), W = [0, 1/2].
SystemPtr trig_system();

/// Shape [[1, -2], [1, 1]] with coords [0, 1/4] x [-1/4, 0].
Parallelotope example1_initial_set();
/// [0, 3/4] x [-1/4, 1/4], the axis-aligned hull of the example-1 set.
Box example2_outer_box();

Matrix example3_t1();
Matrix example3_t2();
Vector example3_x0();

/// (1 + cos(i pi/3), 1 + sin(i pi/3)), i = 1..6.
std::vector<Vector> hexagon_vertices();
/// Three rhombi sharing the hexagon centre, pairwise without common interior.
UnionInitialSet hexagon_disjoint_split();
/// Three overlapping rectangles, each spanned by a pair of opposite hexagon
/// edges; their union is the hexagon.
UnionInitialSet hexagon_overlap_split();

} // namespace mmreach::presets
