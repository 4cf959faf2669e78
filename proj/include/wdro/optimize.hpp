#pragma once

#include <functional>

#include "wdro/types.hpp"

namespace wdro {

struct ScalarMin {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

// Golden-section minimization of a unimodal function on [lo, hi].
// Converges to |b - a| <= rel_tol * (1 + |a| + |b|).
ScalarMin golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double rel_tol = 1e-10, int max_iter = 200);

// Expand hi by doubling from `start` until f stops decreasing (f(2u) >= f(u))
// or hi exceeds `cap`. Returns the final upper bracket. For a convex f this
// brackets the minimizer; a cap hit means the function kept decreasing.
double expand_upper_bracket(const std::function<double(double)>& f, double start, double cap,
                            bool* hit_cap = nullptr);

// Euclidean projection onto the l2 ball of given radius.
void project_l2_ball(Vec& v, double radius);
// Componentwise clamp onto the l-inf ball.
void project_linf_ball(Vec& v, double radius);
// Duchi-style projection onto the l1 ball.
void project_l1_ball(Vec& v, double radius);

// Dykstra alternating projections onto {w : w.1 = 1} intersect {||w||_2 <= B}.
// Feasible iff B >= 1/sqrt(d).
void project_simplex_plane_ball(Vec& w, double ball_radius, int rounds = 100, double tol = 1e-10);

}  // namespace wdro
