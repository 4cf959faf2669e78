#include "wdro/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wdro {

ScalarMin golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double rel_tol, int max_iter) {
    const double inv_phi = 0.6180339887498948482;  // 1/phi
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    while (it < max_iter && (b - a) > rel_tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    const double xm = 0.5 * (a + b);
    return ScalarMin{xm, f(xm), it};
}

double expand_upper_bracket(const std::function<double(double)>& f, double start, double cap,
                            bool* hit_cap) {
    if (hit_cap) *hit_cap = false;
    double u = start;
    double fu = f(u);
    while (u < cap) {
        const double v = 2.0 * u;
        const double fv = f(v);
        if (fv >= fu) return v;
        u = v;
        fu = fv;
    }
    if (hit_cap) *hit_cap = true;
    return u;
}

void project_l2_ball(Vec& v, double radius) {
    const double n = euclidean_norm(v);
    if (n > radius && n > 0.0) {
        const double s = radius / n;
        for (double& x : v) x *= s;
    }
}

void project_linf_ball(Vec& v, double radius) {
    for (double& x : v) x = std::clamp(x, -radius, radius);
}

void project_l1_ball(Vec& v, double radius) {
    double l1 = 0.0;
    for (double x : v) l1 += std::abs(x);
    if (l1 <= radius) return;
    Vec mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
    std::sort(mag.begin(), mag.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        cum += mag[i];
        const double t = (cum - radius) / static_cast<double>(i + 1);
        if (i + 1 == mag.size() || mag[i + 1] <= t) {
            theta = t;
            break;
        }
    }
    for (double& x : v) {
        const double shrunk = std::max(std::abs(x) - theta, 0.0);
        x = (x < 0.0 ? -shrunk : shrunk);
    }
}

namespace {

void project_plane_sum1(Vec& w) {
    const double d = static_cast<double>(w.size());
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    const double shift = (s - 1.0) / d;
    for (double& x : w) x -= shift;
}

}  // namespace

void project_simplex_plane_ball(Vec& w, double ball_radius, int rounds, double tol) {
    (void)rounds;
    (void)tol;
    const double d = static_cast<double>(w.size());
    if (ball_radius * std::sqrt(d) < 1.0 - 1e-12)
        throw ValidationError("weight ball of radius " + std::to_string(ball_radius) +
                              " does not intersect the budget plane (need B >= 1/sqrt(d))");
    // Exact projection: on the plane {w.1 = 1} every point splits as
    // (1/d) 1 + v with v orthogonal to 1, and the ball constraint only caps
    // ||v||. Shift to the plane, then shrink the orthogonal component.
    project_plane_sum1(w);
    const double base = 1.0 / d;  // squared norm of the fixed component
    double v2 = 0.0;
    for (double x : w) v2 += x * x;
    v2 -= base;
    const double cap2 = ball_radius * ball_radius - base;
    if (v2 > cap2 && v2 > 0.0) {
        const double s = std::sqrt(std::max(cap2, 0.0) / v2);
        const double mean = 1.0 / d;
        for (double& x : w) x = mean + s * (x - mean);
    }
}

}  // namespace wdro
