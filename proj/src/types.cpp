#include "wdro/types.hpp"

#include <algorithm>
#include <numeric>

namespace wdro {

double euclidean_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double ground_distance(const Vec& z1, const Vec& z2, const NormSpec& norm) {
    if (z1.size() != z2.size())
        throw DimensionMismatch("ground_distance: points have dimensions " +
                                std::to_string(z1.size()) + " and " + std::to_string(z2.size()));
    switch (norm.ground) {
        case GroundNorm::euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < z1.size(); ++i) {
                const double d = z1[i] - z2[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case GroundNorm::one_norm: {
            double s = 0.0;
            for (std::size_t i = 0; i < z1.size(); ++i) s += std::abs(z1[i] - z2[i]);
            return s;
        }
        case GroundNorm::inf_norm: {
            double m = 0.0;
            for (std::size_t i = 0; i < z1.size(); ++i) m = std::max(m, std::abs(z1[i] - z2[i]));
            return m;
        }
        case GroundNorm::product_x_only: {
            const std::size_t n = z1.size();
            if (n == 0) return 0.0;
            if (z1[n - 1] != z2[n - 1]) return kInf;
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double d = z1[i] - z2[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
    }
    throw ValidationError("ground_distance: unknown norm");
}

double dual_norm(const Vec& c, GroundNorm ground) {
    switch (ground) {
        case GroundNorm::euclidean:
        case GroundNorm::product_x_only:
            return euclidean_norm(c);
        case GroundNorm::one_norm: {  // dual of l1 is l-inf
            double m = 0.0;
            for (double x : c) m = std::max(m, std::abs(x));
            return m;
        }
        case GroundNorm::inf_norm: {  // dual of l-inf is l1
            double s = 0.0;
            for (double x : c) s += std::abs(x);
            return s;
        }
    }
    throw ValidationError("dual_norm: unknown norm");
}

DomainSpec DomainSpec::finite(std::vector<Vec> points) {
    if (points.empty()) throw ValidationError("finite_grid domain needs at least one point");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) throw DimensionMismatch("finite_grid points have mixed dimensions");
    DomainSpec s;
    s.kind = SupportKind::finite_grid;
    s.grid = std::move(points);
    return s;
}

DomainSpec DomainSpec::box_domain(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw DimensionMismatch("box domain lo/hi dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw ValidationError("box domain has lo > hi");
    DomainSpec s;
    s.kind = SupportKind::box;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
}

double DomainSpec::diameter(const NormSpec& norm) const {
    switch (kind) {
        case SupportKind::unbounded:
            return kInf;
        case SupportKind::box: {
            Vec span(lo.size());
            for (std::size_t i = 0; i < lo.size(); ++i) span[i] = hi[i] - lo[i];
            Vec zero(lo.size(), 0.0);
            // product_x_only over a box spans all y values, hence infinite
            // unless the y edge is degenerate.
            return ground_distance(span, zero, norm);
        }
        case SupportKind::finite_grid: {
            double m = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                for (std::size_t j = i + 1; j < grid.size(); ++j)
                    m = std::max(m, ground_distance(grid[i], grid[j], norm));
            return m;
        }
    }
    throw ValidationError("diameter: unknown support kind");
}

DiscreteDistribution::DiscreteDistribution(std::vector<Vec> atoms, Vec weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.empty()) throw ValidationError("distribution needs at least one atom");
    if (atoms_.size() != weights_.size())
        throw ValidationError("distribution atom/weight count mismatch");
    const std::size_t d = atoms_.front().size();
    for (const auto& a : atoms_)
        if (a.size() != d) throw DimensionMismatch("distribution atoms have mixed dimensions");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw ValidationError("distribution weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("distribution weights sum to " + std::to_string(sum) +
                              ", outside the 1e-9 renormalization window");
    for (double& w : weights_) w /= sum;
}

DiscreteDistribution DiscreteDistribution::empirical(std::vector<Vec> samples) {
    const std::size_t n = samples.size();
    return DiscreteDistribution(std::move(samples), Vec(n, 1.0 / static_cast<double>(n)));
}

DiscreteDistribution DiscreteDistribution::point_mass(Vec atom) {
    std::vector<Vec> a;
    a.push_back(std::move(atom));
    return DiscreteDistribution(std::move(a), Vec{1.0});
}

}  // namespace wdro
