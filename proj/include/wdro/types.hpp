#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wdro {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors. Each carries a stable name used by the CLI for machine-readable
// error JSON and exit-code mapping (1 = validation, 2 = numerical).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class UnboundedRobustLoss : public Error {
public:
    explicit UnboundedRobustLoss(const std::string& what) : Error("UnboundedRobustLoss", what) {}
};

class NoSolver : public Error {
public:
    explicit NoSolver(const std::string& what) : Error("NoSolver", what) {}
};

class MissingLipschitz : public Error {
public:
    explicit MissingLipschitz(const std::string& what) : Error("MissingLipschitz", what) {}
};

class MissingGradient : public Error {
public:
    explicit MissingGradient(const std::string& what) : Error("MissingGradient", what) {}
};

class TooLarge : public Error {
public:
    explicit TooLarge(const std::string& what) : Error("TooLarge", what) {}
};

class MinSampleSize : public Error {
public:
    MinSampleSize(long min_n, const std::string& what)
        : Error("MinSampleSize", what), min_n_(min_n) {}
    long min_n() const { return min_n_; }

private:
    long min_n_;
};

// ---------------------------------------------------------------------------
// Ground norms and transport order.
// ---------------------------------------------------------------------------

enum class GroundNorm {
    euclidean,
    one_norm,
    inf_norm,
    // ||z - z~|| = ||x - x~||_2 + inf * 1{y != y~}; the last coordinate is y,
    // everything before it is x. Distance is finite only when y matches.
    product_x_only,
};

struct NormSpec {
    double p = 1.0;  // Wasserstein order, in [1, 2]
    GroundNorm ground = GroundNorm::euclidean;

    // q with 1/p + 1/q = 1; infinity when p = 1.
    double holder_conjugate() const {
        if (p <= 1.0) return kInf;
        return p / (p - 1.0);
    }

    void validate() const {
        if (!(p >= 1.0 && p <= 2.0))
            throw ValidationError("Wasserstein order p must lie in [1, 2], got " + std::to_string(p));
    }
};

double ground_distance(const Vec& z1, const Vec& z2, const NormSpec& norm);

// Norm of a coefficient vector under the norm dual to the ground norm.
// For product_x_only the dual acts on the x block (euclidean) and the y
// coefficient contributes through the euclidean part only when y is frozen;
// callers that need the (theta, -1) newsvendor norm use a joint ground norm.
double dual_norm(const Vec& c, GroundNorm ground);

double euclidean_norm(const Vec& v);
double dot(const Vec& a, const Vec& b);

// ---------------------------------------------------------------------------
// Domain of the perturbed points z~ in the inner maximization.
// ---------------------------------------------------------------------------

enum class SupportKind { finite_grid, box, unbounded };

struct DomainSpec {
    SupportKind kind = SupportKind::unbounded;
    std::vector<Vec> grid;  // finite_grid
    Vec lo, hi;             // box

    static DomainSpec unbounded() { return DomainSpec{}; }
    static DomainSpec finite(std::vector<Vec> points);
    static DomainSpec box_domain(Vec lo, Vec hi);

    bool is_finite_grid() const { return kind == SupportKind::finite_grid; }

    // sup ||z~ - z|| over the support; +inf for unbounded.
    double diameter(const NormSpec& norm) const;
};

// ---------------------------------------------------------------------------
// Weighted atoms in R^d. Serves as nominal Q, empirical P_n, and the
// desk-scale stand-in for the data-generating distribution.
// ---------------------------------------------------------------------------

class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    DiscreteDistribution(std::vector<Vec> atoms, Vec weights);

    // Equal weights 1/n.
    static DiscreteDistribution empirical(std::vector<Vec> samples);
    static DiscreteDistribution point_mass(Vec atom);

    const std::vector<Vec>& atoms() const { return atoms_; }
    const Vec& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }
    std::size_t dim() const { return atoms_.empty() ? 0 : atoms_.front().size(); }

private:
    std::vector<Vec> atoms_;
    Vec weights_;
};

}  // namespace wdro
