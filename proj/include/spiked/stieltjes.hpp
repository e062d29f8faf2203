#pragma once

#include "spiked/tensor.hpp"

#include <complex>
#include <stdexcept>
#include <vector>

namespace spiked {

using cplx = std::complex<double>;

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Asymptotic dimension ratios c_i = n_i / sum_j n_j.
class RatioVector {
public:
    RatioVector() = default;
    // Entries in [0, 1] summing to 1 within 1e-12, at least two entries.
    explicit RatioVector(std::vector<double> c);

    static RatioVector uniform(std::size_t d);
    static RatioVector from_dims(const Dims& dims);
    // (c, 1 - c, 0): a c-by-(1-c) matrix seen as an order-3 tensor.
    static RatioVector matrix(double c);

    std::size_t order() const { return c_.size(); }
    double operator[](std::size_t i) const { return c_[i]; }
    const std::vector<double>& values() const { return c_; }
    bool interior() const;
    // Order 3 with exactly one zero entry.
    bool is_matrix_embedding() const;
    // The nonzero c of a matrix embedding (first nonzero entry).
    double matrix_ratio() const;
    bool is_uniform() const;

private:
    std::vector<double> c_;
};

struct StieltjesSolution {
    cplx z;
    cplx g;
    std::vector<cplx> parts;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;  // max_i |g_i^2 - (g + z) g_i - c_i|
};

// Coupled-quadratics residual of a candidate (g, g_i).
double quadratic_residual(const RatioVector& c, cplx z, cplx g, const std::vector<cplx>& parts);

// Plain fixed-point iteration from g = 0: g_i <- ((g+z) - s_i)/2 with
// s_i^2 = 4 c_i + (g+z)^2, g <- sum g_i. Damping 0.5 engages after 200
// non-monotone steps; a few Newton steps polish a converged iterate.
// Returns converged = false instead of throwing when it stalls.
StieltjesSolution solve_fixed_point(const RatioVector& c, cplx z, double tol = 1e-12, int max_iter = 10000);

// Stieltjes transform anywhere off the real support. Real z uses the
// real-axis parametrization below, complex z falls back to continuation in
// Im z when the plain iteration does not converge.
StieltjesSolution stieltjes(const RatioVector& c, cplx z);

cplx g_cubic_d3(cplx z);
cplx g_hypercubic(int d, cplx z);
cplx g_matrix_case(double c, cplx z);

// Real-axis parametrization. With u = g + z, a real z lies right of the
// support iff z = phi(u) for some u >= u*, where
//   phi(u) = u (1 - d/2) + 1/2 sum_i sqrt(4 c_i + u^2)
// is convex and u* is its minimizer; the right edge is phi(u*).
struct RealBranch {
    RatioVector c;
    double u_star = 0.0;
    double edge = 0.0;

    explicit RealBranch(const RatioVector& c, double tol = 1e-15);

    double phi(double u) const;
    double dphi(double u) const;
    // u >= u_star with phi(u) = z; z must be >= edge.
    double u_of(double z) const;
    double part(std::size_t i, double u) const;  // g_i at parameter u
    // Sum of the parts; equals u - phi(u) without the cancellation.
    double g(double u) const;
};

double right_edge(const RatioVector& c, double tol = 1e-8);

struct Interval {
    double lo;
    double hi;
};

class LimitingMeasure {
public:
    enum class Kind { FixedPointGeneric, CubicD3, Hypercubic, Matrix };

    static LimitingMeasure cubic_d3();
    static LimitingMeasure hypercubic(int d);
    static LimitingMeasure matrix(double c);
    static LimitingMeasure generic(const RatioVector& c);
    // Closed form where one exists, generic otherwise.
    static LimitingMeasure for_ratios(const RatioVector& c);

    Kind kind() const { return kind_; }
    const RatioVector& ratios() const { return c_; }
    int order() const { return d_; }
    const std::vector<Interval>& support() const { return support_; }
    double atom_at_zero() const { return atom_; }
    double right_edge() const { return support_.back().hi; }

    // Closed-form kinds ignore eps.
    double density(double x, double eps = 1e-6) const;
    // Includes the atom at 0 as a step.
    double cdf(double x) const;
    double total_mass() const { return cdf(right_edge() + 1.0); }

private:
    Kind kind_ = Kind::CubicD3;
    RatioVector c_;
    int d_ = 3;
    double cm_ = 0.5;
    std::vector<Interval> support_;
    double atom_ = 0.0;
};

double limiting_density(const LimitingMeasure& m, double x, double eps = 1e-6);

}  // namespace spiked
