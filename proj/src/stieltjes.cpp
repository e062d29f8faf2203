#include "spiked/stieltjes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace spiked {

namespace {

constexpr double kPi = std::numbers::pi;

// Root of g_i^2 - w g_i - c = 0 with the smaller modulus, written as
// -2c / (w + s) where s = w sqrt(1 + 4c/w^2) points along w. For Im w > 0
// this is the root with Im g_i > 0; for real w > 0 it is negative.
cplx part_at(double c, cplx w) {
    if (c == 0.0) return 0.0;
    if (w == cplx(0.0)) return -std::sqrt(c);
    const cplx s = w * std::sqrt(1.0 + 4.0 * c / (w * w));
    return -2.0 * c / (w + s);
}

// d g_i / d w = -g_i / s with s = w - 2 g_i.
cplx part_slope(double c, cplx w, cplx gi) {
    if (c == 0.0) return 0.0;
    return -gi / (w - 2.0 * gi);
}

cplx fp_sum(const RatioVector& c, cplx w) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < c.order(); ++i) s += part_at(c[i], w);
    return s;
}

struct NewtonOut {
    cplx g;
    bool ok;
};

// Newton on F(g) = g - sum_i g_i(g + z).
NewtonOut newton(const RatioVector& c, cplx z, cplx g, int max_steps = 60) {
    for (int it = 0; it < max_steps; ++it) {
        const cplx w = g + z;
        cplx f = g, df = 1.0;
        for (std::size_t i = 0; i < c.order(); ++i) {
            const cplx gi = part_at(c[i], w);
            f -= gi;
            df -= part_slope(c[i], w, gi);
        }
        if (df == cplx(0.0)) return {g, false};
        const cplx step = f / df;
        g -= step;
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) return {g, false};
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(g))) return {g, true};
    }
    return {g, false};
}

// Newton on the coupled quadratics g_i^2 - (g + z) g_i - c_i = 0 in the
// parts themselves. No square roots, so it follows a branch continuously.
bool newton_parts(const RatioVector& c, cplx z, std::vector<cplx>& parts, int max_steps = 100) {
    const auto d = static_cast<Eigen::Index>(c.order());
    Eigen::MatrixXcd jac(d, d);
    Eigen::VectorXcd f(d), x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = parts[static_cast<std::size_t>(i)];
    for (int it = 0; it < max_steps; ++it) {
        const cplx w = x.sum() + z;
        for (Eigen::Index i = 0; i < d; ++i) {
            f[i] = x[i] * x[i] - w * x[i] - c[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < d; ++j) jac(i, j) = -x[i];
            jac(i, i) += 2.0 * x[i] - w;
        }
        const Eigen::VectorXcd step = jac.partialPivLu().solve(f);
        x -= step;
        if (!x.allFinite()) return false;
        if (step.norm() <= 1e-15 * std::max(1.0, x.norm())) break;
    }
    // Near a merging pair of roots Newton is only linear, so settle for a
    // small residual rather than a small step.
    const cplx w = x.sum() + z;
    double res = 0.0, scale = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        res = std::max(res, std::abs(x[i] * x[i] - w * x[i] - c[static_cast<std::size_t>(i)]));
        scale = std::max(scale, std::abs(x[i]) * std::max(std::abs(x[i]), std::abs(w)));
    }
    if (res > 1e-12 * scale) return false;
    for (Eigen::Index i = 0; i < d; ++i) parts[static_cast<std::size_t>(i)] = x[i];
    return true;
}

StieltjesSolution finish(const RatioVector& c, cplx z, cplx g, int iterations, bool converged) {
    StieltjesSolution s;
    s.z = z;
    s.g = g;
    s.iterations = iterations;
    s.converged = converged;
    s.parts.resize(c.order());
    for (std::size_t i = 0; i < c.order(); ++i) s.parts[i] = part_at(c[i], g + z);
    s.residual = quadratic_residual(c, z, g, s.parts);
    return s;
}

double sqrt_sum(const RatioVector& c, double u) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.order(); ++i) s += std::sqrt(4.0 * c[i] + u * u);
    return s;
}

}  // namespace

RatioVector::RatioVector(std::vector<double> c) : c_(std::move(c)) {
    if (c_.size() < 2) throw std::invalid_argument("ratio vector needs at least two entries");
    double sum = 0.0;
    for (double x : c_) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("ratios must lie in [0, 1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("ratios must sum to 1");
}

RatioVector RatioVector::uniform(std::size_t d) {
    return RatioVector(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

RatioVector RatioVector::from_dims(const Dims& dims) {
    const double n = static_cast<double>(dims_sum(dims));
    std::vector<double> c;
    for (auto k : dims) {
        if (k == 0) throw std::invalid_argument("dimensions must be positive");
        c.push_back(static_cast<double>(k) / n);
    }
    return RatioVector(std::move(c));
}

RatioVector RatioVector::matrix(double c) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("matrix ratio must lie in (0, 1)");
    return RatioVector({c, 1.0 - c, 0.0});
}

bool RatioVector::interior() const {
    return std::all_of(c_.begin(), c_.end(), [](double x) { return x > 0.0 && x < 1.0; });
}

bool RatioVector::is_matrix_embedding() const {
    return c_.size() == 3 && std::count(c_.begin(), c_.end(), 0.0) == 1;
}

double RatioVector::matrix_ratio() const {
    if (!is_matrix_embedding()) throw std::invalid_argument("not a matrix embedding");
    for (double x : c_)
        if (x > 0.0) return x;
    return 0.0;
}

bool RatioVector::is_uniform() const {
    return std::all_of(c_.begin(), c_.end(), [&](double x) { return std::abs(x - c_[0]) <= 1e-14; });
}

double quadratic_residual(const RatioVector& c, cplx z, cplx g, const std::vector<cplx>& parts) {
    double r = 0.0;
    for (std::size_t i = 0; i < c.order(); ++i)
        r = std::max(r, std::abs(parts[i] * parts[i] - (g + z) * parts[i] - c[i]));
    return r;
}

StieltjesSolution solve_fixed_point(const RatioVector& c, cplx z, double tol, int max_iter) {
    cplx g = 0.0;
    double theta = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    int nonmonotone = 0;
    for (int it = 1; it <= max_iter; ++it) {
        const cplx target = fp_sum(c, g + z);
        const cplx next = g + theta * (target - g);
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag()))
            throw NumericError("fixed-point iteration produced a non-finite value");
        const double delta = std::abs(next - g);
        g = next;
        if (delta <= tol) {
            auto n = newton(c, z, g, 8);
            if (n.ok && std::abs(n.g - g) <= 1e3 * tol) g = n.g;
            return finish(c, z, g, it, true);
        }
        if (delta > prev && ++nonmonotone >= 200) theta = 0.5;
        prev = delta;
    }
    return finish(c, z, g, max_iter, false);
}

StieltjesSolution stieltjes(const RatioVector& c, cplx z) {
    if (z.imag() == 0.0) {
        const double x = z.real();
        RealBranch rb(c);
        if (!(std::abs(x) > rb.edge)) throw std::domain_error("real z inside the support hull");
        const double sgn = x > 0 ? 1.0 : -1.0;
        const double u = rb.u_of(std::abs(x));
        StieltjesSolution s;
        s.z = z;
        s.parts.resize(c.order());
        for (std::size_t i = 0; i < c.order(); ++i) {
            s.parts[i] = sgn * rb.part(i, u);
            s.g += s.parts[i];
        }
        s.converged = true;
        s.residual = quadratic_residual(c, z, s.g, s.parts);
        return s;
    }
    if (z.imag() < 0.0) {
        auto s = stieltjes(c, std::conj(z));
        s.z = z;
        s.g = std::conj(s.g);
        for (auto& p : s.parts) p = std::conj(p);
        return s;
    }

    auto direct = solve_fixed_point(c, z, 1e-12, 1000);
    if (direct.converged && direct.g.imag() > 0.0 && direct.residual <= 1e-10) return direct;

    // Continuation in Im z: start high enough for the plain iteration, then
    // walk down with Newton warm starts.
    const double x = z.real(), y = z.imag();
    double yk = std::max(1.0, y);
    StieltjesSolution start = solve_fixed_point(c, cplx(x, yk));
    while (!start.converged && yk < 1e4) {
        yk *= 4.0;
        start = solve_fixed_point(c, cplx(x, yk));
    }
    if (!start.converged) throw NumericError("continuation could not find a starting point");
    std::vector<cplx> parts = start.parts;
    int steps = start.iterations;
    double ratio = 0.5;
    while (yk > y) {
        const double ynext = std::max(y, yk * ratio);
        std::vector<cplx> trial = parts;
        const bool ok = newton_parts(c, cplx(x, ynext), trial);
        ++steps;
        cplx g = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < trial.size(); ++i) g += trial[i], prev += parts[i];
        // reject steps that jump to another sheet
        if (ok && g.imag() > 0.0 && std::abs(g - prev) <= 0.5 * std::max(1.0, std::abs(prev))) {
            parts = std::move(trial);
            yk = ynext;
            ratio = std::max(0.25, 2.0 * ratio - 1.0);
        } else {
            ratio = 0.5 * (1.0 + ratio);
            if (ratio > 1.0 - 1e-6) throw NumericError("continuation stalled");
        }
    }
    StieltjesSolution out;
    out.z = z;
    out.parts = parts;
    for (auto p : parts) out.g += p;
    out.iterations = steps;
    out.converged = true;
    out.residual = quadratic_residual(c, z, out.g, out.parts);
    return out;
}

cplx g_cubic_d3(cplx z) {
    const double a = 2.0 * std::sqrt(2.0 / 3.0);
    if (z.imag() == 0.0 && std::abs(z.real()) <= a) throw std::domain_error("z inside the cubic support");
    const cplx r = std::sqrt(z - a) * std::sqrt(z + a);
    return (-3.0 * z + 3.0 * r) / 4.0;
}

cplx g_hypercubic(int d, cplx z) {
    if (d < 2) throw std::invalid_argument("order must be at least 2");
    const double dd = static_cast<double>(d);
    const double a = 2.0 * std::sqrt((dd - 1.0) / dd);
    if (z.imag() == 0.0 && std::abs(z.real()) <= a) throw std::domain_error("z inside the hypercubic support");
    const cplx r = std::sqrt(z - a) * std::sqrt(z + a);
    return dd * (-z + r) / (2.0 * (dd - 1.0));
}

cplx g_matrix_case(double c, cplx z) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("matrix ratio must lie in (0, 1)");
    const double eta = c * (1.0 - c);
    const double a = std::sqrt(std::max(0.0, 1.0 - 2.0 * std::sqrt(eta)));
    const double b = std::sqrt(1.0 + 2.0 * std::sqrt(eta));
    if (z.imag() == 0.0) {
        const double x = std::abs(z.real());
        if (x == 0.0 || (x >= a && x <= b)) throw std::domain_error("z on the matrix-case support");
    }
    const cplx r = std::sqrt(z - b) * std::sqrt(z + b) * std::sqrt(z - a) * std::sqrt(z + a);
    return -z + r / z;
}

RealBranch::RealBranch(const RatioVector& cv, double tol) : c(cv) {
    (void)tol;
    if (dphi(0.0) >= 0.0) {
        u_star = 0.0;
    } else {
        double hi = 1.0;
        while (dphi(hi) <= 0.0) hi *= 2.0;
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve([this](double u) { return dphi(u); }, 0.0, hi, dphi(0.0),
                                                   dphi(hi), boost::math::tools::eps_tolerance<double>(53), iters);
        u_star = 0.5 * (r.first + r.second);
    }
    edge = phi(u_star);
}

double RealBranch::phi(double u) const {
    const double d = static_cast<double>(c.order());
    return u * (1.0 - 0.5 * d) + 0.5 * sqrt_sum(c, u);
}

double RealBranch::dphi(double u) const {
    const double d = static_cast<double>(c.order());
    double s = 0.0;
    for (std::size_t i = 0; i < c.order(); ++i)
        s += c[i] == 0.0 ? (u >= 0.0 ? 1.0 : -1.0) : u / std::sqrt(4.0 * c[i] + u * u);
    return 1.0 - 0.5 * d + 0.5 * s;
}

double RealBranch::u_of(double z) const {
    if (z < edge) {
        if (z < edge - 1e-14 * std::max(1.0, edge)) throw std::domain_error("z below the right edge");
        return u_star;
    }
    if (z == edge) return u_star;
    // phi' <= 1, so the root sits at least (z - edge) to the right of u*.
    double lo = u_star + (z - edge);
    if (phi(lo) >= z) return lo;
    double step = std::max(1.0, z - edge);
    double hi = lo + step;
    while (phi(hi) < z) {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
    }
    std::uintmax_t iters = 200;
    auto f = [this, z](double u) { return phi(u) - z; };
    auto r = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                               boost::math::tools::eps_tolerance<double>(53), iters);
    return 0.5 * (r.first + r.second);
}

double RealBranch::part(std::size_t i, double u) const {
    const double ci = c[i];
    if (ci == 0.0) return 0.0;
    return -2.0 * ci / (u + std::sqrt(4.0 * ci + u * u));
}

double RealBranch::g(double u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < c.order(); ++i) s += part(i, u);
    return s;
}

double right_edge(const RatioVector& c, double tol) { return RealBranch(c, tol).edge; }

LimitingMeasure LimitingMeasure::cubic_d3() {
    LimitingMeasure m;
    m.kind_ = Kind::CubicD3;
    m.d_ = 3;
    m.c_ = RatioVector::uniform(3);
    const double a = 2.0 * std::sqrt(2.0 / 3.0);
    m.support_ = {{-a, a}};
    return m;
}

LimitingMeasure LimitingMeasure::hypercubic(int d) {
    if (d < 2) throw std::invalid_argument("order must be at least 2");
    LimitingMeasure m;
    m.kind_ = Kind::Hypercubic;
    m.d_ = d;
    m.c_ = RatioVector::uniform(static_cast<std::size_t>(d));
    const double a = 2.0 * std::sqrt((d - 1.0) / d);
    m.support_ = {{-a, a}};
    return m;
}

LimitingMeasure LimitingMeasure::matrix(double c) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("matrix ratio must lie in (0, 1)");
    LimitingMeasure m;
    m.kind_ = Kind::Matrix;
    m.d_ = 3;
    m.cm_ = c;
    m.c_ = RatioVector::matrix(c);
    const double eta = c * (1.0 - c);
    const double a = std::sqrt(std::max(0.0, 1.0 - 2.0 * std::sqrt(eta)));
    const double b = std::sqrt(1.0 + 2.0 * std::sqrt(eta));
    if (a > 0.0)
        m.support_ = {{-b, -a}, {a, b}};
    else
        m.support_ = {{-b, b}};
    m.atom_ = 1.0 - 2.0 * std::min(c, 1.0 - c);
    return m;
}

LimitingMeasure LimitingMeasure::generic(const RatioVector& c) {
    LimitingMeasure m;
    m.kind_ = Kind::FixedPointGeneric;
    m.d_ = static_cast<int>(c.order());
    m.c_ = c;
    const double e = spiked::right_edge(c);
    m.support_ = {{-e, e}};
    const double cmax = *std::max_element(c.values().begin(), c.values().end());
    m.atom_ = std::max(0.0, 2.0 * cmax - 1.0);
    return m;
}

LimitingMeasure LimitingMeasure::for_ratios(const RatioVector& c) {
    if (c.is_uniform()) return c.order() == 3 ? cubic_d3() : hypercubic(static_cast<int>(c.order()));
    if (c.is_matrix_embedding()) return matrix(c.matrix_ratio());
    return generic(c);
}

double LimitingMeasure::density(double x, double eps) const {
    switch (kind_) {
    case Kind::CubicD3:
        return 3.0 / (4.0 * kPi) * std::sqrt(std::max(0.0, 8.0 / 3.0 - x * x));
    case Kind::Hypercubic: {
        const double d = d_;
        const double a2 = 4.0 * (d - 1.0) / d;
        return d / (2.0 * (d - 1.0) * kPi) * std::sqrt(std::max(0.0, a2 - x * x));
    }
    case Kind::Matrix: {
        if (x == 0.0) return 0.0;
        const double eta = cm_ * (1.0 - cm_);
        const double q = (x * x - 1.0) * (x * x - 1.0) - 4.0 * eta;
        return q < 0.0 ? std::sqrt(-q) / (kPi * std::abs(x)) : 0.0;
    }
    case Kind::FixedPointGeneric: {
        if (std::abs(x) >= right_edge()) return 0.0;
        // Near an integrable spike at 0 the start must sit well inside |x|.
        double y0 = x != 0.0 ? std::clamp(1e-3 * std::abs(x), 1e-12, eps) : eps;
        StieltjesSolution s;
        try {
            s = stieltjes(c_, cplx(x, y0));
        } catch (const NumericError&) {
            y0 = eps;
            s = stieltjes(c_, cplx(x, y0));
        }
        // Finish on the real axis: the boundary value solves the same
        // quadratics at z = x, which removes the eps smear and the atom's
        // Lorentzian in one go.
        auto parts = s.parts;
        if (x != 0.0 && newton_parts(c_, cplx(x, 0.0), parts)) {
            cplx g = 0.0;
            for (auto p : parts) g += p;
            const bool same_sheet = std::abs(g - s.g) <= 0.1 * std::max(1.0, std::abs(s.g)) || atom_ > 0.0;
            if (g.imag() >= -1e-12 * std::max(1.0, std::abs(g)) && same_sheet) return std::max(0.0, g.imag()) / kPi;
        }
        double f = s.g.imag() / kPi;
        if (atom_ > 0.0) f -= atom_ * y0 / (kPi * (x * x + y0 * y0));
        return std::max(0.0, f);
    }
    }
    return 0.0;
}

double LimitingMeasure::cdf(double x) const {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    auto f = [this](double t) { return density(t); };
    for (const auto& iv : support_) {
        if (x <= iv.lo) break;
        const double up = std::min(x, iv.hi);
        // split at 0, where a generic density may carry an integrable spike
        if (iv.lo < 0.0 && up > 0.0) {
            total += gauss_kronrod<double, 61>::integrate(f, iv.lo, 0.0, 15, 1e-11);
            total += gauss_kronrod<double, 61>::integrate(f, 0.0, up, 15, 1e-11);
        } else {
            total += gauss_kronrod<double, 61>::integrate(f, iv.lo, up, 15, 1e-11);
        }
    }
    if (atom_ > 0.0 && x >= 0.0) total += atom_;
    return total;
}

double limiting_density(const LimitingMeasure& m, double x, double eps) { return m.density(x, eps); }

}  // namespace spiked
