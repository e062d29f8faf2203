#include "spiked/asymptotics.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spiked {

namespace {

double q_at(const RealBranch& rb, std::size_t i, double u) {
    const double gi = rb.part(i, u);
    return std::sqrt(std::max(0.0, 1.0 - gi * gi / rb.c[i]));
}

double q_prod(const RealBranch& rb, double u) {
    double p = 1.0;
    for (std::size_t i = 0; i < rb.c.order(); ++i) p *= q_at(rb, i, u);
    return p;
}

double beta_of_u(const RealBranch& rb, double u) { return u / q_prod(rb, u); }

void require_tensor_ratios(const RatioVector& c) {
    if (c.order() < 3) throw std::invalid_argument("order-d theory needs d >= 3");
    if (!c.interior()) throw std::invalid_argument("ratios must lie strictly inside (0, 1)");
}

struct Fold {
    ThresholdReport report;
    double u_min;  // parameter where beta(u) attains beta_s
};

Fold fold_of(const RealBranch& rb) {
    Fold f;
    auto& r = f.report;
    r.right_edge = rb.edge;
    r.edge_candidate = beta_of_u(rb, rb.u_star);
    const double u_max = rb.u_of(rb.edge + 10.0);
    auto obj = [&rb](double u) { return beta_of_u(rb, u); };
    std::uintmax_t iters = 500;
    auto m = boost::math::tools::brent_find_minima(obj, rb.u_star, u_max, std::numeric_limits<double>::digits / 2,
                                                   iters);
    r.fold_candidate = m.second;
    r.fold_lambda = rb.phi(m.first);
    r.candidates_disagree = std::abs(r.edge_candidate - r.fold_candidate) > 1e-6;
    if (r.edge_candidate <= r.fold_candidate) {
        r.beta_s = r.edge_candidate;
        f.u_min = rb.u_star;
    } else {
        r.beta_s = r.fold_candidate;
        f.u_min = m.first;
    }
    return f;
}

}  // namespace

AlignmentFunctions alignment_functions(double beta, const RatioVector& c, double z) {
    require_tensor_ratios(c);
    const auto s = stieltjes(c, cplx(z, 0.0));
    const double u = z + s.g.real();
    AlignmentFunctions a;
    for (std::size_t i = 0; i < c.order(); ++i) {
        const double gi = s.parts[i].real();
        a.alpha.push_back(beta / (u - gi));
        a.q.push_back(std::sqrt(std::max(0.0, 1.0 - gi * gi / c[i])));
    }
    return a;
}

std::vector<double> alignments_from_alpha(const std::vector<double>& alpha) {
    const auto d = alpha.size();
    if (d < 3) throw std::invalid_argument("needs d >= 3");
    std::vector<double> q(d);
    for (std::size_t i = 0; i < d; ++i) {
        double log_num = (static_cast<double>(d) - 3.0) * std::log(alpha[i]);
        double log_den = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (j != i) log_den += std::log(alpha[j]);
        q[i] = std::exp((log_num - log_den) / (2.0 * static_cast<double>(d) - 4.0));
    }
    return q;
}

double spike_equation(double z, double beta, const RatioVector& c) {
    require_tensor_ratios(c);
    RealBranch rb(c);
    const double u = rb.u_of(z);
    return u - beta * q_prod(rb, u);
}

double inverse_snr_map(double z, const RatioVector& c) {
    require_tensor_ratios(c);
    RealBranch rb(c);
    if (!(z > rb.edge)) throw BelowEdgeError("lambda is not right of the bulk edge");
    return beta_of_u(rb, rb.u_of(z));
}

ThresholdReport threshold_report(const RatioVector& c, double tol) {
    (void)tol;
    if (c.is_matrix_embedding()) {
        const double cm = c.matrix_ratio();
        ThresholdReport r;
        r.beta_s = r.edge_candidate = r.fold_candidate = std::pow(cm * (1.0 - cm), 0.25);
        r.right_edge = r.fold_lambda = std::sqrt(1.0 + 2.0 * std::sqrt(cm * (1.0 - cm)));
        return r;
    }
    require_tensor_ratios(c);
    return fold_of(RealBranch(c)).report;
}

double compute_beta_s(const RatioVector& c, double tol) { return threshold_report(c, tol).beta_s; }

AsymptoticPrediction predict(double beta, const RatioVector& c) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    AsymptoticPrediction p;
    p.beta = beta;
    p.c = c;

    if (c.is_matrix_embedding()) {
        const auto m = predict_matrix(beta, c.matrix_ratio());
        p.lambda_inf = m.lambda_inf;
        p.beta_s = m.beta_s;
        p.right_edge = std::sqrt(1.0 + 2.0 * m.beta_s * m.beta_s);
        p.above_threshold = m.above_threshold;
        bool first = true;
        for (std::size_t i = 0; i < 3; ++i) {
            double a = 0.0;
            if (m.above_threshold) {
                if (c[i] == 0.0) {
                    a = 1.0;
                } else {
                    a = first ? m.align_x : m.align_y;
                }
            }
            if (c[i] != 0.0) first = false;
            p.alignments.push_back(a);
        }
        if (m.above_threshold) {
            const double z = m.lambda_inf;
            const double g = g_matrix_case(c.matrix_ratio(), cplx(z, 0.0)).real();
            p.f_residual = z + g - beta * m.align_x * m.align_y;
        }
        return p;
    }

    require_tensor_ratios(c);
    RealBranch rb(c);
    const auto fold = fold_of(rb);
    p.beta_s = fold.report.beta_s;
    p.right_edge = rb.edge;
    p.alignments.assign(c.order(), 0.0);
    if (beta <= p.beta_s) {
        p.lambda_inf = rb.edge;
        return p;
    }

    auto h = [&rb, beta](double u) { return beta_of_u(rb, u) - beta; };
    double lo = fold.u_min;
    double hi = std::max(lo + 1.0, beta);
    while (h(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    double u;
    if (h(lo) >= 0.0) {
        u = lo;
    } else {
        std::uintmax_t iters = 300;
        auto r = boost::math::tools::toms748_solve(h, lo, hi, h(lo), h(hi),
                                                   boost::math::tools::eps_tolerance<double>(53), iters);
        u = 0.5 * (r.first + r.second);
    }
    p.above_threshold = true;
    p.lambda_inf = rb.phi(u);
    for (std::size_t i = 0; i < c.order(); ++i) p.alignments[i] = q_at(rb, i, u);
    p.f_residual = u - beta * q_prod(rb, u);
    return p;
}

HypercubicThreshold hypercubic_beta_s(int d) {
    if (d < 3) throw std::invalid_argument("hypercubic threshold needs d >= 3");
    const double dd = d;
    const double bs = std::sqrt((dd - 1.0) / dd) * std::pow((dd - 2.0) / (dd - 1.0), 1.0 - dd / 2.0);
    return {bs, std::sqrt((dd - 2.0) / (dd - 1.0))};
}

double cubic_d3_beta_s() { return 2.0 * std::sqrt(3.0) / 3.0; }

CubicPrediction predict_cubic_d3(double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    if (beta <= cubic_d3_beta_s()) return {2.0 * std::sqrt(2.0 / 3.0), 0.0, false};
    const double b2 = beta * beta;
    const double k = 3.0 * b2 - 4.0;
    const double s = std::sqrt(3.0) * std::sqrt(k * k * k) / beta;
    const double lambda = std::sqrt(b2 / 2.0 + 2.0 + s / 18.0);
    const double align = (std::sqrt(9.0 * b2 - 12.0 + s) + std::sqrt(9.0 * b2 + 36.0 + s)) / (6.0 * std::sqrt(2.0) * beta);
    return {lambda, align, true};
}

CubicPrediction cubic_d3_expansion(double beta) {
    const double delta = beta - cubic_d3_beta_s();
    if (delta < 0.0) throw std::invalid_argument("expansion holds for beta >= beta_s");
    const double r2 = std::sqrt(2.0), r6 = std::sqrt(6.0);
    const double q3 = std::pow(3.0, 0.25), q33 = std::pow(3.0, 0.75);
    const double sd = std::sqrt(delta);
    const double lambda = 2.0 * std::sqrt(2.0 / 3.0) + r2 / 4.0 * delta + r2 * q3 / 4.0 * delta * sd +
                          3.0 * r6 / 64.0 * delta * delta;
    const double align = r2 / 2.0 + r2 * q3 / 4.0 * sd - r6 / 16.0 * delta - r2 * q33 / 16.0 * delta * sd +
                         21.0 * r2 / 256.0 * delta * delta;
    return {lambda, align, true};
}

double matrix_kappa(double beta, double c) {
    const double b2 = beta * beta;
    const double den = (b2 * b2 + c * (c - 1.0)) * (b2 + 1.0 - c);
    if (!(den > 0.0)) throw std::domain_error("kappa undefined at or below the matrix threshold");
    return beta * std::sqrt((b2 * (b2 + 1.0) - c * (c - 1.0)) / den);
}

MatrixPrediction predict_matrix(double beta, double c) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("matrix ratio must lie in (0, 1)");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    const double eta = c * (1.0 - c);
    const double bs = std::pow(eta, 0.25);
    if (beta <= bs) return {std::sqrt(1.0 + 2.0 * std::sqrt(eta)), 0.0, 0.0, bs, false};
    const double b2 = beta * beta;
    if (!(b2 * b2 + c * (c - 1.0) > 0.0)) throw std::domain_error("matrix prediction outside its domain");
    return {std::sqrt(b2 + 1.0 + eta / b2), 1.0 / matrix_kappa(beta, c), 1.0 / matrix_kappa(beta, 1.0 - c), bs, true};
}

double estimate_snr_from_lambda(double lambda, const RatioVector& c) {
    if (c.is_matrix_embedding()) {
        const double cm = c.matrix_ratio();
        const double eta = cm * (1.0 - cm);
        const double edge = std::sqrt(1.0 + 2.0 * std::sqrt(eta));
        if (!(lambda > edge)) throw BelowEdgeError("lambda is not right of the bulk edge");
        const double a = lambda * lambda - 1.0;
        return std::sqrt((a + std::sqrt(std::max(0.0, a * a - 4.0 * eta))) / 2.0);
    }
    return inverse_snr_map(lambda, c);
}

double estimate_snr_order3(double lambda, const RatioVector& c) {
    if (c.order() != 3) throw std::invalid_argument("order-3 form needs d = 3");
    require_tensor_ratios(c);
    RealBranch rb(c);
    if (!(lambda > rb.edge)) throw BelowEdgeError("lambda is not right of the bulk edge");
    const double u = rb.u_of(lambda);
    double prod = 1.0;
    for (std::size_t i = 0; i < 3; ++i) prod *= u - rb.part(i, u);
    return std::sqrt(prod / u);
}

double unfolding_threshold(const Dims& dims) {
    if (dims.size() < 3) throw std::invalid_argument("unfolding threshold needs d >= 3");
    double log_prod = 0.0;
    for (auto n : dims) {
        if (n == 0) throw std::invalid_argument("dimensions must be positive");
        log_prod += std::log(static_cast<double>(n));
    }
    return std::exp(0.25 * log_prod) / std::sqrt(static_cast<double>(dims_sum(dims)));
}

UnfoldingMap unfolding_map(const Dims& dims, std::size_t mode) {
    if (mode >= dims.size()) throw std::invalid_argument("mode out of range");
    const double m = static_cast<double>(dims[mode]);
    double n = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (k != mode) n *= static_cast<double>(dims[k]);
    const double total = static_cast<double>(dims_sum(dims));
    return {m / (m + n), std::sqrt(total / (m + n))};
}

MatrixPrediction predict_unfolding(double beta, const Dims& dims, std::size_t mode) {
    const auto map = unfolding_map(dims, mode);
    auto p = predict_matrix(beta * map.beta_scale, map.c);
    p.lambda_inf /= map.beta_scale;
    p.beta_s /= map.beta_scale;
    return p;
}

}  // namespace spiked
