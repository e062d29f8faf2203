#include "spiked/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spiked {

Spectrum eig_sym(const Mat& m, bool want_vectors, Dims source_dims) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
    if (m.size() == 0) throw std::invalid_argument("empty matrix");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
    Spectrum s;
    s.eigenvalues = es.eigenvalues();
    if (want_vectors) s.eigenvectors = es.eigenvectors();
    s.source_dims = std::move(source_dims);
    return s;
}

Spectrum eig_sym(const BlockMatrix& m, bool want_vectors) { return eig_sym(m.data, want_vectors, m.block_dims); }

EmpiricalMeasure empirical_measure(const Spectrum& s, std::size_t bins, std::optional<std::pair<double, double>> range) {
    if (bins == 0) throw std::invalid_argument("need at least one bin");
    const auto& ev = s.eigenvalues;
    if (ev.size() == 0) throw std::invalid_argument("empty spectrum");
    double lo, hi;
    if (range) {
        std::tie(lo, hi) = *range;
        if (!(hi > lo)) throw std::invalid_argument("empty histogram range");
    } else {
        const double mn = ev.minCoeff(), mx = ev.maxCoeff();
        const double span = mx - mn;
        if (span > 0.0) {
            lo = mn - 0.05 * span;
            hi = mx + 0.05 * span;
        } else {
            lo = mn - 0.5;
            hi = mx + 0.5;
        }
    }
    EmpiricalMeasure em;
    const double width = (hi - lo) / static_cast<double>(bins);
    em.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) em.bin_edges[b] = lo + width * static_cast<double>(b);
    em.bin_edges[bins] = hi;
    std::vector<double> counts(bins, 0.0);
    std::size_t kept = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double x = ev[i];
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        counts[b] += 1.0;
        ++kept;
    }
    const double n = static_cast<double>(ev.size());
    em.densities.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) em.densities[b] = counts[b] / (n * width);
    em.total_mass = static_cast<double>(kept) / n;
    return em;
}

cplx empirical_stieltjes(const Spectrum& s, cplx z) {
    const auto& ev = s.eigenvalues;
    if (ev.size() == 0) throw std::invalid_argument("empty spectrum");
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const cplx d = ev[i] - z;
        if (std::abs(d) <= 1e-9) throw std::domain_error("z sits on an eigenvalue");
        acc += 1.0 / d;
    }
    return acc / static_cast<double>(ev.size());
}

double block_trace(const Spectrum& s, double z, std::size_t block) {
    if (!s.eigenvectors) throw std::invalid_argument("block trace needs eigenvectors");
    if (block >= s.source_dims.size()) throw std::invalid_argument("block index out of range");
    const auto& ev = s.eigenvalues;
    const auto& v = *s.eigenvectors;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (std::abs(ev[k] - z) < 1e-6) throw std::domain_error("z too close to the spectrum");
    std::size_t off = 0;
    for (std::size_t b = 0; b < block; ++b) off += s.source_dims[b];
    const auto n = static_cast<Eigen::Index>(s.source_dims[block]);
    const Vec weights = v.middleRows(static_cast<Eigen::Index>(off), n).colwise().squaredNorm();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) acc += weights[k] / (ev[k] - z);
    return acc / static_cast<double>(ev.size());
}

double block_trace(const BlockMatrix& m, double z, std::size_t block) {
    return block_trace(eig_sym(m, true), z, block);
}

double ks_distance(std::vector<double> ev, const LimitingMeasure& law) {
    if (ev.empty()) throw std::invalid_argument("empty spectrum");
    double scale = 0.0;
    for (double x : ev) scale = std::max(scale, std::abs(x));
    for (double& x : ev)
        if (std::abs(x) <= 1e-9 * scale) x = 0.0;
    std::sort(ev.begin(), ev.end());
    const double n = static_cast<double>(ev.size());
    const double atom = law.atom_at_zero();
    double d = 0.0;
    std::size_t i = 0;
    while (i < ev.size()) {
        std::size_t j = i;
        while (j < ev.size() && ev[j] == ev[i]) ++j;
        const double v = ev[i];
        const double f = law.cdf(v);
        const double f_left = (v == 0.0 && atom > 0.0) ? f - atom : f;
        d = std::max(d, std::abs(static_cast<double>(i) / n - f_left));
        d = std::max(d, std::abs(static_cast<double>(j) / n - f));
        i = j;
    }
    return d;
}

double ks_distance(const Spectrum& s, const LimitingMeasure& law) {
    return ks_distance(std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size()), law);
}

double ks_distance(const EmpiricalMeasure& em, const LimitingMeasure& law) {
    double acc = 0.0;
    double d = std::abs(acc - law.cdf(em.bin_edges.front()));
    for (std::size_t b = 0; b < em.densities.size(); ++b) {
        acc += em.densities[b] * (em.bin_edges[b + 1] - em.bin_edges[b]);
        d = std::max(d, std::abs(acc - law.cdf(em.bin_edges[b + 1])));
    }
    return d;
}

}  // namespace spiked
