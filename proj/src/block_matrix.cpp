#include "spiked/block_matrix.hpp"

#include <cmath>
#include <sstream>

namespace spiked {

Mat BlockMatrix::block(std::size_t i, std::size_t j) const {
    if (i >= d || j >= d) throw std::invalid_argument("block index out of range");
    return data.block(static_cast<Eigen::Index>(offsets[i]), static_cast<Eigen::Index>(offsets[j]),
                      static_cast<Eigen::Index>(block_dims[i]), static_cast<Eigen::Index>(block_dims[j]));
}

BlockMatrix phi(const DenseTensor& t, const std::vector<Vec>& vs) {
    if (t.order() < 2) throw std::invalid_argument("phi needs an order >= 2 tensor");
    if (vs.size() != t.order()) throw std::invalid_argument("expected one vector per mode");
    for (std::size_t k = 0; k < t.order(); ++k)
        if (static_cast<std::size_t>(vs[k].size()) != t.dim(k)) throw std::invalid_argument("vector dimension mismatch");

    if (t.order() == 2) {
        Dims dims = t.dims();
        dims.push_back(1);
        std::vector<Vec> ext = vs;
        ext.push_back(Vec::Ones(1));
        return phi(DenseTensor(dims, t.data()), ext);
    }

    BlockMatrix b;
    b.d = t.order();
    b.block_dims = t.dims();
    b.offsets.assign(b.d + 1, 0);
    for (std::size_t i = 0; i < b.d; ++i) b.offsets[i + 1] = b.offsets[i] + b.block_dims[i];
    const auto n = static_cast<Eigen::Index>(b.offsets[b.d]);
    b.data = Mat::Zero(n, n);
    for (std::size_t i = 0; i < b.d; ++i) {
        for (std::size_t j = i + 1; j < b.d; ++j) {
            Mat blk = contract_all_but_two(t, vs, i, j);
            const auto oi = static_cast<Eigen::Index>(b.offsets[i]);
            const auto oj = static_cast<Eigen::Index>(b.offsets[j]);
            b.data.block(oi, oj, blk.rows(), blk.cols()) = blk;
            b.data.block(oj, oi, blk.cols(), blk.rows()) = blk.transpose();
        }
    }
    return b;
}

UnitVector stacked_singular_vector(const std::vector<Vec>& vs) {
    if (vs.empty()) throw std::invalid_argument("no vectors to stack");
    Eigen::Index n = 0;
    for (const auto& v : vs) n += v.size();
    Vec h(n);
    Eigen::Index off = 0;
    for (const auto& v : vs) {
        h.segment(off, v.size()) = v;
        off += v.size();
    }
    return UnitVector::normalized(h);
}

LocalityReport hessian_locality_check(const DenseTensor& t, const SingularTuple& tuple, double tol,
                                      double critical_tol) {
    if (t.order() < 3) throw std::invalid_argument("locality check needs an order >= 3 tensor");
    if (tuple.lambda < 0.0) throw std::invalid_argument("singular value must be nonnegative");
    if (tuple.vectors.size() != t.order()) throw std::invalid_argument("expected one vector per mode");

    auto res = critical_residuals(t, tuple.lambda, tuple.vectors);
    for (double r : res) {
        if (!(r <= critical_tol)) {
            std::ostringstream msg;
            msg << "tuple is not a critical point; residuals:";
            for (double x : res) msg << ' ' << x;
            throw NotCriticalError(msg.str(), res);
        }
    }

    auto m = phi(t, tuple.vectors);
    Eigen::SelfAdjointEigenSolver<Mat> es(m.data, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    LocalityReport r;
    r.top = ev[ev.size() - 1];
    r.second = ev.size() > 1 ? ev[ev.size() - 2] : r.top;
    r.expected_top = static_cast<double>(t.order() - 1) * tuple.lambda;
    const UnitVector h = stacked_singular_vector(tuple.vectors);
    r.spike_residual = (m.data * h.vec() - r.expected_top * h.vec()).norm();
    r.is_local_max_candidate = std::abs(r.top - r.expected_top) <= tol && r.second <= tuple.lambda + tol;
    return r;
}

}  // namespace spiked
