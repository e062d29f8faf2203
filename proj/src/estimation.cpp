#include "spiked/estimation.hpp"
#include "spiked/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spiked {

namespace {

std::vector<Vec> random_start(const DenseTensor& t, std::uint64_t seed, int restart) {
    std::vector<Vec> vs;
    for (std::size_t k = 0; k < t.order(); ++k)
        vs.push_back(UnitVector::random(t.dim(k), seed, streams::init_base + k + 0x10 * static_cast<std::uint64_t>(restart)).vec());
    return vs;
}

}  // namespace

InitStrategy InitStrategy::random(std::uint64_t seed) {
    InitStrategy s;
    s.kind = Kind::Random;
    s.seed = seed;
    return s;
}

InitStrategy InitStrategy::planted_at(std::vector<Vec> vs) {
    InitStrategy s;
    s.kind = Kind::Planted;
    s.planted = std::move(vs);
    return s;
}

InitStrategy InitStrategy::annealed(std::vector<double> beta_grid, std::uint64_t seed) {
    InitStrategy s;
    s.kind = Kind::Annealed;
    s.beta_grid = std::move(beta_grid);
    s.seed = seed;
    s.validate();
    return s;
}

void InitStrategy::validate() const {
    if (kind == Kind::Planted && planted.empty()) throw std::invalid_argument("planted init needs vectors");
    if (kind == Kind::Annealed) {
        if (beta_grid.empty()) throw std::invalid_argument("annealed init needs a beta grid");
        for (std::size_t k = 1; k < beta_grid.size(); ++k)
            if (!(beta_grid[k] < beta_grid[k - 1])) throw std::invalid_argument("annealing grid must strictly decrease");
    }
}

std::string to_string(InitStrategy::Kind k) {
    switch (k) {
    case InitStrategy::Kind::Random: return "random";
    case InitStrategy::Kind::Planted: return "planted";
    case InitStrategy::Kind::Annealed: return "annealed";
    }
    return "random";
}

InitStrategy::Kind parse_init_kind(const std::string& s) {
    if (s == "random") return InitStrategy::Kind::Random;
    if (s == "planted") return InitStrategy::Kind::Planted;
    if (s == "annealed") return InitStrategy::Kind::Annealed;
    throw std::invalid_argument("unknown init strategy: " + s);
}

SingularTuple power_iteration(const DenseTensor& t, const InitStrategy& init, const PowerOptions& opts) {
    init.validate();
    const auto d = t.order();
    if (d < 2) throw std::invalid_argument("power iteration needs an order >= 2 tensor");
    if (t.is_zero()) throw std::invalid_argument("power iteration needs a nonzero tensor");
    if (init.kind == InitStrategy::Kind::Annealed)
        throw std::invalid_argument("annealed init runs through annealed_power_iteration");

    std::vector<Vec> vs;
    if (init.kind == InitStrategy::Kind::Planted) {
        if (init.planted.size() != d) throw std::invalid_argument("planted init needs one vector per mode");
        for (std::size_t k = 0; k < d; ++k) {
            if (static_cast<std::size_t>(init.planted[k].size()) != t.dim(k))
                throw std::invalid_argument("planted vector dimension mismatch");
            vs.push_back(UnitVector::normalized(init.planted[k]).vec());
        }
    } else {
        vs = random_start(t, init.seed, 0);
    }

    SingularTuple out;
    double lambda_old = contract_full(t, vs);
    int sweep = 0;
    while (sweep < opts.max_sweeps) {
        ++sweep;
        const auto old = vs;
        double lambda = 0.0;
        bool degenerate = false;
        for (std::size_t i = 0; i < d; ++i) {
            Vec c = contract_all_but_one(t, vs, i);
            const double nrm = c.norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                degenerate = true;
                break;
            }
            vs[i] = c / nrm;
            lambda = nrm;  // <c, c / |c|> for the last mode is T(u_1, ..., u_d)
        }
        if (degenerate) {
            if (out.restarts >= opts.max_restarts) {
                out.vectors = vs;
                out.lambda = 0.0;
                out.iterations = sweep;
                out.residuals.assign(d, std::numeric_limits<double>::quiet_NaN());
                out.converged = false;
                return out;
            }
            ++out.restarts;
            vs = random_start(t, init.seed, out.restarts);
            lambda_old = contract_full(t, vs);
            continue;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double s = vs[i].dot(old[i]) >= 0.0 ? 1.0 : -1.0;
            change = std::max(change, (vs[i] - s * old[i]).norm());
        }
        change += std::abs(lambda - lambda_old) / std::max(1.0, lambda);
        lambda_old = lambda;
        if (change <= opts.tol) {
            auto res = critical_residuals(t, lambda, vs);
            if (*std::max_element(res.begin(), res.end()) <= opts.tol * std::max(1.0, lambda)) {
                out.converged = true;
                break;
            }
        }
    }

    out.lambda = contract_full(t, vs);
    if (out.lambda < 0.0) {
        vs[0] = -vs[0];
        out.lambda = -out.lambda;
    }
    out.vectors = vs;
    out.iterations = sweep;
    out.residuals = critical_residuals(t, out.lambda, vs);
    return out;
}

std::vector<SingularTuple> annealed_power_iteration(const TensorBuilder& build, const std::vector<double>& beta_grid,
                                                    std::uint64_t seed, const PowerOptions& opts) {
    InitStrategy::annealed(beta_grid, seed);  // validates the grid
    std::vector<SingularTuple> out;
    for (std::size_t k = 0; k < beta_grid.size(); ++k) {
        const DenseTensor t = build(beta_grid[k]);
        const InitStrategy init = k == 0 ? InitStrategy::random(seed) : InitStrategy::planted_at(out.back().vectors);
        out.push_back(power_iteration(t, init, opts));
    }
    return out;
}

Mat unfold(const DenseTensor& t, std::size_t mode) {
    if (mode >= t.order()) throw std::invalid_argument("mode out of range");
    std::vector<std::size_t> perm{mode};
    for (std::size_t k = 0; k < t.order(); ++k)
        if (k != mode) perm.push_back(k);
    const DenseTensor p = mode == 0 ? t : t.permuted(perm);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(t.dim(mode));
    const auto cols = static_cast<Eigen::Index>(t.size()) / rows;
    return Eigen::Map<const RowMat>(p.data().data(), rows, cols);
}

DenseTensor refold(const Mat& m, const Dims& dims, std::size_t mode) {
    if (mode >= dims.size()) throw std::invalid_argument("mode out of range");
    if (static_cast<std::size_t>(m.rows()) != dims[mode] || static_cast<std::size_t>(m.size()) != dims_product(dims))
        throw std::invalid_argument("matrix shape does not match dims");
    Dims pd{dims[mode]};
    std::vector<std::size_t> perm{mode};
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (k != mode) {
            pd.push_back(dims[k]);
            perm.push_back(k);
        }
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMat r = m;
    DenseTensor p(pd, std::vector<double>(r.data(), r.data() + r.size()));
    if (mode == 0) return p;
    // inverse permutation
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
    return p.permuted(inv);
}

TopSingular top_singular(const Mat& m) {
    if (m.size() == 0) throw std::invalid_argument("empty matrix");
    const bool wide = m.rows() <= m.cols();
    const Mat gram = wide ? Mat(m * m.transpose()) : Mat(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed on Gram matrix");
    const auto k = gram.rows() - 1;
    const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()[k]));
    const Vec top = es.eigenvectors().col(k);
    TopSingular out;
    out.sigma = sigma;
    if (wide) {
        out.left = top;
        out.right = sigma > 0.0 ? Vec(m.transpose() * top / sigma) : Vec::Zero(m.cols());
    } else {
        out.right = top;
        out.left = sigma > 0.0 ? Vec(m * top / sigma) : Vec::Zero(m.rows());
    }
    return out;
}

std::vector<SingularTuple> deflate_orthogonal(const DenseTensor& t, std::size_t r, const std::vector<InitStrategy>& inits,
                                              const PowerOptions& opts) {
    if (r == 0) throw std::invalid_argument("rank must be at least 1");
    if (inits.size() != r) throw std::invalid_argument("need one init strategy per component");
    DenseTensor rest = t;
    std::vector<SingularTuple> out;
    for (std::size_t l = 0; l < r; ++l) {
        auto tup = power_iteration(rest, inits[l], opts);
        add_rank_one(rest, -tup.lambda, tup.vectors);
        out.push_back(std::move(tup));
    }
    std::stable_sort(out.begin(), out.end(), [](const SingularTuple& a, const SingularTuple& b) { return a.lambda > b.lambda; });
    return out;
}

OrthogonalSpikes sample_orthogonal_spikes(const Dims& dims, const std::vector<double>& betas, std::uint64_t seed) {
    const auto r = betas.size();
    for (auto n : dims)
        if (n < r) throw std::invalid_argument("rank exceeds a mode dimension");
    OrthogonalSpikes s;
    s.betas = betas;
    s.components.assign(r, std::vector<Vec>(dims.size()));
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const auto n = static_cast<Eigen::Index>(dims[k]);
        auto g = normal_vector(dims[k] * r, seed, streams::component_base + k);
        Mat a = Eigen::Map<const Mat>(g.data(), n, static_cast<Eigen::Index>(r));
        Eigen::HouseholderQR<Mat> qr(a);
        Mat q = qr.householderQ() * Mat::Identity(n, static_cast<Eigen::Index>(r));
        for (std::size_t l = 0; l < r; ++l) s.components[l][k] = q.col(static_cast<Eigen::Index>(l));
    }
    return s;
}

DenseTensor build_orthogonal_tensor(const OrthogonalSpikes& spikes, const Dims& dims, std::uint64_t seed) {
    DenseTensor t = sample_gaussian_tensor(dims, seed);
    t *= 1.0 / std::sqrt(static_cast<double>(dims_sum(dims)));
    for (std::size_t l = 0; l < spikes.betas.size(); ++l) add_rank_one(t, spikes.betas[l], spikes.components[l]);
    return t;
}

}  // namespace spiked
