#include "spiked/tensor.hpp"
#include "spiked/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spiked {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_dims(const Dims& dims) {
    if (dims.empty()) throw std::invalid_argument("tensor needs at least one mode");
    for (auto n : dims)
        if (n == 0) throw std::invalid_argument("tensor dimensions must be positive");
}

// Working buffer for successive contractions; `modes` maps to original modes.
struct Work {
    Dims dims;
    std::vector<std::size_t> modes;
    std::vector<double> data;
};

std::vector<double> contract_buffer(const std::vector<double>& data, const Dims& dims, std::size_t k,
                                    const Vec& v) {
    std::size_t a = 1, b = 1;
    for (std::size_t m = 0; m < k; ++m) a *= dims[m];
    for (std::size_t m = k + 1; m < dims.size(); ++m) b *= dims[m];
    const auto nk = dims[k];
    std::vector<double> out(a * b);
    if (b == 1) {
        Eigen::Map<const RowMat> m(data.data(), a, nk);
        Eigen::Map<Vec>(out.data(), a) = m * v;
    } else if (a == 1) {
        Eigen::Map<const RowMat> m(data.data(), nk, b);
        Eigen::Map<Vec>(out.data(), b) = m.transpose() * v;
    } else {
        for (std::size_t i = 0; i < a; ++i) {
            Eigen::Map<const RowMat> m(data.data() + i * nk * b, nk, b);
            Eigen::Map<Vec>(out.data() + i * b, b) = m.transpose() * v;
        }
    }
    return out;
}

void contract_step(Work& w, std::size_t pos, const Vec& v) {
    w.data = contract_buffer(w.data, w.dims, pos, v);
    w.dims.erase(w.dims.begin() + static_cast<long>(pos));
    w.modes.erase(w.modes.begin() + static_cast<long>(pos));
}

// Contract every mode not in `keep`, one mode at a time. The last remaining
// mode is preferred since it is a contiguous matvec, then the first.
Work contract_except(const DenseTensor& t, const std::vector<Vec>& vs, const std::vector<std::size_t>& keep) {
    const auto d = t.order();
    if (vs.size() != d) throw std::invalid_argument("expected one vector per mode");
    auto kept = [&](std::size_t m) { return std::find(keep.begin(), keep.end(), m) != keep.end(); };
    for (std::size_t m = 0; m < d; ++m) {
        if (kept(m)) continue;
        if (static_cast<std::size_t>(vs[m].size()) != t.dim(m))
            throw std::invalid_argument("vector length does not match mode " + std::to_string(m));
    }
    Work w{t.dims(), {}, {}};
    w.modes.resize(d);
    std::iota(w.modes.begin(), w.modes.end(), std::size_t{0});
    bool copied = false;
    while (w.dims.size() > keep.size()) {
        std::size_t pos;
        if (!kept(w.modes.back())) {
            pos = w.dims.size() - 1;
        } else if (!kept(w.modes.front())) {
            pos = 0;
        } else {
            pos = 1;
            while (kept(w.modes[pos])) ++pos;
        }
        const Vec& v = vs[w.modes[pos]];
        if (!copied) {
            w.data = contract_buffer(t.data(), w.dims, pos, v);
            w.dims.erase(w.dims.begin() + static_cast<long>(pos));
            w.modes.erase(w.modes.begin() + static_cast<long>(pos));
            copied = true;
        } else {
            contract_step(w, pos, v);
        }
    }
    if (!copied) w.data = t.data();
    return w;
}

}  // namespace

std::size_t dims_product(const Dims& dims) {
    std::size_t p = 1;
    for (auto n : dims) p *= n;
    return p;
}

std::size_t dims_sum(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(dims_product(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != dims_product(dims_))
        throw std::invalid_argument("data length does not match the product of dims");
}

std::size_t DenseTensor::offset(const std::vector<std::size_t>& index) const {
    if (index.size() != order()) throw std::invalid_argument("index has wrong order");
    std::size_t off = 0;
    for (std::size_t k = 0; k < order(); ++k) {
        if (index[k] >= dims_[k]) throw std::out_of_range("tensor index out of range");
        off = off * dims_[k] + index[k];
    }
    return off;
}

std::vector<std::size_t> DenseTensor::multi_index(std::size_t off) const {
    std::vector<std::size_t> idx(order());
    for (std::size_t k = order(); k-- > 0;) {
        idx[k] = off % dims_[k];
        off /= dims_[k];
    }
    return idx;
}

double DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
    return data_[offset(std::vector<std::size_t>(index))];
}

double& DenseTensor::operator()(std::initializer_list<std::size_t> index) {
    return data_[offset(std::vector<std::size_t>(index))];
}

DenseTensor& DenseTensor::operator*=(double s) {
    for (auto& x : data_) x *= s;
    return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (other.dims_ != dims_) throw std::invalid_argument("tensor dims differ");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

double DenseTensor::frobenius_norm() const {
    return Eigen::Map<const Vec>(data_.data(), static_cast<Eigen::Index>(data_.size())).norm();
}

bool DenseTensor::is_zero() const {
    for (double x : data_)
        if (x != 0.0) return false;
    return true;
}

DenseTensor DenseTensor::permuted(const std::vector<std::size_t>& perm) const {
    const auto d = order();
    if (perm.size() != d) throw std::invalid_argument("permutation has wrong length");
    std::vector<bool> seen(d, false);
    for (auto p : perm) {
        if (p >= d || seen[p]) throw std::invalid_argument("not a permutation");
        seen[p] = true;
    }
    Dims nd(d);
    for (std::size_t k = 0; k < d; ++k) nd[k] = dims_[perm[k]];
    DenseTensor out(nd);
    std::vector<std::size_t> src(d);
    for (std::size_t off = 0; off < out.size(); ++off) {
        auto j = out.multi_index(off);
        for (std::size_t k = 0; k < d; ++k) src[perm[k]] = j[k];
        out.data_[off] = data_[offset(src)];
    }
    return out;
}

DenseTensor operator*(double s, DenseTensor t) {
    t *= s;
    return t;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) {
    a += b;
    return a;
}

UnitVector::UnitVector(Vec v) : v_(std::move(v)) {
    if (v_.size() == 0) throw std::invalid_argument("unit vector must have positive dimension");
    if (std::abs(v_.norm() - 1.0) > 1e-12) throw std::invalid_argument("vector is not unit norm");
}

UnitVector UnitVector::normalized(const Vec& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero vector");
    return UnitVector(v / n);
}

UnitVector UnitVector::basis(std::size_t dim, std::size_t i) {
    if (i >= dim) throw std::invalid_argument("basis index out of range");
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(i)] = 1.0;
    return UnitVector(std::move(v));
}

UnitVector UnitVector::random(std::size_t dim, std::uint64_t seed, std::uint64_t stream_id) {
    auto g = normal_vector(dim, seed, stream_id);
    return normalized(Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(dim)));
}

std::vector<Vec> as_vecs(const std::vector<UnitVector>& vs) {
    std::vector<Vec> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(v.vec());
    return out;
}

double SpikeModel::noise_scale() const {
    return 1.0 / std::sqrt(static_cast<double>(dims_sum(dims)));
}

void SpikeModel::validate() const {
    check_dims(dims);
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    if (components.size() != dims.size()) throw std::invalid_argument("need one component per mode");
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (components[k].dim() != dims[k]) throw std::invalid_argument("component dimension mismatch");
}

SpikeModel SpikeModel::random(double beta, const Dims& dims, std::uint64_t seed) {
    SpikeModel m;
    m.beta = beta;
    m.dims = dims;
    for (std::size_t k = 0; k < dims.size(); ++k)
        m.components.push_back(UnitVector::random(dims[k], seed, streams::component_base + k));
    m.validate();
    return m;
}

DenseTensor sample_gaussian_tensor(const Dims& dims, std::uint64_t seed) {
    check_dims(dims);
    return DenseTensor(dims, normal_vector(dims_product(dims), seed, streams::noise));
}

DenseTensor build_spiked_tensor(const SpikeModel& model, std::uint64_t seed) {
    model.validate();
    return build_spiked_tensor(model, sample_gaussian_tensor(model.dims, seed));
}

DenseTensor build_spiked_tensor(const SpikeModel& model, const DenseTensor& noise) {
    model.validate();
    if (noise.dims() != model.dims) throw std::invalid_argument("noise dims do not match the model");
    DenseTensor t = noise;
    t *= model.noise_scale();
    if (model.beta != 0.0) add_rank_one(t, model.beta, as_vecs(model.components));
    return t;
}

DenseTensor rank_one_tensor(const std::vector<Vec>& vs) {
    Dims dims;
    for (const auto& v : vs) dims.push_back(static_cast<std::size_t>(v.size()));
    DenseTensor t(dims);
    add_rank_one(t, 1.0, vs);
    return t;
}

void add_rank_one(DenseTensor& t, double weight, const std::vector<Vec>& vs) {
    const auto d = t.order();
    if (vs.size() != d) throw std::invalid_argument("expected one vector per mode");
    for (std::size_t k = 0; k < d; ++k)
        if (static_cast<std::size_t>(vs[k].size()) != t.dim(k))
            throw std::invalid_argument("rank-one factor dimension mismatch");
    // Outer product built mode by mode into the trailing block.
    std::vector<double> acc{weight};
    for (std::size_t k = 0; k < d; ++k) {
        const auto n = t.dim(k);
        std::vector<double> next(acc.size() * n);
        for (std::size_t a = 0; a < acc.size(); ++a)
            for (std::size_t i = 0; i < n; ++i) next[a * n + i] = acc[a] * vs[k][static_cast<Eigen::Index>(i)];
        acc.swap(next);
    }
    auto& data = t.data();
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += acc[k];
}

DenseTensor contract_mode(const DenseTensor& t, std::size_t mode, const Vec& v) {
    if (mode >= t.order()) throw std::invalid_argument("mode out of range");
    if (t.order() < 2) throw std::invalid_argument("cannot contract an order-1 tensor to a tensor");
    if (static_cast<std::size_t>(v.size()) != t.dim(mode)) throw std::invalid_argument("vector length mismatch");
    Dims nd = t.dims();
    nd.erase(nd.begin() + static_cast<long>(mode));
    return DenseTensor(nd, contract_buffer(t.data(), t.dims(), mode, v));
}

Vec contract_all_but_one(const DenseTensor& t, const std::vector<Vec>& vs, std::size_t hole) {
    if (hole >= t.order()) throw std::invalid_argument("hole out of range");
    auto w = contract_except(t, vs, {hole});
    return Eigen::Map<const Vec>(w.data.data(), static_cast<Eigen::Index>(w.data.size()));
}

double contract_full(const DenseTensor& t, const std::vector<Vec>& vs) {
    if (vs.size() != t.order()) throw std::invalid_argument("expected one vector per mode");
    if (static_cast<std::size_t>(vs[0].size()) != t.dim(0)) throw std::invalid_argument("vector length mismatch");
    return contract_all_but_one(t, vs, 0).dot(vs[0]);
}

Mat contract_all_but_two(const DenseTensor& t, const std::vector<Vec>& vs, std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("holes must differ");
    if (i > j) throw std::invalid_argument("holes must be ordered i < j");
    if (j >= t.order()) throw std::invalid_argument("hole out of range");
    auto w = contract_except(t, vs, {i, j});
    const auto ni = t.dim(i), nj = t.dim(j);
    return Eigen::Map<const RowMat>(w.data.data(), static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(nj));
}

std::vector<double> critical_residuals(const DenseTensor& t, double lambda, const std::vector<Vec>& vs) {
    std::vector<double> r(t.order());
    for (std::size_t i = 0; i < t.order(); ++i) r[i] = (contract_all_but_one(t, vs, i) - lambda * vs[i]).norm();
    return r;
}

double spectral_norm_bound(const Dims& dims, double delta) {
    check_dims(dims);
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
    const double d = static_cast<double>(dims.size());
    const double n = static_cast<double>(dims_sum(dims));
    return std::sqrt(2.0 * (n * std::log(2.0 * d / std::log(1.5)) + std::log(2.0 / delta)));
}

}  // namespace spiked
