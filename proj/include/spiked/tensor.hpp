#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace spiked {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Dims = std::vector<std::size_t>;

std::size_t dims_product(const Dims& dims);
std::size_t dims_sum(const Dims& dims);

// Order-d real tensor, row-major with the last index fastest:
//   offset(i_1..i_d) = ((i_1 * n_2 + i_2) * n_3 + i_3) ... * n_d + i_d
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Dims dims);
    DenseTensor(Dims dims, std::vector<double> data);

    std::size_t order() const { return dims_.size(); }
    const Dims& dims() const { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    std::size_t offset(const std::vector<std::size_t>& index) const;
    std::vector<std::size_t> multi_index(std::size_t offset) const;

    double operator()(std::initializer_list<std::size_t> index) const;
    double& operator()(std::initializer_list<std::size_t> index);

    DenseTensor& operator*=(double s);
    DenseTensor& operator+=(const DenseTensor& other);

    double frobenius_norm() const;
    bool is_zero() const;

    // Result has dims (n_perm[0], ..., n_perm[d-1]); entry (j_1..j_d) equals
    // this at the index with i_perm[k] = j_k.
    DenseTensor permuted(const std::vector<std::size_t>& perm) const;

private:
    Dims dims_;
    std::vector<double> data_;
};

DenseTensor operator*(double s, DenseTensor t);
DenseTensor operator+(DenseTensor a, const DenseTensor& b);

class UnitVector {
public:
    UnitVector() = default;
    // Throws std::invalid_argument unless the norm is 1 within 1e-12.
    explicit UnitVector(Vec v);

    static UnitVector normalized(const Vec& v);
    static UnitVector basis(std::size_t dim, std::size_t i);
    // Uniform on the sphere: a normalized Gaussian draw.
    static UnitVector random(std::size_t dim, std::uint64_t seed, std::uint64_t stream_id);

    std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
    const Vec& vec() const { return v_; }
    operator const Vec&() const { return v_; }
    double operator[](std::size_t i) const { return v_[static_cast<Eigen::Index>(i)]; }

private:
    Vec v_;
};

std::vector<Vec> as_vecs(const std::vector<UnitVector>& vs);

struct SpikeModel {
    double beta = 0.0;
    std::vector<UnitVector> components;
    Dims dims;

    double noise_scale() const;
    void validate() const;

    // Components drawn uniformly on the spheres from `seed`.
    static SpikeModel random(double beta, const Dims& dims, std::uint64_t seed);
};

// A critical point (lambda, u_1..u_d) of the best rank-one problem.
struct SingularTuple {
    double lambda = 0.0;
    std::vector<Vec> vectors;
    std::vector<double> residuals;  // ||T(u_1, .., :, .., u_d) - lambda u_i|| per mode
    int iterations = 0;
    int restarts = 0;
    bool converged = false;
};

std::vector<double> critical_residuals(const DenseTensor& t, double lambda, const std::vector<Vec>& vs);

DenseTensor sample_gaussian_tensor(const Dims& dims, std::uint64_t seed);

// beta * x1 (x) ... (x) xd + noise / sqrt(N), N = sum of dims.
DenseTensor build_spiked_tensor(const SpikeModel& model, std::uint64_t seed);
DenseTensor build_spiked_tensor(const SpikeModel& model, const DenseTensor& noise);

DenseTensor rank_one_tensor(const std::vector<Vec>& vs);
void add_rank_one(DenseTensor& t, double weight, const std::vector<Vec>& vs);

// Modes are 0-based. Vectors need not be unit for the contractions.
DenseTensor contract_mode(const DenseTensor& t, std::size_t mode, const Vec& v);
double contract_full(const DenseTensor& t, const std::vector<Vec>& vs);
Vec contract_all_but_one(const DenseTensor& t, const std::vector<Vec>& vs, std::size_t hole);
Mat contract_all_but_two(const DenseTensor& t, const std::vector<Vec>& vs, std::size_t i, std::size_t j);

// High-probability ceiling on the spectral norm of a standard Gaussian tensor.
double spectral_norm_bound(const Dims& dims, double delta);

}  // namespace spiked
