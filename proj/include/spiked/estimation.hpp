#pragma once

#include "spiked/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spiked {

struct InitStrategy {
    enum class Kind { Random, Planted, Annealed };

    Kind kind = Kind::Random;
    std::uint64_t seed = 0;
    std::vector<Vec> planted;       // Planted: starting vectors, one per mode
    std::vector<double> beta_grid;  // Annealed: strictly decreasing

    static InitStrategy random(std::uint64_t seed);
    static InitStrategy planted_at(std::vector<Vec> vs);
    static InitStrategy annealed(std::vector<double> beta_grid, std::uint64_t seed);

    void validate() const;
};

std::string to_string(InitStrategy::Kind k);
InitStrategy::Kind parse_init_kind(const std::string& s);

struct PowerOptions {
    double tol = 1e-10;
    int max_sweeps = 1000;
    int max_restarts = 5;
};

// Cyclic higher-order power method. A sweep updates u_1..u_d in order, each
// set to its normalized all-but-one contraction. Converged when
//   max_i ||u_i - sign <u_i, u_i_old> u_i_old|| + |lambda - lambda_old| / max(1, lambda) <= tol
// and every critical-point residual is at most tol * max(1, lambda).
// Annealed strategies are rejected here; see annealed_power_iteration.
SingularTuple power_iteration(const DenseTensor& t, const InitStrategy& init, const PowerOptions& opts = {});

// Runs down a strictly decreasing beta grid; the first point starts from a
// random init (seed), each later point from the previous tuple.
using TensorBuilder = std::function<DenseTensor(double beta)>;
std::vector<SingularTuple> annealed_power_iteration(const TensorBuilder& build, const std::vector<double>& beta_grid,
                                                    std::uint64_t seed, const PowerOptions& opts = {});

// Mode-`mode` unfolding: n_mode rows, columns ordered row-major over the
// remaining modes in their original order.
Mat unfold(const DenseTensor& t, std::size_t mode);
DenseTensor refold(const Mat& m, const Dims& dims, std::size_t mode);

struct TopSingular {
    double sigma;
    Vec left;
    Vec right;
};
// Via the symmetric eigendecomposition of the Gram matrix of the shorter side.
TopSingular top_singular(const Mat& m);

// Sequential power iteration with rank-one deflation; results sorted by
// decreasing lambda. Stages that fail to converge keep converged = false.
std::vector<SingularTuple> deflate_orthogonal(const DenseTensor& t, std::size_t r, const std::vector<InitStrategy>& inits,
                                              const PowerOptions& opts = {});

// components[l][k] is the mode-k factor of spike l; factors are orthonormal
// across l within each mode (QR of a Gaussian n_k x r matrix).
struct OrthogonalSpikes {
    std::vector<double> betas;
    std::vector<std::vector<Vec>> components;
};
OrthogonalSpikes sample_orthogonal_spikes(const Dims& dims, const std::vector<double>& betas, std::uint64_t seed);
DenseTensor build_orthogonal_tensor(const OrthogonalSpikes& spikes, const Dims& dims, std::uint64_t seed);

}  // namespace spiked
