#pragma once

#include "spiked/tensor.hpp"

#include <stdexcept>

namespace spiked {

// Symmetric N x N matrix (N = sum n_i) whose (i, j) block is the tensor
// contracted with every vector except those in slots i and j. Diagonal
// blocks are zero.
struct BlockMatrix {
    std::size_t d = 0;
    Dims block_dims;
    std::vector<std::size_t> offsets;  // offsets[i] = n_1 + ... + n_{i-1}; offsets[d] = N
    Mat data;

    std::size_t size() const { return static_cast<std::size_t>(data.rows()); }
    Mat block(std::size_t i, std::size_t j) const;
};

// Order-2 inputs are embedded as order 3 with a trailing mode of size 1 and
// third vector (1).
BlockMatrix phi(const DenseTensor& t, const std::vector<Vec>& vs);

// (u_1; ...; u_d) / sqrt(d).
UnitVector stacked_singular_vector(const std::vector<Vec>& vs);

class NotCriticalError : public std::invalid_argument {
public:
    NotCriticalError(const std::string& what, std::vector<double> residuals)
        : std::invalid_argument(what), residuals(std::move(residuals)) {}
    std::vector<double> residuals;
};

struct LocalityReport {
    double top = 0.0;
    double second = 0.0;
    double expected_top = 0.0;   // (d - 1) lambda
    double spike_residual = 0.0; // ||Phi h - (d - 1) lambda h|| for the stacked unit h
    bool is_local_max_candidate = false;
};

// Rejects lambda < 0 (std::invalid_argument) and tuples whose critical-point
// residuals exceed critical_tol (NotCriticalError).
LocalityReport hessian_locality_check(const DenseTensor& t, const SingularTuple& tuple, double tol = 1e-8,
                                      double critical_tol = 1e-6);

}  // namespace spiked
