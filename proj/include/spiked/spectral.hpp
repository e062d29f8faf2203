#pragma once

#include "spiked/block_matrix.hpp"
#include "spiked/stieltjes.hpp"

#include <optional>
#include <utility>

namespace spiked {

struct Spectrum {
    Vec eigenvalues;                 // ascending
    std::optional<Mat> eigenvectors; // columns, orthonormal
    Dims source_dims;                // block sizes when built from a BlockMatrix
};

// Throws std::invalid_argument when m is not symmetric to 1e-10 relative.
Spectrum eig_sym(const Mat& m, bool want_vectors, Dims source_dims = {});
Spectrum eig_sym(const BlockMatrix& m, bool want_vectors);

struct EmpiricalMeasure {
    std::vector<double> bin_edges;  // B + 1
    std::vector<double> densities;  // B
    double total_mass = 0.0;
};

// Normalized histogram; eigenvalues outside an explicit range are dropped
// and total_mass is the fraction kept. The last bin is closed on the right.
EmpiricalMeasure empirical_measure(const Spectrum& s, std::size_t bins = 100,
                                   std::optional<std::pair<double, double>> range = std::nullopt);

// (1/n) sum 1 / (lambda_i - z). Real z within 1e-9 of an eigenvalue is a pole
// (std::domain_error).
cplx empirical_stieltjes(const Spectrum& s, cplx z);

// (1/N) tr of the i-th diagonal block of (M - z I)^{-1}; needs eigenvectors
// and block dims. z must sit at least 1e-6 away from the spectrum.
double block_trace(const Spectrum& s, double z, std::size_t block);
double block_trace(const BlockMatrix& m, double z, std::size_t block);

// sup |F_emp - F| over the eigenvalues, both one-sided limits at each
// distinct eigenvalue. Eigenvalues within 1e-9 max|lambda| of zero are
// treated as exactly zero so they line up with an atom there.
double ks_distance(std::vector<double> eigenvalues, const LimitingMeasure& law);
double ks_distance(const Spectrum& s, const LimitingMeasure& law);
// Histogram form: compares the two CDFs at the bin edges.
double ks_distance(const EmpiricalMeasure& em, const LimitingMeasure& law);

}  // namespace spiked
