#pragma once

#include "spiked/stieltjes.hpp"

#include <string>
#include <vector>

namespace spiked {

class BelowEdgeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct AsymptoticPrediction {
    double beta = 0.0;
    RatioVector c;
    double lambda_inf = 0.0;
    std::vector<double> alignments;
    double beta_s = 0.0;
    double right_edge = 0.0;
    bool above_threshold = false;
    double f_residual = 0.0;  // z + g(z) - beta prod q_i(z) at lambda_inf
};

// alpha_i(z) = beta / (z + g(z) - g_i(z)) and q_i(z) = sqrt(1 - g_i(z)^2 / c_i)
// for real z right of the edge.
struct AlignmentFunctions {
    std::vector<double> alpha;
    std::vector<double> q;
};

AlignmentFunctions alignment_functions(double beta, const RatioVector& c, double z);

// q_i = (alpha_i^(d-3) / prod_{j != i} alpha_j)^(1/(2d-4)); valid at the
// spike location lambda_inf(beta), d >= 3.
std::vector<double> alignments_from_alpha(const std::vector<double>& alpha);

// f(z, beta) = z + g(z) - beta prod_i q_i(z).
double spike_equation(double z, double beta, const RatioVector& c);

// Inverse map beta(z) = (z + g(z)) / prod_i q_i(z), z > edge.
double inverse_snr_map(double z, const RatioVector& c);

AsymptoticPrediction predict(double beta, const RatioVector& c);

struct ThresholdReport {
    double beta_s = 0.0;
    double edge_candidate = 0.0;  // limit of beta(z) as z decreases to the edge
    double fold_candidate = 0.0;  // minimum of beta(z) over (edge, edge + 10]
    double fold_lambda = 0.0;     // where the fold minimum sits
    double right_edge = 0.0;
    bool candidates_disagree = false;  // |edge - fold| > 1e-6
};

ThresholdReport threshold_report(const RatioVector& c, double tol = 1e-10);
double compute_beta_s(const RatioVector& c, double tol = 1e-10);

struct HypercubicThreshold {
    double beta_s;
    double alignment;
};
HypercubicThreshold hypercubic_beta_s(int d);

struct CubicPrediction {
    double lambda_inf;
    double alignment;
    bool above_threshold;
};
CubicPrediction predict_cubic_d3(double beta);
// Four-term expansion in beta - beta_s (beta >= beta_s).
CubicPrediction cubic_d3_expansion(double beta);
double cubic_d3_beta_s();

struct MatrixPrediction {
    double lambda_inf;
    double align_x;  // vector of dimension proportional to c
    double align_y;  // vector of dimension proportional to 1 - c
    double beta_s;
    bool above_threshold;
};
double matrix_kappa(double beta, double c);
MatrixPrediction predict_matrix(double beta, double c);

// Throws BelowEdgeError when lambda is not right of the edge.
double estimate_snr_from_lambda(double lambda, const RatioVector& c);
// Order-3 form sqrt(prod_i (lambda + g - g_i) / (lambda + g)).
double estimate_snr_order3(double lambda, const RatioVector& c);

// (prod n_i)^(1/4) / sqrt(sum n_i).
double unfolding_threshold(const Dims& dims);

// Mode-`mode` unfolding is an m x n matrix (m = n_mode, n = prod of the
// rest) with ratio c = m / (m + n); in matrix units its SNR is
// beta * sqrt(N / (m + n)).
struct UnfoldingMap {
    double c;
    double beta_scale;
};
UnfoldingMap unfolding_map(const Dims& dims, std::size_t mode);
// lambda_inf is reported in tensor units (top singular value of the unfolding).
MatrixPrediction predict_unfolding(double beta, const Dims& dims, std::size_t mode);

}  // namespace spiked
