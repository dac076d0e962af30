#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gics/packing.hpp"
#include "gics/sensing.hpp"
#include "gics/spectrum.hpp"

namespace gics {

struct SolverConfig {
    double lambda_reg = 0.0;
    int max_iters = 5000;   // per inner subproblem
    double tol = 1e-6;      // relative step size that ends an inner solve
    int max_outer = 60;     // working-set expansions
    bool nonneg_diagonal = true;
    bool debias = false;
    // Penalise off-diagonal slots twice, i.e. use the entrywise l1 norm of the
    // full Hermitian matrix rather than of its packed half.
    bool hermitian_weights = true;

    void validate() const;
};

struct SolveResult {
    Eigen::VectorXd x;
    std::vector<double> objective_trace;
    double residual = 0.0;
    int iterations_used = 0;
    bool converged = false;
    double lambda = 0.0;
};

// Minimises 1/2 ||A'x - y||^2 + lambda sum_k w_k |x_k| by an active-set
// proximal gradient method: monotone FISTA with backtracking on a working set
// that grows with the worst KKT violators of the full problem.
SolveResult solve_l1(const SensingSystem& system, const SolverConfig& config);
SolveResult solve_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const SolverConfig& config);

// Smallest lambda giving x = 0.
double lambda_max(const SensingSystem& system, const SolverConfig& config);
double lambda_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

struct LambdaSelection {
    double lambda = 0.0;
    std::size_t index = 0;          // into the caller's grid
    std::vector<double> held_out;   // residual per grid entry, caller order
};

// Holds out 20% of the rows (permutation drawn from split_seed), solves the
// remaining rows from the largest to the smallest lambda with warm starts and
// returns the lambda with the smallest held-out residual. Training solves use
// lambda * (training rows / rows) so the result transfers to the full system.
LambdaSelection select_lambda(const SensingSystem& system, const std::vector<double>& grid, const SolverConfig& config,
                              std::uint64_t split_seed = 12345);
LambdaSelection select_lambda(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<double>& grid,
                              const SolverConfig& config, std::uint64_t split_seed = 12345);

// |T(f)| from a solution vector: x of length n^2 is read through the packing,
// length n as diagonal-only. Unit peak.
SpectrumEstimate extract_spectrum(const Eigen::VectorXd& x, const HermitianPacking& packing,
                                  DiagonalConvention convention, const Eigen::VectorXd& freq_axis);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold);

}  // namespace gics
