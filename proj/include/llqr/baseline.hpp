#pragma once

#include <Eigen/Core>

#include <stdexcept>

#include "llqr/llqr.hpp"
#include "llqr/plant.hpp"

namespace llqr {

class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Infinite-horizon discrete LQR solution: cost-to-go P, static gain K with
/// u = -K x, and fixed-point iteration diagnostics.
struct RiccatiSolution {
    Eigen::MatrixXd P;
    Eigen::MatrixXd K_gain;
    int iterations = 0;
    double residual = 0.0;
};

inline constexpr double kRiccatiTolerance = 1e-12;
inline constexpr int kRiccatiMaxIterations = 1'000'000;

/// Fixed-point iteration P <- A^T P A - A^T P B (Rw + B^T P B)^-1 B^T P A + Q
/// from P = Q until the update falls below tol. Throws NoConvergence after
/// max_iterations (unstabilizable or ill-conditioned instances).
RiccatiSolution solve_dare(const Plant& plant, const CostWeights& weights,
                           double tol = kRiccatiTolerance,
                           int max_iterations = kRiccatiMaxIterations);

/// Trace(P): the summed LQR cost over unit impulses at every state, equal to
/// the steady-state per-step expected cost under unit-variance white noise.
double centralized_h2_objective(const Plant& plant, const CostWeights& weights);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace llqr
