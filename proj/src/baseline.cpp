#include "llqr/baseline.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace llqr {

RiccatiSolution solve_dare(const Plant& plant, const CostWeights& weights, double tol,
                           int max_iterations) {
    const Eigen::MatrixXd& A = plant.A();
    const Eigen::MatrixXd& B = plant.B();
    if (weights.Q().rows() != A.rows() || weights.Rw().rows() != B.cols())
        throw std::invalid_argument("solve_dare: weight dimension mismatch");

    RiccatiSolution sol;
    sol.P = weights.Q();
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::MatrixXd bpa = B.transpose() * sol.P * A;
        const Eigen::MatrixXd gain =
            (weights.Rw() + B.transpose() * sol.P * B).ldlt().solve(bpa);
        Eigen::MatrixXd next =
            A.transpose() * sol.P * A - bpa.transpose() * gain + weights.Q();
        next = 0.5 * (next + next.transpose());

        sol.residual = (next - sol.P).cwiseAbs().maxCoeff();
        sol.P = std::move(next);
        sol.iterations = it;
        if (sol.residual <= tol) {
            sol.K_gain = (weights.Rw() + B.transpose() * sol.P * B)
                             .ldlt()
                             .solve(B.transpose() * sol.P * A);
            if (spectral_radius(A - B * sol.K_gain) >= 1.0)
                throw NoConvergence("solve_dare: converged P does not stabilize the plant");
            return sol;
        }
    }
    throw NoConvergence("solve_dare: no fixed point within the iteration budget");
}

double centralized_h2_objective(const Plant& plant, const CostWeights& weights) {
    return solve_dare(plant, weights).P.trace();
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    if (m.rows() == 0) return 0.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> eig(m, /*computeEigenvectors=*/false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace llqr
