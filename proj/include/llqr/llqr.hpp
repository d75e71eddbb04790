#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "llqr/feasibility.hpp"
#include "llqr/plant.hpp"
#include "llqr/sparsity.hpp"

namespace llqr {

/// Quadratic cost weights: Q positive semidefinite on states, Rw positive
/// definite on controls. Symmetry and eigenvalue sign conditions are checked
/// at construction.
class CostWeights {
public:
    CostWeights(Eigen::MatrixXd Q, Eigen::MatrixXd Rw);

    static CostWeights identity(Index n, Index m);

    const Eigen::MatrixXd& Q() const { return Q_; }
    const Eigen::MatrixXd& Rw() const { return Rw_; }

private:
    Eigen::MatrixXd Q_;
    Eigen::MatrixXd Rw_;
};

/// One column's quadratic program after eliminating the masked control
/// entries and splitting the stacked state rows into zero-forced (a) and
/// free (b) partitions:
///
///   minimize    U_r^T (Rr + Cb^T Qr Cb) U_r + 2 U_r^T Cb^T Qr Wb
///   subject to  0 = Wa + Ca U_r
///
/// The partitions are exclusive and exhaustive over the rows of X.
struct KKTSystem {
    Eigen::MatrixXd H;   // Rr + Cb^T Qr Cb, symmetric positive definite
    Eigen::MatrixXd Ca;  // zero-forced rows of the reduced input map
    Eigen::MatrixXd Cb;  // free rows of the reduced input map
    Eigen::VectorXd Wa;
    Eigen::VectorXd Wb;
    Eigen::VectorXd rhs;  // stacked (-Cb^T Qr Wb, -Wa)
    Eigen::MatrixXd Qr;   // weights on the free state rows
    Eigen::MatrixXd Rr;   // weights on the free control entries
    double fixed_cost = 0.0;  // contribution of the fixed unit initial state

    std::vector<Index> free_controls;  // retained entries of the stacked U
    std::vector<Index> zero_rows;      // a-partition rows of the stacked X
    std::vector<Index> free_rows;      // b-partition rows of the stacked X
    Index stacked_states = 0;
    Index stacked_controls = 0;
    bool initial_state_allowed = true;
};

KKTSystem build_kkt(const StackedLocalProblem& sp, const CostWeights& weights);

struct KKTSolution {
    enum class Status { ok, infeasible };
    Status status = Status::infeasible;
    Eigen::VectorXd U_r;
    Eigen::VectorXd lambda;            // multipliers of the retained constraint rows
    std::vector<Index> retained_rows;  // indices into the a-partition
    double primal_residual = 0.0;      // over all a-partition rows
    double objective = 0.0;            // includes the fixed initial-state cost
};

/// Solves the optimality system
///   [ H    Ca^T ] [U_r*]   [ -Cb^T Qr Wb ]
///   [ Ca   0    ] [ l* ] = [ -Wa         ]
/// after dropping linearly dependent constraint rows. Infeasible when the
/// zero-forcing equations are inconsistent (minimal residual above tol).
KKTSolution solve_kkt(const KKTSystem& kkt, double tol);

struct ColumnSynthesis {
    Index column = 0;
    bool feasible = false;
    double residual = 0.0;
    double objective = 0.0;
    double solve_seconds = 0.0;
};

struct SynthesisResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<ColumnSynthesis> columns;
    std::vector<Index> infeasible_columns;
    std::optional<ClosedLoopMaps> maps;  // present iff feasible
};

/// Minimizes sum_k Trace(R[k]^T Q R[k] + M[k]^T Rw M[k]) over all map pairs
/// satisfying the closed-loop recursion and the constraint-space supports,
/// one independent quadratic program per disturbance column.
SynthesisResult synthesize_llqr(const Plant& plant, const ConstraintSpace& state_space,
                                const ConstraintSpace& control_space, int T,
                                const CostWeights& weights);

/// Expected per-step cost of the closed loop under unit-variance white
/// noise: Trace(Q) + sum_{k=2..T} Trace(R[k]^T Q R[k])
///                 + sum_{k=1..T} Trace(M[k]^T Rw M[k]).
/// Equals the impulse-response objective exactly since R[1] = I.
double evaluate_awgn_cost(const ClosedLoopMaps& maps, const CostWeights& weights);

}  // namespace llqr
