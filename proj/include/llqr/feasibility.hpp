#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "llqr/plant.hpp"
#include "llqr/sparsity.hpp"

namespace llqr {

/// FIR closed-loop maps: R[k] (disturbance to state) and M[k] (disturbance
/// to control) for taps k = 1..T, with R[1] = I and the implicit R[T+1] = 0.
class ClosedLoopMaps {
public:
    ClosedLoopMaps(std::vector<Eigen::MatrixXd> r_taps, std::vector<Eigen::MatrixXd> m_taps);

    int horizon() const { return static_cast<int>(r_taps_.size()); }
    Index num_states() const { return r_taps_.front().rows(); }
    Index num_controls() const { return m_taps_.front().rows(); }

    /// 1-based tap accessors.
    const Eigen::MatrixXd& R(int k) const;
    const Eigen::MatrixXd& M(int k) const;
    Eigen::MatrixXd& mutable_R(int k);
    Eigen::MatrixXd& mutable_M(int k);

private:
    std::vector<Eigen::MatrixXd> r_taps_;
    std::vector<Eigen::MatrixXd> m_taps_;
};

/// Recursion defects of a candidate map pair against the plant, one matrix
/// per tap: delta[k] = A R[k] + B M[k] - R[k+1] for k = 1..T (R[T+1] = 0).
/// An exactly synthesized pair has every delta at round-off level.
std::vector<Eigen::MatrixXd> recursion_defects(const Plant& plant, const ClosedLoopMaps& maps);

/// Largest absolute entry over all recursion defects.
double recursion_residual(const Plant& plant, const ClosedLoopMaps& maps);

/// Scale-aware residual acceptance threshold used by all feasibility checks.
double feasibility_tolerance(const Plant& plant);

/// One column's dynamics over the full horizon written as a single affine
/// relation X = W + C U on the reduced plant, plus the stacked sparsity masks.
///
/// Stacking is time-ascending: block r of X holds x[r+2] (r = 0..T-1, the
/// final block being the terminal x[T+1], which must vanish), block c of U
/// holds u[c+1] (c = 0..T-1). C is block lower-triangular with
/// C(r, c) = A_loc^(r-c) B_loc for c <= r, and W_r = A_loc^(r+1) e_{w_slot}.
struct StackedLocalProblem {
    ReducedPlant rp;
    int T = 0;
    Eigen::VectorXd W;
    Eigen::MatrixXd C;
    std::vector<std::uint8_t> state_mask;    // allowed support of X
    std::vector<std::uint8_t> control_mask;  // allowed support of U
    bool initial_state_allowed = true;       // e_{w_slot} fits tap 1 of S_x
};

StackedLocalProblem build_stacked(const ReducedPlant& rp, const ConstraintSpace& state_space,
                                  const ConstraintSpace& control_space, int T);

/// Outcome of one column's feasibility solve. Trajectories are stacked in
/// the StackedLocalProblem ordering; entries outside the masks are exact
/// zeros. `residual` is the attained infinity-norm of the zero-forcing
/// equations (meaningful for infeasible columns too).
struct LocalSolution {
    bool feasible = false;
    double residual = 0.0;
    Eigen::VectorXd X;
    Eigen::VectorXd U;
};

/// Finds any trajectory pair satisfying X = W + C U with the masked entries
/// of X and U forced to zero: free control entries are kept, the rest
/// eliminated, and the zero-forced rows of X become a linear system solved in
/// the minimum-norm sense. Feasible iff the attained residual is below tol.
LocalSolution solve_local_feasibility(const StackedLocalProblem& sp, double tol);

/// Smallest locality radius whose reduced region covers every state entry and
/// control footprint the constraint spaces allow in column j. Entries the
/// interconnection graph cannot reach from j are ignored; they stay
/// structurally zero in any solution.
int required_locality(const Plant& plant, const ConstraintSpace& state_space,
                      const ConstraintSpace& control_space, Index j);

struct ColumnVerdict {
    Index column = 0;
    bool feasible = false;
    double residual = 0.0;
};

struct GlobalSolveResult {
    bool feasible = false;
    std::vector<ColumnVerdict> columns;
    std::vector<Index> infeasible_columns;
    std::optional<ClosedLoopMaps> maps;  // present iff feasible
};

/// Runs the per-column reduction, stacked solve and embedding for every
/// disturbance site and assembles the closed-loop maps. Columns are solved
/// concurrently; assembly is deterministic by column index.
GlobalSolveResult solve_global(const Plant& plant, const ConstraintSpace& state_space,
                               const ConstraintSpace& control_space, int T);

struct LocalizabilityReport {
    int d = 0;
    int T = 0;
    double h = 1.0;
    bool localizable = false;
    std::vector<ColumnVerdict> columns;
};

/// Builds the localized FIR constraints for (d, T, h) and reports the
/// per-column feasibility verdicts. Infeasibility is an outcome, not an error.
LocalizabilityReport check_localizable(const Plant& plant, int d, int T, double h);

/// Maps text format: header "n m T", then T blocks of R[k] (n rows of n
/// reals) followed by T blocks of M[k] (m rows of n reals), 17 significant
/// digits for exact round-trips.
void save_maps(std::ostream& os, const ClosedLoopMaps& maps);
void save_maps(const std::string& path, const ClosedLoopMaps& maps);
ClosedLoopMaps load_maps(std::istream& is);
ClosedLoopMaps load_maps(const std::string& path);

}  // namespace llqr
