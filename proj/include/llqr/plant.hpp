#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "llqr/sparsity.hpp"

namespace llqr {

/// Discrete-time plant x[k+1] = A x[k] + B u[k] + w[k] with cached
/// interconnection patterns. Immutable after construction.
class Plant {
public:
    Plant(Eigen::MatrixXd A, Eigen::MatrixXd B);

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const SparsityPattern& A_pattern() const { return A_pattern_; }
    const SparsityPattern& B_pattern() const { return B_pattern_; }

    Index num_states() const { return A_.rows(); }
    Index num_controls() const { return B_.cols(); }

private:
    Eigen::MatrixXd A_;
    Eigen::MatrixXd B_;
    SparsityPattern A_pattern_;
    SparsityPattern B_pattern_;
};

/// 59-state tridiagonal chain benchmark: A has 1 on the diagonal, 0.2 on the
/// superdiagonal and -0.2 on the subdiagonal; B is 59 x 20 with ones at
/// (6n+1, 2n+1) and (6n+2, 2n+2), 1-based, for n = 0..9.
Plant make_chain_benchmark();

/// The plant restricted to the region a disturbance at state j can touch
/// within d+1 hops: states in the outgoing (d+1)-region of j and the controls
/// whose full actuation footprint lies inside that region.
struct ReducedPlant {
    Index j = 0;
    int d = 0;
    std::vector<Index> state_map;    // ascending global state indices
    std::vector<Index> control_map;  // ascending global control indices
    Eigen::MatrixXd A_loc;           // A restricted to state_map x state_map
    Eigen::MatrixXd B_loc;           // B restricted to state_map x control_map
    Index w_slot = 0;                // position of j inside state_map
};

ReducedPlant reduce(const Plant& plant, Index j, int d);

/// Scatters a reduced state vector back to global coordinates (zero padding);
/// the disturbance slot maps back to e_j. The caller must keep the vector's
/// support inside the localized region for the commutation identities with
/// the full plant to hold.
Eigen::VectorXd embed_state(const ReducedPlant& rp, const Eigen::VectorXd& v, Index n);
Eigen::VectorXd embed_control(const ReducedPlant& rp, const Eigen::VectorXd& v, Index m);

/// Gather counterparts of the embed operations (restriction to the maps).
Eigen::VectorXd restrict_state(const ReducedPlant& rp, const Eigen::VectorXd& v);
Eigen::VectorXd restrict_control(const ReducedPlant& rp, const Eigen::VectorXd& v);

/// Plant text format: line 1 "n m", then n rows of A (n reals each), then
/// n rows of B (m reals each), whitespace-separated decimal notation.
Plant load_plant(std::istream& is);
Plant load_plant(const std::string& path);
void save_plant(std::ostream& os, const Plant& plant);
void save_plant(const std::string& path, const Plant& plant);

}  // namespace llqr
