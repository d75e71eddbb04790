#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "llqr/feasibility.hpp"
#include "llqr/plant.hpp"

namespace llqr {

/// Simulation aborts once the state magnitude passes this bound; expected
/// for the naive scheme on unstable plants.
inline constexpr double kOverflowBound = 1e12;

/// Runtime state of the disturbance-estimate controller:
///   u[k]      = sum_{tau=1..T}   M[tau] w_e[k-tau]
///   x_r[k+1]  = sum_{tau=1..T-1} R[tau+1] w_e[k-tau]
///   w_e[k]    = x[k+1] - x_r[k+1]
/// The estimate of w[k-1] becomes available when x[k] is measured, so each
/// step first forms that estimate, then the control and the next reference.
/// Between steps the controller persists exactly the last T-1 estimates.
class Controller {
public:
    explicit Controller(ClosedLoopMaps maps);

    /// Consumes the measurement for the current step and returns its control.
    Eigen::VectorXd step(const Eigen::VectorXd& x_measured);

    /// Disturbance estimate formed during the most recent step.
    const Eigen::VectorXd& last_estimate() const { return last_estimate_; }
    /// Reference state predicted for the next measurement.
    const Eigen::VectorXd& reference_next() const { return xr_next_; }

    /// Persisted estimates, most recent first (length T-1).
    std::vector<Eigen::VectorXd> history() const;
    void set_history(const std::vector<Eigen::VectorXd>& history);

    const ClosedLoopMaps& maps() const { return maps_; }

private:
    ClosedLoopMaps maps_;
    std::deque<Eigen::VectorXd> history_;  // w_e[k-2], w_e[k-3], ...
    Eigen::VectorXd xr_next_;
    Eigen::VectorXd last_estimate_;
};

enum class Scheme {
    receding,  // estimate against the internally generated reference
    naive,     // estimate directly from measured states and applied controls
};

/// Time-aligned closed-loop logs: row k holds the step-k quantities, with
/// we_log[k] being the estimate formed at step k (it estimates w[k-1]).
struct SimTrace {
    Eigen::MatrixXd x_log;
    Eigen::MatrixXd u_log;
    Eigen::MatrixXd we_log;
    Eigen::MatrixXd w_log;
    bool overflow = false;
    Index overflow_step = -1;
    int steps = 0;  // rows actually simulated
};

/// Rolls the plant forward under the chosen controller for as many steps as
/// disturbance rows are supplied (x[0] = 0). Throws std::invalid_argument on
/// dimension mismatches; overflow is reported in the trace, not thrown.
SimTrace simulate(const Plant& plant, const ClosedLoopMaps& maps,
                  const Eigen::MatrixXd& disturbances, Scheme scheme);

/// Returns maps whose recursion defect at tap tau+1 is shifted by
/// deltas[tau-1] (tau = 1..T-1) while M is left untouched: the perturbed
/// R obeys R'[tau+1] = A R'[tau] + B M[tau] - delta_tau with R'[1] = I.
ClosedLoopMaps perturb_maps(const Plant& plant, const ClosedLoopMaps& maps,
                            const std::vector<Eigen::MatrixXd>& deltas);

struct SensitivityReport {
    double delta_scale = 0.0;
    int steps = 0;
    double receding_final_norm = 0.0;
    double naive_final_norm = 0.0;
    double receding_max_norm = 0.0;
    double naive_max_norm = 0.0;
    bool receding_overflow = false;
    bool naive_overflow = false;
};

/// Perturbs the maps with random deltas of entrywise magnitude delta_scale,
/// hits the middle state with a unit impulse at t = 0 and runs both schemes
/// side by side for `steps` steps.
SensitivityReport sensitivity_experiment(const Plant& plant, const ClosedLoopMaps& maps,
                                         double delta_scale, std::uint64_t seed,
                                         int steps = 300);

/// Disturbance sequence builders (rows are time steps).
Eigen::MatrixXd impulse_disturbance(int steps, Index n, Index site, int time);
Eigen::MatrixXd awgn_disturbance(int steps, Index n, double variance, std::uint64_t seed);

/// Writes x/u/we/w logs as CSV plus log-magnitude variants of the state and
/// control logs (log10(|v| + 1e-15)) for heatmap plotting.
void export_trace(const std::string& directory, const SimTrace& trace);

}  // namespace llqr
