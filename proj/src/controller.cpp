#include "llqr/controller.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "llqr/io.hpp"

namespace llqr {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace

Controller::Controller(ClosedLoopMaps maps) : maps_(std::move(maps)) {
    const Index n = maps_.num_states();
    history_.assign(static_cast<std::size_t>(std::max(0, maps_.horizon() - 1)),
                    Eigen::VectorXd::Zero(n));
    xr_next_ = Eigen::VectorXd::Zero(n);
    last_estimate_ = Eigen::VectorXd::Zero(n);
}

Eigen::VectorXd Controller::step(const Eigen::VectorXd& x_measured) {
    require(x_measured.size() == maps_.num_states(), "Controller::step: state size mismatch");
    const int T = maps_.horizon();

    // The arriving measurement completes the previous step's estimate.
    last_estimate_ = x_measured - xr_next_;

    Eigen::VectorXd u = maps_.M(1) * last_estimate_;
    for (int tau = 2; tau <= T; ++tau)
        u += maps_.M(tau) * history_[static_cast<std::size_t>(tau - 2)];

    Eigen::VectorXd xr = Eigen::VectorXd::Zero(maps_.num_states());
    if (T >= 2) {
        xr = maps_.R(2) * last_estimate_;
        for (int tau = 2; tau <= T - 1; ++tau)
            xr += maps_.R(tau + 1) * history_[static_cast<std::size_t>(tau - 2)];
    }
    xr_next_ = std::move(xr);

    if (!history_.empty()) {
        history_.pop_back();
        history_.push_front(last_estimate_);
    }
    return u;
}

std::vector<Eigen::VectorXd> Controller::history() const {
    return {history_.begin(), history_.end()};
}

void Controller::set_history(const std::vector<Eigen::VectorXd>& history) {
    require(history.size() == history_.size(), "Controller::set_history: length mismatch");
    for (const auto& v : history)
        require(v.size() == maps_.num_states(), "Controller::set_history: entry size mismatch");
    history_.assign(history.begin(), history.end());
}

SimTrace simulate(const Plant& plant, const ClosedLoopMaps& maps,
                  const Eigen::MatrixXd& disturbances, Scheme scheme) {
    const Index n = plant.num_states();
    const Index m = plant.num_controls();
    require(maps.num_states() == n && maps.num_controls() == m,
            "simulate: plant/maps dimension mismatch");
    require(disturbances.cols() == n, "simulate: disturbance width mismatch");

    const int N = static_cast<int>(disturbances.rows());
    const int T = maps.horizon();

    SimTrace trace;
    trace.x_log = Eigen::MatrixXd::Zero(N, n);
    trace.u_log = Eigen::MatrixXd::Zero(N, m);
    trace.we_log = Eigen::MatrixXd::Zero(N, n);
    trace.w_log = disturbances;

    Controller controller(maps);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

    for (int k = 0; k < N; ++k) {
        trace.x_log.row(k) = x;
        Eigen::VectorXd u;
        if (scheme == Scheme::receding) {
            u = controller.step(x);
            trace.we_log.row(k) = controller.last_estimate();
        } else {
            // Direct-inversion estimate of each past disturbance from the
            // logged states and controls.
            u = Eigen::VectorXd::Zero(m);
            for (int tau = 1; tau <= std::min(T, k); ++tau) {
                const Eigen::VectorXd w_hat =
                    trace.x_log.row(k - tau + 1).transpose() -
                    plant.A() * trace.x_log.row(k - tau).transpose() -
                    plant.B() * trace.u_log.row(k - tau).transpose();
                u += maps.M(tau) * w_hat;
                if (tau == 1) trace.we_log.row(k) = w_hat;
            }
        }
        trace.u_log.row(k) = u;
        trace.steps = k + 1;

        x = plant.A() * x + plant.B() * u + disturbances.row(k).transpose();
        if (x.cwiseAbs().maxCoeff() > kOverflowBound) {
            trace.overflow = true;
            trace.overflow_step = k + 1;
            break;
        }
    }
    return trace;
}

ClosedLoopMaps perturb_maps(const Plant& plant, const ClosedLoopMaps& maps,
                            const std::vector<Eigen::MatrixXd>& deltas) {
    const Index n = plant.num_states();
    const int T = maps.horizon();
    require(maps.num_states() == n && maps.num_controls() == plant.num_controls(),
            "perturb_maps: plant/maps dimension mismatch");
    require(static_cast<int>(deltas.size()) == std::max(0, T - 1),
            "perturb_maps: expected T-1 delta matrices");
    for (const auto& d : deltas)
        require(d.rows() == n && d.cols() == n, "perturb_maps: delta shape mismatch");

    ClosedLoopMaps out = maps;
    Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(n, n);
    for (int tau = 1; tau <= T - 1; ++tau) {
        drift = plant.A() * drift - deltas[static_cast<std::size_t>(tau - 1)];
        out.mutable_R(tau + 1) = maps.R(tau + 1) + drift;
    }
    return out;
}

SensitivityReport sensitivity_experiment(const Plant& plant, const ClosedLoopMaps& maps,
                                         double delta_scale, std::uint64_t seed, int steps) {
    require(steps >= 1, "sensitivity_experiment: steps must be positive");
    const Index n = plant.num_states();
    const int T = maps.horizon();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-delta_scale, delta_scale);
    std::vector<Eigen::MatrixXd> deltas(static_cast<std::size_t>(std::max(0, T - 1)));
    for (auto& d : deltas) {
        d.resize(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) d(i, j) = uniform(rng);
    }

    const ClosedLoopMaps perturbed = perturb_maps(plant, maps, deltas);
    const Eigen::MatrixXd w_seq = impulse_disturbance(steps, n, n / 2, 0);

    const SimTrace receding = simulate(plant, perturbed, w_seq, Scheme::receding);
    const SimTrace naive = simulate(plant, perturbed, w_seq, Scheme::naive);

    SensitivityReport report;
    report.delta_scale = delta_scale;
    report.steps = steps;
    report.receding_overflow = receding.overflow;
    report.naive_overflow = naive.overflow;
    report.receding_final_norm =
        receding.x_log.row(receding.steps - 1).cwiseAbs().maxCoeff();
    report.naive_final_norm = naive.x_log.row(naive.steps - 1).cwiseAbs().maxCoeff();
    report.receding_max_norm =
        receding.x_log.topRows(receding.steps).cwiseAbs().maxCoeff();
    report.naive_max_norm = naive.x_log.topRows(naive.steps).cwiseAbs().maxCoeff();
    return report;
}

Eigen::MatrixXd impulse_disturbance(int steps, Index n, Index site, int time) {
    require(steps >= 1, "impulse_disturbance: steps must be positive");
    require(site >= 0 && site < n, "impulse_disturbance: site out of range");
    require(time >= 0 && time < steps, "impulse_disturbance: time out of range");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(steps, n);
    w(time, site) = 1.0;
    return w;
}

Eigen::MatrixXd awgn_disturbance(int steps, Index n, double variance, std::uint64_t seed) {
    require(steps >= 1, "awgn_disturbance: steps must be positive");
    require(variance >= 0.0, "awgn_disturbance: variance must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    Eigen::MatrixXd w(steps, n);
    for (int k = 0; k < steps; ++k)
        for (Index j = 0; j < n; ++j) w(k, j) = normal(rng);
    return w;
}

void export_trace(const std::string& directory, const SimTrace& trace) {
    const std::string base = directory.empty() ? std::string(".") : directory;
    write_log_csv(base + "/x.csv", trace.x_log, "x");
    write_log_csv(base + "/u.csv", trace.u_log, "u");
    write_log_csv(base + "/we.csv", trace.we_log, "we");
    write_log_csv(base + "/w.csv", trace.w_log, "w");
    write_log_csv(base + "/x_logmag.csv", trace.x_log, "x", /*log_magnitude=*/true);
    write_log_csv(base + "/u_logmag.csv", trace.u_log, "u", /*log_magnitude=*/true);
}

}  // namespace llqr
