#include "llqr/llqr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "parallel_for.hpp"

namespace llqr {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenvalueMargin = 1e-10;
constexpr double kRankThreshold = 1e-10;

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

void check_weight(const Eigen::MatrixXd& w, double min_eigenvalue, const char* name) {
    require(w.rows() == w.cols(), std::string(name) + " must be square");
    if (w.rows() == 0) return;
    const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
    require(asym <= kSymmetryTol * (1.0 + w.cwiseAbs().maxCoeff()),
            std::string(name) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w, Eigen::EigenvaluesOnly);
    require(eig.info() == Eigen::Success, std::string(name) + ": eigenvalue solve failed");
    require(eig.eigenvalues().minCoeff() >= min_eigenvalue,
            std::string(name) + " violates its definiteness requirement");
}

}  // namespace

CostWeights::CostWeights(Eigen::MatrixXd Q, Eigen::MatrixXd Rw)
    : Q_(std::move(Q)), Rw_(std::move(Rw)) {
    check_weight(Q_, -kEigenvalueMargin, "CostWeights: Q");
    check_weight(Rw_, kEigenvalueMargin, "CostWeights: Rw");
}

CostWeights CostWeights::identity(Index n, Index m) {
    return CostWeights(Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(m, m));
}

KKTSystem build_kkt(const StackedLocalProblem& sp, const CostWeights& weights) {
    const Index ns = static_cast<Index>(sp.rp.state_map.size());
    const Index nc = static_cast<Index>(sp.rp.control_map.size());

    KKTSystem kkt;
    kkt.stacked_states = ns * sp.T;
    kkt.stacked_controls = nc * sp.T;
    kkt.initial_state_allowed = sp.initial_state_allowed;

    for (Index i = 0; i < kkt.stacked_controls; ++i)
        if (sp.control_mask[static_cast<std::size_t>(i)]) kkt.free_controls.push_back(i);
    for (Index r = 0; r < kkt.stacked_states; ++r)
        (sp.state_mask[static_cast<std::size_t>(r)] ? kkt.free_rows : kkt.zero_rows).push_back(r);

    const Index nu = static_cast<Index>(kkt.free_controls.size());
    const Index na = static_cast<Index>(kkt.zero_rows.size());
    const Index nb = static_cast<Index>(kkt.free_rows.size());

    // Reduced weights on state_map/control_map.
    Eigen::MatrixXd q_loc(ns, ns);
    for (Index p = 0; p < ns; ++p)
        for (Index q = 0; q < ns; ++q)
            q_loc(p, q) = weights.Q()(sp.rp.state_map[static_cast<std::size_t>(p)],
                                      sp.rp.state_map[static_cast<std::size_t>(q)]);
    Eigen::MatrixXd r_loc(nc, nc);
    for (Index p = 0; p < nc; ++p)
        for (Index q = 0; q < nc; ++q)
            r_loc(p, q) = weights.Rw()(sp.rp.control_map[static_cast<std::size_t>(p)],
                                       sp.rp.control_map[static_cast<std::size_t>(q)]);

    // Block-diagonal stacked weights restricted to the retained rows/entries.
    kkt.Qr = Eigen::MatrixXd::Zero(nb, nb);
    for (Index a = 0; a < nb; ++a)
        for (Index b = 0; b < nb; ++b) {
            const Index ra = kkt.free_rows[static_cast<std::size_t>(a)];
            const Index rb = kkt.free_rows[static_cast<std::size_t>(b)];
            if (ra / ns == rb / ns) kkt.Qr(a, b) = q_loc(ra % ns, rb % ns);
        }
    kkt.Rr = Eigen::MatrixXd::Zero(nu, nu);
    for (Index a = 0; a < nu; ++a)
        for (Index b = 0; b < nu; ++b) {
            const Index ca = kkt.free_controls[static_cast<std::size_t>(a)];
            const Index cb = kkt.free_controls[static_cast<std::size_t>(b)];
            if (ca / nc == cb / nc) kkt.Rr(a, b) = r_loc(ca % nc, cb % nc);
        }

    kkt.Ca.resize(na, nu);
    kkt.Cb.resize(nb, nu);
    for (Index c = 0; c < nu; ++c) {
        const Eigen::VectorXd col = sp.C.col(kkt.free_controls[static_cast<std::size_t>(c)]);
        for (Index r = 0; r < na; ++r) kkt.Ca(r, c) = col[kkt.zero_rows[static_cast<std::size_t>(r)]];
        for (Index r = 0; r < nb; ++r) kkt.Cb(r, c) = col[kkt.free_rows[static_cast<std::size_t>(r)]];
    }
    kkt.Wa.resize(na);
    for (Index r = 0; r < na; ++r) kkt.Wa[r] = sp.W[kkt.zero_rows[static_cast<std::size_t>(r)]];
    kkt.Wb.resize(nb);
    for (Index r = 0; r < nb; ++r) kkt.Wb[r] = sp.W[kkt.free_rows[static_cast<std::size_t>(r)]];

    kkt.H = kkt.Rr + kkt.Cb.transpose() * kkt.Qr * kkt.Cb;
    kkt.rhs.resize(nu + na);
    kkt.rhs.head(nu) = -kkt.Cb.transpose() * kkt.Qr * kkt.Wb;
    kkt.rhs.tail(na) = -kkt.Wa;

    kkt.fixed_cost = q_loc(sp.rp.w_slot, sp.rp.w_slot);
    return kkt;
}

KKTSolution solve_kkt(const KKTSystem& kkt, double tol) {
    KKTSolution sol;
    const Index nu = static_cast<Index>(kkt.free_controls.size());
    const Index na = kkt.Wa.size();

    if (!kkt.initial_state_allowed) {
        sol.primal_residual = 1.0;
        return sol;
    }

    if (nu == 0) {
        sol.primal_residual = na > 0 ? kkt.Wa.cwiseAbs().maxCoeff() : 0.0;
        if (sol.primal_residual > tol) return sol;
        sol.status = KKTSolution::Status::ok;
        sol.U_r.resize(0);
        sol.lambda.resize(0);
        sol.objective = kkt.fixed_cost + kkt.Wb.dot(kkt.Qr * kkt.Wb);
        return sol;
    }

    // Drop linearly dependent zero-forcing rows; masks routinely force
    // entries that are already structurally zero.
    std::vector<Index> retained;
    if (na > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kkt.Ca.transpose());
        qr.setThreshold(kRankThreshold);
        const Index rank = qr.rank();
        const auto& perm = qr.colsPermutation().indices();
        retained.reserve(static_cast<std::size_t>(rank));
        for (Index r = 0; r < rank; ++r) retained.push_back(perm[r]);
        std::sort(retained.begin(), retained.end());
    }
    const Index nr = static_cast<Index>(retained.size());

    Eigen::MatrixXd ca_sel(nr, nu);
    Eigen::VectorXd wa_sel(nr);
    for (Index r = 0; r < nr; ++r) {
        ca_sel.row(r) = kkt.Ca.row(retained[static_cast<std::size_t>(r)]);
        wa_sel[r] = kkt.Wa[retained[static_cast<std::size_t>(r)]];
    }

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nu + nr, nu + nr);
    K.topLeftCorner(nu, nu) = kkt.H;
    if (nr > 0) {
        K.topRightCorner(nu, nr) = ca_sel.transpose();
        K.bottomLeftCorner(nr, nu) = ca_sel;
    }
    Eigen::VectorXd rhs(nu + nr);
    rhs.head(nu) = kkt.rhs.head(nu);
    rhs.tail(nr) = -wa_sel;

    const Eigen::VectorXd z = Eigen::PartialPivLU<Eigen::MatrixXd>(K).solve(rhs);
    sol.U_r = z.head(nu);
    sol.lambda = z.tail(nr);
    sol.retained_rows = std::move(retained);

    sol.primal_residual =
        na > 0 ? (kkt.Wa + kkt.Ca * sol.U_r).cwiseAbs().maxCoeff() : 0.0;
    if (sol.primal_residual > tol) {
        sol.status = KKTSolution::Status::infeasible;
        return sol;
    }

    const Eigen::VectorXd x_free = kkt.Wb + kkt.Cb * sol.U_r;
    sol.objective = kkt.fixed_cost + x_free.dot(kkt.Qr * x_free) + sol.U_r.dot(kkt.Rr * sol.U_r);
    sol.status = KKTSolution::Status::ok;
    return sol;
}

SynthesisResult synthesize_llqr(const Plant& plant, const ConstraintSpace& state_space,
                                const ConstraintSpace& control_space, int T,
                                const CostWeights& weights) {
    const Index n = plant.num_states();
    const Index m = plant.num_controls();
    require(weights.Q().rows() == n, "synthesize_llqr: Q dimension mismatch");
    require(weights.Rw().rows() == m, "synthesize_llqr: Rw dimension mismatch");
    require(state_space.rows() == n && state_space.cols() == n,
            "synthesize_llqr: state constraint shape mismatch");
    require(control_space.rows() == m && control_space.cols() == n,
            "synthesize_llqr: control constraint shape mismatch");
    require(state_space.horizon() == T && control_space.horizon() == T,
            "synthesize_llqr: constraint horizons must equal T");

    const double tol = feasibility_tolerance(plant);

    std::vector<Eigen::MatrixXd> r_taps(static_cast<std::size_t>(T),
                                        Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::MatrixXd> m_taps(static_cast<std::size_t>(T),
                                        Eigen::MatrixXd::Zero(m, n));
    r_taps[0] = Eigen::MatrixXd::Identity(n, n);

    SynthesisResult result;
    result.columns.resize(static_cast<std::size_t>(n));

    detail::parallel_for_index(n, [&](Index j) {
        const auto start = std::chrono::steady_clock::now();
        const ReducedPlant rp =
            reduce(plant, j, required_locality(plant, state_space, control_space, j));
        const StackedLocalProblem sp = build_stacked(rp, state_space, control_space, T);
        const KKTSystem kkt = build_kkt(sp, weights);
        const KKTSolution sol = solve_kkt(kkt, tol);

        ColumnSynthesis& col = result.columns[static_cast<std::size_t>(j)];
        col.column = j;
        col.feasible = sol.status == KKTSolution::Status::ok;
        col.residual = sol.primal_residual;
        col.objective = sol.objective;
        if (!col.feasible) {
            col.solve_seconds = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
            return;
        }

        const Index ns = static_cast<Index>(rp.state_map.size());
        const Index nc = static_cast<Index>(rp.control_map.size());
        Eigen::VectorXd U = Eigen::VectorXd::Zero(kkt.stacked_controls);
        for (std::size_t c = 0; c < kkt.free_controls.size(); ++c)
            U[kkt.free_controls[c]] = sol.U_r[static_cast<Index>(c)];
        Eigen::VectorXd X = sp.W + sp.C * U;
        for (Index r : kkt.zero_rows) X[r] = 0.0;

        for (int k = 2; k <= T; ++k)
            r_taps[static_cast<std::size_t>(k - 1)].col(j) =
                embed_state(rp, X.segment(static_cast<Index>(k - 2) * ns, ns), n);
        for (int k = 1; k <= T; ++k)
            m_taps[static_cast<std::size_t>(k - 1)].col(j) =
                embed_control(rp, U.segment(static_cast<Index>(k - 1) * nc, nc), m);

        col.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    for (const auto& col : result.columns) {
        if (col.feasible)
            result.objective += col.objective;
        else
            result.infeasible_columns.push_back(col.column);
    }
    result.feasible = result.infeasible_columns.empty();
    if (!result.feasible) {
        result.objective = 0.0;
        return result;
    }
    result.maps.emplace(std::move(r_taps), std::move(m_taps));
    return result;
}

double evaluate_awgn_cost(const ClosedLoopMaps& maps, const CostWeights& weights) {
    require(weights.Q().rows() == maps.num_states(), "evaluate_awgn_cost: Q dimension mismatch");
    require(weights.Rw().rows() == maps.num_controls(),
            "evaluate_awgn_cost: Rw dimension mismatch");
    double cost = weights.Q().trace();
    for (int k = 2; k <= maps.horizon(); ++k)
        cost += (maps.R(k).transpose() * weights.Q() * maps.R(k)).trace();
    for (int k = 1; k <= maps.horizon(); ++k)
        cost += (maps.M(k).transpose() * weights.Rw() * maps.M(k)).trace();
    return cost;
}

}  // namespace llqr
