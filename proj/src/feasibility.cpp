#include "llqr/feasibility.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "llqr/io.hpp"
#include "parallel_for.hpp"

namespace llqr {

namespace {

constexpr double kRankThreshold = 1e-10;

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace

ClosedLoopMaps::ClosedLoopMaps(std::vector<Eigen::MatrixXd> r_taps,
                               std::vector<Eigen::MatrixXd> m_taps)
    : r_taps_(std::move(r_taps)), m_taps_(std::move(m_taps)) {
    require(!r_taps_.empty(), "ClosedLoopMaps: at least one tap required");
    require(r_taps_.size() == m_taps_.size(), "ClosedLoopMaps: tap count mismatch");
    const Index n = r_taps_.front().rows();
    for (const auto& r : r_taps_)
        require(r.rows() == n && r.cols() == n, "ClosedLoopMaps: R tap shape mismatch");
    const Index m = m_taps_.front().rows();
    for (const auto& mm : m_taps_)
        require(mm.rows() == m && mm.cols() == n, "ClosedLoopMaps: M tap shape mismatch");
}

const Eigen::MatrixXd& ClosedLoopMaps::R(int k) const {
    if (k < 1 || k > horizon()) throw std::out_of_range("ClosedLoopMaps: R tap out of range");
    return r_taps_[static_cast<std::size_t>(k - 1)];
}

const Eigen::MatrixXd& ClosedLoopMaps::M(int k) const {
    if (k < 1 || k > horizon()) throw std::out_of_range("ClosedLoopMaps: M tap out of range");
    return m_taps_[static_cast<std::size_t>(k - 1)];
}

Eigen::MatrixXd& ClosedLoopMaps::mutable_R(int k) {
    if (k < 1 || k > horizon()) throw std::out_of_range("ClosedLoopMaps: R tap out of range");
    return r_taps_[static_cast<std::size_t>(k - 1)];
}

Eigen::MatrixXd& ClosedLoopMaps::mutable_M(int k) {
    if (k < 1 || k > horizon()) throw std::out_of_range("ClosedLoopMaps: M tap out of range");
    return m_taps_[static_cast<std::size_t>(k - 1)];
}

std::vector<Eigen::MatrixXd> recursion_defects(const Plant& plant, const ClosedLoopMaps& maps) {
    require(maps.num_states() == plant.num_states() &&
                maps.num_controls() == plant.num_controls(),
            "recursion_defects: plant/maps dimension mismatch");
    const int T = maps.horizon();
    std::vector<Eigen::MatrixXd> defects;
    defects.reserve(static_cast<std::size_t>(T));
    for (int k = 1; k <= T; ++k) {
        Eigen::MatrixXd d = plant.A() * maps.R(k) + plant.B() * maps.M(k);
        if (k < T) d -= maps.R(k + 1);
        defects.push_back(std::move(d));
    }
    return defects;
}

double recursion_residual(const Plant& plant, const ClosedLoopMaps& maps) {
    double worst = 0.0;
    for (const auto& d : recursion_defects(plant, maps))
        worst = std::max(worst, d.cwiseAbs().maxCoeff());
    return worst;
}

double feasibility_tolerance(const Plant& plant) {
    return 1e-8 * (1.0 + plant.A().cwiseAbs().rowwise().sum().maxCoeff());
}

StackedLocalProblem build_stacked(const ReducedPlant& rp, const ConstraintSpace& state_space,
                                  const ConstraintSpace& control_space, int T) {
    require(T >= 1, "build_stacked: horizon must be positive");
    require(state_space.horizon() == T && control_space.horizon() == T,
            "build_stacked: constraint horizons must equal T");

    const Index ns = static_cast<Index>(rp.state_map.size());
    const Index nc = static_cast<Index>(rp.control_map.size());

    StackedLocalProblem sp;
    sp.rp = rp;
    sp.T = T;

    // Free response: block r holds A_loc^(r+1) e_{w_slot}.
    sp.W.resize(ns * T);
    Eigen::VectorXd v = Eigen::VectorXd::Unit(ns, rp.w_slot);
    for (int r = 0; r < T; ++r) {
        v = rp.A_loc * v;
        sp.W.segment(static_cast<Index>(r) * ns, ns) = v;
    }

    // Block lower-triangular input map: C(r, c) = A_loc^(r-c) B_loc.
    sp.C = Eigen::MatrixXd::Zero(ns * T, nc * T);
    Eigen::MatrixXd power_b = rp.B_loc;
    for (int t = 0; t < T; ++t) {
        if (t > 0) power_b = rp.A_loc * power_b;
        for (int c = 0; c + t < T; ++c)
            sp.C.block(static_cast<Index>(c + t) * ns, static_cast<Index>(c) * nc, ns, nc) =
                power_b;
    }

    // Column w_slot of the reduced constraint spaces, stacked in the same
    // ordering as W; the terminal block (time T+1) is forced to zero.
    sp.state_mask.assign(static_cast<std::size_t>(ns * T), 0);
    for (int r = 0; r + 1 < T; ++r) {
        const SparsityPattern& tap = state_space.tap(r + 2);
        for (Index p = 0; p < ns; ++p)
            sp.state_mask[static_cast<std::size_t>(static_cast<Index>(r) * ns + p)] =
                tap.get(rp.state_map[static_cast<std::size_t>(p)], rp.j) ? 1 : 0;
    }
    sp.control_mask.assign(static_cast<std::size_t>(nc * T), 0);
    for (int c = 0; c < T; ++c) {
        const SparsityPattern& tap = control_space.tap(c + 1);
        for (Index q = 0; q < nc; ++q)
            sp.control_mask[static_cast<std::size_t>(static_cast<Index>(c) * nc + q)] =
                tap.get(rp.control_map[static_cast<std::size_t>(q)], rp.j) ? 1 : 0;
    }

    sp.initial_state_allowed = state_space.tap(1).get(rp.j, rp.j);
    return sp;
}

namespace {

std::vector<Index> mask_indices(const std::vector<std::uint8_t>& mask, bool value) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if ((mask[i] != 0) == value) out.push_back(static_cast<Index>(i));
    return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<Index>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = m.col(cols[c]);
    return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
    Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
    return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
    Eigen::VectorXd out(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Index>(r)] = v[rows[r]];
    return out;
}

}  // namespace

LocalSolution solve_local_feasibility(const StackedLocalProblem& sp, double tol) {
    LocalSolution sol;

    const std::vector<Index> free_controls = mask_indices(sp.control_mask, true);
    const std::vector<Index> zero_rows = mask_indices(sp.state_mask, false);

    const Eigen::MatrixXd c_free = select_columns(sp.C, free_controls);
    const Eigen::VectorXd w_zero = select_rows(sp.W, zero_rows);
    const Eigen::MatrixXd c_zero = select_rows(c_free, zero_rows);

    Eigen::VectorXd u_free = Eigen::VectorXd::Zero(static_cast<Index>(free_controls.size()));
    if (!free_controls.empty() && !zero_rows.empty()) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c_zero);
        cod.setThreshold(kRankThreshold);
        u_free = cod.solve(-w_zero);
    }

    sol.residual = zero_rows.empty() ? 0.0 : (w_zero + c_zero * u_free).cwiseAbs().maxCoeff();
    if (!sp.initial_state_allowed) sol.residual = std::max(sol.residual, 1.0);
    sol.feasible = sp.initial_state_allowed && sol.residual <= tol;

    sol.U = Eigen::VectorXd::Zero(sp.C.cols());
    for (std::size_t c = 0; c < free_controls.size(); ++c)
        sol.U[free_controls[c]] = u_free[static_cast<Index>(c)];
    sol.X = sp.W + c_free * u_free;
    // Zero-forced entries carry only solver round-off; pin them exactly so
    // embedded columns respect the constraint supports bit-for-bit.
    for (Index row : zero_rows) sol.X[row] = 0.0;
    return sol;
}

GlobalSolveResult solve_global(const Plant& plant, const ConstraintSpace& state_space,
                               const ConstraintSpace& control_space, int T) {
    const Index n = plant.num_states();
    const Index m = plant.num_controls();
    require(state_space.rows() == n && state_space.cols() == n,
            "solve_global: state constraint shape mismatch");
    require(control_space.rows() == m && control_space.cols() == n,
            "solve_global: control constraint shape mismatch");
    require(state_space.horizon() == T && control_space.horizon() == T,
            "solve_global: constraint horizons must equal T");

    const double tol = feasibility_tolerance(plant);

    std::vector<Eigen::MatrixXd> r_taps(static_cast<std::size_t>(T),
                                        Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::MatrixXd> m_taps(static_cast<std::size_t>(T),
                                        Eigen::MatrixXd::Zero(m, n));
    r_taps[0] = Eigen::MatrixXd::Identity(n, n);

    GlobalSolveResult result;
    result.columns.resize(static_cast<std::size_t>(n));

    detail::parallel_for_index(n, [&](Index j) {
        const ReducedPlant rp = reduce(plant, j, required_locality(plant, state_space,
                                                                   control_space, j));
        const StackedLocalProblem sp = build_stacked(rp, state_space, control_space, T);
        const LocalSolution sol = solve_local_feasibility(sp, tol);

        result.columns[static_cast<std::size_t>(j)] = {j, sol.feasible, sol.residual};
        if (!sol.feasible) return;

        const Index ns = static_cast<Index>(rp.state_map.size());
        const Index nc = static_cast<Index>(rp.control_map.size());
        for (int k = 2; k <= T; ++k) {
            const Eigen::VectorXd block = sol.X.segment(static_cast<Index>(k - 2) * ns, ns);
            r_taps[static_cast<std::size_t>(k - 1)].col(j) = embed_state(rp, block, n);
        }
        for (int k = 1; k <= T; ++k) {
            const Eigen::VectorXd block = sol.U.segment(static_cast<Index>(k - 1) * nc, nc);
            m_taps[static_cast<std::size_t>(k - 1)].col(j) = embed_control(rp, block, m);
        }
    });

    for (const auto& verdict : result.columns)
        if (!verdict.feasible) result.infeasible_columns.push_back(verdict.column);
    result.feasible = result.infeasible_columns.empty();
    if (result.feasible) result.maps.emplace(std::move(r_taps), std::move(m_taps));
    return result;
}

int required_locality(const Plant& plant, const ConstraintSpace& state_space,
                      const ConstraintSpace& control_space, Index j) {
    const Index n = plant.num_states();

    // Hop distances from j along the interconnection graph.
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::vector<Index> frontier{j};
    dist[static_cast<std::size_t>(j)] = 0;
    while (!frontier.empty()) {
        std::vector<Index> next;
        for (Index s : frontier) {
            for (Index t : plant.A_pattern().col_support(s)) {
                if (dist[static_cast<std::size_t>(t)] < 0) {
                    dist[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(s)] + 1;
                    next.push_back(t);
                }
            }
        }
        frontier = std::move(next);
    }

    int need = 0;
    for (int k = 1; k <= state_space.horizon(); ++k)
        for (Index s : state_space.tap(k).col_support(j)) {
            const int ds = dist[static_cast<std::size_t>(s)];
            if (ds > need) need = ds;  // unreachable states stay structurally zero
        }
    for (int k = 1; k <= control_space.horizon(); ++k)
        for (Index i : control_space.tap(k).col_support(j))
            for (Index row : plant.B_pattern().col_support(i)) {
                const int dr = dist[static_cast<std::size_t>(row)];
                if (dr - 1 > need) need = dr - 1;
            }
    return need;
}

LocalizabilityReport check_localizable(const Plant& plant, int d, int T, double h) {
    const LocalizedConstraints constraints =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), d, T, h);
    const GlobalSolveResult global =
        solve_global(plant, constraints.state_space, constraints.control_space, T);

    LocalizabilityReport report;
    report.d = d;
    report.T = T;
    report.h = h;
    report.localizable = global.feasible;
    report.columns = global.columns;
    return report;
}

void save_maps(std::ostream& os, const ClosedLoopMaps& maps) {
    os << maps.num_states() << ' ' << maps.num_controls() << ' ' << maps.horizon() << '\n';
    for (int k = 1; k <= maps.horizon(); ++k) write_matrix(os, maps.R(k));
    for (int k = 1; k <= maps.horizon(); ++k) write_matrix(os, maps.M(k));
}

void save_maps(const std::string& path, const ClosedLoopMaps& maps) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_maps: cannot open " + path);
    save_maps(os, maps);
}

ClosedLoopMaps load_maps(std::istream& is) {
    Index n = 0, m = 0;
    int T = 0;
    if (!(is >> n >> m >> T) || n < 1 || m < 0 || T < 1)
        throw std::runtime_error("load_maps: malformed header");
    std::vector<Eigen::MatrixXd> r_taps, m_taps;
    r_taps.reserve(static_cast<std::size_t>(T));
    m_taps.reserve(static_cast<std::size_t>(T));
    for (int k = 0; k < T; ++k) r_taps.push_back(read_matrix(is, n, n, "load_maps: R tap"));
    for (int k = 0; k < T; ++k) m_taps.push_back(read_matrix(is, m, n, "load_maps: M tap"));
    return ClosedLoopMaps(std::move(r_taps), std::move(m_taps));
}

ClosedLoopMaps load_maps(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_maps: cannot open " + path);
    return load_maps(is);
}

}  // namespace llqr
