#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

#include "llqr/controller.hpp"
#include "llqr/feasibility.hpp"
#include "llqr/plant.hpp"
#include "oracles.hpp"

using namespace llqr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Plant small_chain(Index n, double coupling = 0.2) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        if (i + 1 < n) {
            a(i, i + 1) = coupling;
            a(i + 1, i) = -coupling;
        }
    }
    return Plant(a, Eigen::MatrixXd::Identity(n, n));
}

ConstraintSpace uniform_space(int T, const SparsityPattern& tap) {
    return ConstraintSpace(std::vector<SparsityPattern>(static_cast<std::size_t>(T), tap));
}

}  // namespace

TEST_CASE("stacked problem assembly") {
    SUBCASE("single-tap horizon forces the terminal state") {
        const Plant plant = small_chain(3);
        const ReducedPlant rp = reduce(plant, 1, 3);
        const auto sp = build_stacked(rp, uniform_space(1, SparsityPattern::identity(3)),
                                      uniform_space(1, SparsityPattern::ones(3, 3)), 1);
        CHECK(sp.W == plant.A().col(1));
        CHECK(sp.C == plant.B());
        for (auto allowed : sp.state_mask) CHECK(allowed == 0);
        for (auto allowed : sp.control_mask) CHECK(allowed == 1);
    }

    SUBCASE("zero dynamics have a zero free response") {
        const Plant plant(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 3));
        const ReducedPlant rp = reduce(plant, 0, 1);
        const auto sp = build_stacked(rp, uniform_space(4, SparsityPattern::identity(3)),
                                      uniform_space(4, SparsityPattern::identity(3)), 4);
        CHECK(sp.W.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("free response equals the open-loop impulse rollout") {
        const Plant plant = small_chain(5);
        const ReducedPlant rp = reduce(plant, 2, 1);
        const auto cons =
            build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), 1, 3, kInf);
        const auto sp = build_stacked(rp, cons.state_space, cons.control_space, 3);

        Eigen::VectorXd x = Eigen::VectorXd::Unit(static_cast<Index>(rp.state_map.size()),
                                                  rp.w_slot);
        for (int k = 0; k < 3; ++k) {
            x = rp.A_loc * x;  // u = 0
            const Eigen::VectorXd block =
                sp.W.segment(static_cast<Index>(k) * x.size(), x.size());
            CHECK((block - x).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("local feasibility solve") {
    SUBCASE("deadbeat already holds open loop") {
        const Plant plant(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
        const ReducedPlant rp = reduce(plant, 0, 0);
        const auto sp = build_stacked(rp, uniform_space(1, SparsityPattern::identity(2)),
                                      uniform_space(1, SparsityPattern::identity(2)), 1);
        const LocalSolution sol = solve_local_feasibility(sp, feasibility_tolerance(plant));
        CHECK(sol.feasible);
        CHECK(sol.U.cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.X.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("scalar deadbeat is forced") {
        const Plant plant((Eigen::MatrixXd(1, 1) << 2.0).finished(),
                          (Eigen::MatrixXd(1, 1) << 1.0).finished());
        const ReducedPlant rp = reduce(plant, 0, 0);
        const auto sp = build_stacked(rp, uniform_space(1, SparsityPattern::identity(1)),
                                      uniform_space(1, SparsityPattern::identity(1)), 1);
        const LocalSolution sol = solve_local_feasibility(sp, feasibility_tolerance(plant));
        CHECK(sol.feasible);
        CHECK(sol.U[0] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(sol.X[0] == 0.0);
    }

    SUBCASE("no control authority over an unstable mode") {
        const Plant plant((Eigen::MatrixXd(1, 1) << 2.0).finished(), Eigen::MatrixXd(1, 0));
        const ReducedPlant rp = reduce(plant, 0, 0);
        const auto sp = build_stacked(rp, uniform_space(2, SparsityPattern::identity(1)),
                                      uniform_space(2, SparsityPattern(0, 1)), 2);
        const LocalSolution sol = solve_local_feasibility(sp, feasibility_tolerance(plant));
        CHECK(!sol.feasible);
        CHECK(sol.residual == doctest::Approx(4.0));  // |a^2| at the terminal row
    }
}

TEST_CASE("benchmark localizability") {
    const Plant plant = make_chain_benchmark();
    const LocalizabilityReport report = check_localizable(plant, 9, 29, 1.5);
    CHECK(report.localizable);
    CHECK(report.columns.size() == 59);
    const double tol = feasibility_tolerance(plant);
    for (const auto& c : report.columns) {
        CHECK(c.feasible);
        CHECK(c.residual <= tol);
    }
}

TEST_CASE("actuator removal destroys localizability") {
    const Plant plant = make_chain_benchmark();
    const Plant unactuated(plant.A(), Eigen::MatrixXd::Zero(59, 0));
    const LocalizabilityReport report = check_localizable(unactuated, 9, 29, 1.5);
    CHECK(!report.localizable);
    for (const auto& c : report.columns) CHECK(!c.feasible);
}

TEST_CASE("global solve matches the monolithic stacked system") {
    std::mt19937_64 rng(41);
    const test::Topology topologies[] = {test::Topology::chain, test::Topology::ring,
                                         test::Topology::tree};
    int feasible_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<Index> size(3, 6);
        std::uniform_int_distribution<int> locality(0, 2);
        std::uniform_int_distribution<int> horizon(2, 6);
        const Plant plant =
            test::random_plant(rng, topologies[trial % 3], size(rng), 1.05,
                               trial % 2 == 0 ? 0.95 : 0.6);
        const int d = trial % 2 == 0 ? 1 + locality(rng) / 2 : locality(rng);
        const int T = horizon(rng);
        const double h = (trial % 2 == 0) ? 1.5 : kInf;

        LocalizedConstraints cons = [&] {
            try {
                return build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), d,
                                                       T, h);
            } catch (const std::domain_error&) {
                return build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), d,
                                                       T, kInf);
            }
        }();

        const double tol = feasibility_tolerance(plant);
        const GlobalSolveResult mine =
            solve_global(plant, cons.state_space, cons.control_space, T);
        const test::MonolithicResult oracle =
            test::monolithic_feasibility(plant, cons.state_space, cons.control_space, T, tol);
        CHECK(mine.feasible == oracle.feasible);
        if (!mine.feasible) continue;
        ++feasible_seen;

        CHECK(recursion_residual(plant, *mine.maps) <= 1e-8);
        CHECK(recursion_residual(plant, *oracle.maps) <= 1e-8);

        // Converse direction: the oracle's globally feasible columns restrict
        // to feasible points of each local problem.
        for (Index j = 0; j < plant.num_states(); ++j) {
            const ReducedPlant rp =
                reduce(plant, j, required_locality(plant, cons.state_space,
                                                   cons.control_space, j));
            const auto sp = build_stacked(rp, cons.state_space, cons.control_space, T);
            const Index ns = static_cast<Index>(rp.state_map.size());
            const Index nc = static_cast<Index>(rp.control_map.size());
            Eigen::VectorXd X(ns * T), U(nc * T);
            for (int k = 2; k <= T + 1; ++k) {
                const Eigen::VectorXd col =
                    k <= T ? Eigen::VectorXd(oracle.maps->R(k).col(j))
                           : Eigen::VectorXd(Eigen::VectorXd::Zero(plant.num_states()));
                X.segment(static_cast<Index>(k - 2) * ns, ns) = restrict_state(rp, col);
            }
            for (int k = 1; k <= T; ++k)
                U.segment(static_cast<Index>(k - 1) * nc, nc) =
                    restrict_control(rp, oracle.maps->M(k).col(j));
            CHECK((X - sp.W - sp.C * U).cwiseAbs().maxCoeff() <= 1e-8);
            for (Index r = 0; r < ns * T; ++r)
                if (!sp.state_mask[static_cast<std::size_t>(r)])
                    CHECK(std::abs(X[r]) <= 1e-8);
        }
    }
    CHECK(feasible_seen >= 10);
}

TEST_CASE("three-state chain: verdicts and supports match the monolithic solve") {
    const Plant plant = small_chain(3);
    const auto cons =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), 1, 4, kInf);
    const GlobalSolveResult mine =
        solve_global(plant, cons.state_space, cons.control_space, 4);
    const test::MonolithicResult oracle = test::monolithic_feasibility(
        plant, cons.state_space, cons.control_space, 4, feasibility_tolerance(plant));
    REQUIRE(mine.feasible);
    REQUIRE(oracle.feasible);
    for (int k = 1; k <= 4; ++k) {
        CHECK(support(mine.maps->R(k), 1e-9) == support(oracle.maps->R(k), 1e-9));
        CHECK(support(mine.maps->M(k), 1e-9) == support(oracle.maps->M(k), 1e-9));
    }
}

TEST_CASE("assembled maps respect the constraint supports exactly") {
    const Plant plant = small_chain(5);
    const auto cons =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), 2, 6, 1.5);
    const GlobalSolveResult solved =
        solve_global(plant, cons.state_space, cons.control_space, 6);
    REQUIRE(solved.feasible);
    for (int k = 1; k <= 6; ++k) {
        CHECK(support(solved.maps->R(k), 0.0).subset_of(cons.state_space.tap(k)));
        CHECK(support(solved.maps->M(k), 0.0).subset_of(cons.control_space.tap(k)));
    }
}

TEST_CASE("closed-loop maps reproduce the simulated impulse response") {
    const Plant plant = small_chain(5);
    const auto cons =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), 2, 6, 2.0);
    const GlobalSolveResult solved =
        solve_global(plant, cons.state_space, cons.control_space, 6);
    REQUIRE(solved.feasible);

    for (Index j = 0; j < 5; ++j) {
        const SimTrace trace =
            simulate(plant, *solved.maps, impulse_disturbance(20, 5, j, 0), Scheme::receding);
        for (int k = 1; k <= 6; ++k)
            CHECK((trace.x_log.row(k).transpose() - solved.maps->R(k).col(j))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-9);
        for (int k = 7; k < 20; ++k)
            CHECK(trace.x_log.row(k).cwiseAbs().maxCoeff() <= feasibility_tolerance(plant));
    }
}

TEST_CASE("column problems ignore plant changes outside their region") {
    const Plant plant = make_chain_benchmark();
    const int d = 3;
    const Index j = 29;
    const auto cons =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), d, 8, 1.5);
    const ReducedPlant rp = reduce(plant, j, d);
    const auto sp = build_stacked(rp, cons.state_space, cons.control_space, 8);

    Eigen::MatrixXd a2 = plant.A();
    a2(0, 1) = 7.5;  // far outside the (d+1)-region of column j
    a2(55, 55) = -3.0;
    const Plant changed(a2, plant.B());
    const auto cons2 =
        build_localized_fir_constraints(changed.A_pattern(), changed.B_pattern(), d, 8, 1.5);
    const ReducedPlant rp2 = reduce(changed, j, d);
    const auto sp2 = build_stacked(rp2, cons2.state_space, cons2.control_space, 8);

    CHECK(rp2.state_map == rp.state_map);
    CHECK(rp2.control_map == rp.control_map);
    CHECK(sp2.W == sp.W);
    CHECK(sp2.C == sp.C);
    CHECK(sp2.state_mask == sp.state_mask);
    CHECK(sp2.control_mask == sp.control_mask);
}

TEST_CASE("maps serialization round trips bit-exactly") {
    const Plant plant = small_chain(4);
    const auto cons =
        build_localized_fir_constraints(plant.A_pattern(), plant.B_pattern(), 1, 4, kInf);
    const GlobalSolveResult solved =
        solve_global(plant, cons.state_space, cons.control_space, 4);
    REQUIRE(solved.feasible);

    std::stringstream stream;
    save_maps(stream, *solved.maps);
    const ClosedLoopMaps reloaded = load_maps(stream);
    for (int k = 1; k <= 4; ++k) {
        CHECK(reloaded.R(k) == solved.maps->R(k));
        CHECK(reloaded.M(k) == solved.maps->M(k));
    }
}
