#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "llqr/baseline.hpp"
#include "llqr/plant.hpp"
#include "oracles.hpp"

using namespace llqr;

namespace {

Plant small_chain(Index n) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        if (i + 1 < n) {
            a(i, i + 1) = 0.2;
            a(i + 1, i) = -0.2;
        }
    }
    return Plant(a, Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

TEST_CASE("benchmark chain plant") {
    const Plant plant = make_chain_benchmark();
    CHECK(plant.num_states() == 59);
    CHECK(plant.num_controls() == 20);
    CHECK(spectral_radius(plant.A()) == doctest::Approx(1.0768).epsilon(1e-3));
    CHECK(plant.A()(0, 1) == 0.2);
    CHECK(plant.A()(1, 0) == -0.2);

    CHECK(plant.B_pattern().nnz() == 20);
    std::vector<Index> actuated_rows;
    for (Index i = 0; i < 59; ++i)
        if (!plant.B_pattern().row_support(i).empty()) actuated_rows.push_back(i);
    std::vector<Index> expected;
    for (Index k = 0; k < 10; ++k) {
        expected.push_back(6 * k);
        expected.push_back(6 * k + 1);
    }
    CHECK(actuated_rows == expected);
}

TEST_CASE("reduction to the localized region") {
    const Plant chain = make_chain_benchmark();

    SUBCASE("benchmark middle column") {
        const ReducedPlant rp = reduce(chain, 29, 9);
        std::vector<Index> expected;
        for (Index i = 19; i <= 39; ++i) expected.push_back(i);
        CHECK(rp.state_map == expected);
        CHECK(rp.state_map[static_cast<std::size_t>(rp.w_slot)] == 29);
        const auto dist = test::bfs_distances(chain.A_pattern(), 29);
        for (Index s : rp.state_map) CHECK(dist[static_cast<std::size_t>(s)] <= 10);
    }

    SUBCASE("radius beyond the diameter keeps everything") {
        const Plant five = small_chain(5);
        const ReducedPlant rp = reduce(five, 2, 5);
        CHECK(rp.state_map.size() == 5);
        CHECK(rp.A_loc == five.A());
        CHECK(rp.control_map.size() == 5);
    }

    SUBCASE("scalar subsystems keep control and state maps aligned") {
        const Plant five = small_chain(5);
        const ReducedPlant rp = reduce(five, 1, 1);
        CHECK(rp.control_map == rp.state_map);
    }

    SUBCASE("submatrix content") {
        const ReducedPlant rp = reduce(chain, 4, 2);
        for (std::size_t p = 0; p < rp.state_map.size(); ++p)
            for (std::size_t q = 0; q < rp.state_map.size(); ++q)
                CHECK(rp.A_loc(static_cast<Index>(p), static_cast<Index>(q)) ==
                      chain.A()(rp.state_map[p], rp.state_map[q]));
        for (std::size_t p = 0; p < rp.state_map.size(); ++p)
            for (std::size_t q = 0; q < rp.control_map.size(); ++q)
                CHECK(rp.B_loc(static_cast<Index>(p), static_cast<Index>(q)) ==
                      chain.B()(rp.state_map[p], rp.control_map[q]));
    }
}

TEST_CASE("reduction is idempotent in content") {
    const Plant chain = make_chain_benchmark();
    const ReducedPlant rp = reduce(chain, 29, 4);
    const Plant relabeled(rp.A_loc, rp.B_loc);
    const ReducedPlant again = reduce(relabeled, rp.w_slot, 4);
    CHECK(again.state_map.size() == rp.state_map.size());
    CHECK(again.control_map.size() == rp.control_map.size());
    CHECK(again.A_loc == rp.A_loc);
    CHECK(again.B_loc == rp.B_loc);
    CHECK(again.w_slot == rp.w_slot);
}

TEST_CASE("embedding operators") {
    const Plant chain = make_chain_benchmark();
    const ReducedPlant rp = reduce(chain, 29, 9);
    const Index ns = static_cast<Index>(rp.state_map.size());

    CHECK(embed_state(rp, Eigen::VectorXd::Unit(ns, rp.w_slot), 59) ==
          Eigen::VectorXd::Unit(59, 29));
    CHECK(embed_state(rp, Eigen::VectorXd::Zero(ns), 59) == Eigen::VectorXd::Zero(59));

    ReducedPlant toy;
    toy.state_map = {1, 2, 3};
    Eigen::VectorXd embedded = embed_state(toy, Eigen::VectorXd::Ones(3), 5);
    Eigen::VectorXd expected(5);
    expected << 0, 1, 1, 1, 0;
    CHECK(embedded == expected);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(ns);
    for (Index i = 0; i < ns; ++i) v[i] = normal(rng);
    CHECK(restrict_state(rp, embed_state(rp, v, 59)) == v);

    CHECK_THROWS_AS(embed_state(rp, Eigen::VectorXd::Zero(ns + 1), 59), std::invalid_argument);
}

TEST_CASE("embedded local dynamics commute with the full plant") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal;
    const test::Topology topologies[] = {test::Topology::chain, test::Topology::ring,
                                         test::Topology::tree};
    for (int trial = 0; trial < 30; ++trial) {
        const Plant plant = test::random_plant(rng, topologies[trial % 3], 6 + trial % 3);
        const Index n = plant.num_states();
        std::uniform_int_distribution<Index> site(0, n - 1);
        const Index j = site(rng);
        const int d = trial % 3;
        const ReducedPlant rp = reduce(plant, j, d);

        // state support inside the inner region, as the masks guarantee
        const auto inner = localized_region(plant.A_pattern(), j, d, Direction::outgoing);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Index>(rp.state_map.size()));
        for (std::size_t p = 0; p < rp.state_map.size(); ++p)
            if (std::find(inner.begin(), inner.end(), rp.state_map[p]) != inner.end())
                v[static_cast<Index>(p)] = normal(rng);

        const Eigen::VectorXd lhs = embed_state(rp, rp.A_loc * v, n);
        const Eigen::VectorXd rhs = plant.A() * embed_state(rp, v, n);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);

        Eigen::VectorXd u(static_cast<Index>(rp.control_map.size()));
        for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
        const Eigen::VectorXd lhs_u = embed_state(rp, rp.B_loc * u, n);
        const Eigen::VectorXd rhs_u =
            plant.B() * embed_control(rp, u, plant.num_controls());
        CHECK((lhs_u - rhs_u).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("plant text format round trip") {
    const Plant chain = make_chain_benchmark();
    std::stringstream stream;
    save_plant(stream, chain);
    const Plant reloaded = load_plant(stream);
    CHECK(reloaded.A() == chain.A());
    CHECK(reloaded.B() == chain.B());

    std::stringstream truncated("2 1\n1 0\n");
    CHECK_THROWS_AS(load_plant(truncated), std::runtime_error);
}
