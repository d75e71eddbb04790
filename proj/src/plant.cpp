#include "llqr/plant.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "llqr/io.hpp"

namespace llqr {

Plant::Plant(Eigen::MatrixXd A, Eigen::MatrixXd B)
    : A_(std::move(A)),
      B_(std::move(B)),
      A_pattern_(support(A_)),
      B_pattern_(support(B_)) {
    if (A_.rows() != A_.cols()) throw std::invalid_argument("Plant: A must be square");
    if (A_.rows() < 1) throw std::invalid_argument("Plant: at least one state required");
    if (B_.rows() != A_.rows()) throw std::invalid_argument("Plant: B row count mismatch");
}

Plant make_chain_benchmark() {
    constexpr Index n = 59;
    constexpr Index m = 20;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        A(i, i) = 1.0;
        if (i + 1 < n) {
            A(i, i + 1) = 0.2;
            A(i + 1, i) = -0.2;
        }
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, m);
    for (Index k = 0; k < 10; ++k) {
        B(6 * k, 2 * k) = 1.0;
        B(6 * k + 1, 2 * k + 1) = 1.0;
    }
    return Plant(std::move(A), std::move(B));
}

ReducedPlant reduce(const Plant& plant, Index j, int d) {
    const Index n = plant.num_states();
    const Index m = plant.num_controls();
    if (j < 0 || j >= n) throw std::invalid_argument("reduce: disturbance site out of range");
    if (d < 0) throw std::invalid_argument("reduce: d must be nonnegative");

    ReducedPlant rp;
    rp.j = j;
    rp.d = d;
    rp.state_map = localized_region(plant.A_pattern(), j, d + 1, Direction::outgoing);

    std::vector<Index> slot_of(static_cast<std::size_t>(n), -1);
    for (std::size_t p = 0; p < rp.state_map.size(); ++p)
        slot_of[static_cast<std::size_t>(rp.state_map[p])] = static_cast<Index>(p);
    rp.w_slot = slot_of[static_cast<std::size_t>(j)];

    for (Index i = 0; i < m; ++i) {
        const auto footprint = plant.B_pattern().col_support(i);
        const bool inside = std::all_of(footprint.begin(), footprint.end(), [&](Index row) {
            return slot_of[static_cast<std::size_t>(row)] >= 0;
        });
        if (inside) rp.control_map.push_back(i);
    }

    const Index ns = static_cast<Index>(rp.state_map.size());
    const Index nc = static_cast<Index>(rp.control_map.size());
    rp.A_loc.resize(ns, ns);
    for (Index p = 0; p < ns; ++p)
        for (Index q = 0; q < ns; ++q)
            rp.A_loc(p, q) = plant.A()(rp.state_map[static_cast<std::size_t>(p)],
                                       rp.state_map[static_cast<std::size_t>(q)]);
    rp.B_loc.resize(ns, nc);
    for (Index p = 0; p < ns; ++p)
        for (Index q = 0; q < nc; ++q)
            rp.B_loc(p, q) = plant.B()(rp.state_map[static_cast<std::size_t>(p)],
                                       rp.control_map[static_cast<std::size_t>(q)]);
    return rp;
}

namespace {

Eigen::VectorXd scatter(const std::vector<Index>& map, const Eigen::VectorXd& v, Index dim,
                        const char* what) {
    if (v.size() != static_cast<Index>(map.size()))
        throw std::invalid_argument(std::string(what) + ": length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (std::size_t p = 0; p < map.size(); ++p) {
        if (map[p] < 0 || map[p] >= dim)
            throw std::invalid_argument(std::string(what) + ": map exceeds global dimension");
        out[map[p]] = v[static_cast<Index>(p)];
    }
    return out;
}

Eigen::VectorXd gather(const std::vector<Index>& map, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(static_cast<Index>(map.size()));
    for (std::size_t p = 0; p < map.size(); ++p) out[static_cast<Index>(p)] = v[map[p]];
    return out;
}

}  // namespace

Eigen::VectorXd embed_state(const ReducedPlant& rp, const Eigen::VectorXd& v, Index n) {
    return scatter(rp.state_map, v, n, "embed_state");
}

Eigen::VectorXd embed_control(const ReducedPlant& rp, const Eigen::VectorXd& v, Index m) {
    return scatter(rp.control_map, v, m, "embed_control");
}

Eigen::VectorXd restrict_state(const ReducedPlant& rp, const Eigen::VectorXd& v) {
    return gather(rp.state_map, v);
}

Eigen::VectorXd restrict_control(const ReducedPlant& rp, const Eigen::VectorXd& v) {
    return gather(rp.control_map, v);
}

Plant load_plant(std::istream& is) {
    Index n = 0, m = 0;
    if (!(is >> n >> m) || n < 1 || m < 0)
        throw std::runtime_error("load_plant: malformed dimension header");
    const Eigen::MatrixXd A = read_matrix(is, n, n, "load_plant: A");
    const Eigen::MatrixXd B = read_matrix(is, n, m, "load_plant: B");
    return Plant(A, B);
}

Plant load_plant(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_plant: cannot open " + path);
    return load_plant(is);
}

void save_plant(std::ostream& os, const Plant& plant) {
    os << plant.num_states() << ' ' << plant.num_controls() << '\n';
    write_matrix(os, plant.A());
    write_matrix(os, plant.B());
}

void save_plant(const std::string& path, const Plant& plant) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_plant: cannot open " + path);
    save_plant(os, plant);
}

}  // namespace llqr
