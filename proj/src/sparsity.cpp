#include "llqr/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace llqr {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace

SparsityPattern::SparsityPattern(Index rows, Index cols)
    : rows_(rows), cols_(cols), mask_(static_cast<std::size_t>(rows * cols), 0) {
    require(rows >= 0 && cols >= 0, "SparsityPattern: negative dimension");
}

SparsityPattern SparsityPattern::identity(Index n) {
    SparsityPattern p(n, n);
    for (Index i = 0; i < n; ++i) p.set(i, i);
    return p;
}

SparsityPattern SparsityPattern::ones(Index rows, Index cols) {
    SparsityPattern p(rows, cols);
    std::fill(p.mask_.begin(), p.mask_.end(), std::uint8_t{1});
    return p;
}

Index SparsityPattern::idx(Index i, Index j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw std::out_of_range("SparsityPattern: index out of range");
    return i * cols_ + j;
}

Index SparsityPattern::nnz() const {
    return std::accumulate(mask_.begin(), mask_.end(), Index{0},
                           [](Index acc, std::uint8_t v) { return acc + (v != 0); });
}

std::vector<std::pair<Index, Index>> SparsityPattern::entries() const {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(static_cast<std::size_t>(nnz()));
    for (Index i = 0; i < rows_; ++i)
        for (Index j = 0; j < cols_; ++j)
            if (get(i, j)) out.emplace_back(i, j);
    return out;
}

std::vector<Index> SparsityPattern::row_support(Index i) const {
    std::vector<Index> out;
    for (Index j = 0; j < cols_; ++j)
        if (get(i, j)) out.push_back(j);
    return out;
}

std::vector<Index> SparsityPattern::col_support(Index j) const {
    std::vector<Index> out;
    for (Index i = 0; i < rows_; ++i)
        if (get(i, j)) out.push_back(i);
    return out;
}

bool SparsityPattern::subset_of(const SparsityPattern& other) const {
    require(rows_ == other.rows_ && cols_ == other.cols_,
            "subset_of: shape mismatch");
    for (std::size_t k = 0; k < mask_.size(); ++k)
        if (mask_[k] && !other.mask_[k]) return false;
    return true;
}

SparsityPattern SparsityPattern::transposed() const {
    SparsityPattern out(cols_, rows_);
    for (Index i = 0; i < rows_; ++i)
        for (Index j = 0; j < cols_; ++j)
            if (get(i, j)) out.set(j, i);
    return out;
}

SparsityPattern& SparsityPattern::operator|=(const SparsityPattern& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "pattern union: shape mismatch");
    for (std::size_t k = 0; k < mask_.size(); ++k)
        mask_[k] = mask_[k] | other.mask_[k];
    return *this;
}

SparsityPattern support(const Eigen::MatrixXd& matrix, double tol) {
    SparsityPattern p(matrix.rows(), matrix.cols());
    for (Index i = 0; i < matrix.rows(); ++i)
        for (Index j = 0; j < matrix.cols(); ++j)
            if (std::abs(matrix(i, j)) > tol) p.set(i, j);
    return p;
}

SparsityPattern pattern_product(const SparsityPattern& s2, const SparsityPattern& s3) {
    require(s2.cols() == s3.rows(), "pattern_product: inner dimension mismatch");
    SparsityPattern out(s2.rows(), s3.cols());
    for (Index i = 0; i < s2.rows(); ++i) {
        for (Index k = 0; k < s2.cols(); ++k) {
            if (!s2.get(i, k)) continue;
            for (Index j = 0; j < s3.cols(); ++j)
                if (s3.get(k, j)) out.set(i, j);
        }
    }
    return out;
}

SparsityPattern pattern_power(const SparsityPattern& s0, int p) {
    require(s0.rows() == s0.cols(), "pattern_power: pattern must be square");
    require(p >= 0, "pattern_power: negative exponent");
    SparsityPattern out = SparsityPattern::identity(s0.rows());
    for (int i = 0; i < p; ++i) out = pattern_product(out, s0);
    return out;
}

SparsityPattern pattern_power_union(const SparsityPattern& s0, int d) {
    require(s0.rows() == s0.cols(), "pattern_power_union: pattern must be square");
    require(d >= 0, "pattern_power_union: negative radius");
    const Index n = s0.rows();
    SparsityPattern acc = SparsityPattern::identity(n);
    SparsityPattern cur = SparsityPattern::identity(n);
    const SparsityPattern full = SparsityPattern::ones(n, n);
    for (int i = 1; i <= d && acc != full; ++i) {
        cur = pattern_product(cur, s0);
        acc |= cur;
    }
    return acc;
}

std::optional<int> graph_distance(const SparsityPattern& s0, Index from, Index to) {
    require(s0.rows() == s0.cols(), "graph_distance: pattern must be square");
    const Index n = s0.rows();
    require(from >= 0 && from < n && to >= 0 && to < n, "graph_distance: node out of range");
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::queue<Index> frontier;
    dist[static_cast<std::size_t>(from)] = 0;
    frontier.push(from);
    while (!frontier.empty()) {
        const Index s = frontier.front();
        frontier.pop();
        if (s == to) return dist[static_cast<std::size_t>(s)];
        // Edge s -> t corresponds to entry (t, s).
        for (Index t : s0.col_support(s)) {
            if (dist[static_cast<std::size_t>(t)] < 0) {
                dist[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(s)] + 1;
                frontier.push(t);
            }
        }
    }
    return std::nullopt;
}

std::vector<Index> localized_region(const SparsityPattern& s0, Index j, int d,
                                    Direction direction) {
    const SparsityPattern reach = pattern_power_union(s0, d);
    return direction == Direction::incoming ? reach.row_support(j) : reach.col_support(j);
}

bool is_d_localized(const SparsityPattern& x, const SparsityPattern& a_pattern, int d) {
    require(x.rows() == a_pattern.rows() && x.cols() == a_pattern.cols(),
            "is_d_localized: shape mismatch");
    return x.subset_of(pattern_power_union(a_pattern, d));
}

ConstraintSpace::ConstraintSpace(std::vector<SparsityPattern> taps) : taps_(std::move(taps)) {
    require(!taps_.empty(), "ConstraintSpace: at least one tap required");
    for (const auto& tap : taps_)
        require(tap.rows() == taps_.front().rows() && tap.cols() == taps_.front().cols(),
                "ConstraintSpace: all taps must share one shape");
}

const SparsityPattern& ConstraintSpace::tap(int k) const {
    if (k < 1 || k > horizon()) throw std::out_of_range("ConstraintSpace: tap out of range");
    return taps_[static_cast<std::size_t>(k - 1)];
}

bool is_d_localized(const ConstraintSpace& space, const SparsityPattern& a_pattern, int d) {
    const SparsityPattern bound = pattern_power_union(a_pattern, d);
    for (int k = 1; k <= space.horizon(); ++k)
        if (!space.tap(k).subset_of(bound)) return false;
    return true;
}

namespace {

// min(cap, floor(h * steps)), robust to h = infinity.
int delay_exponent(double h, int steps, int cap) {
    if (steps <= 0) return 0;
    const double scaled = h * static_cast<double>(steps);
    if (!(scaled < static_cast<double>(cap))) return cap;
    return static_cast<int>(std::floor(scaled));
}

}  // namespace

LocalizedConstraints build_localized_fir_constraints(const SparsityPattern& a_pattern,
                                                     const SparsityPattern& b_pattern,
                                                     int d, int T, double h) {
    require(a_pattern.rows() == a_pattern.cols(), "build_localized_fir_constraints: A not square");
    require(b_pattern.rows() == a_pattern.rows(),
            "build_localized_fir_constraints: B row count mismatch");
    require(d >= 0, "build_localized_fir_constraints: d must be nonnegative");
    require(T >= 2, "build_localized_fir_constraints: T must be at least 2");
    require(h >= 1.0, "build_localized_fir_constraints: h must be at least 1");

    const Index n = a_pattern.rows();
    const Index m = b_pattern.cols();

    std::vector<SparsityPattern> a_powers;
    a_powers.reserve(static_cast<std::size_t>(d) + 2);
    a_powers.push_back(SparsityPattern::identity(n));
    for (int p = 1; p <= d + 1; ++p)
        a_powers.push_back(pattern_product(a_powers.back(), a_pattern));

    std::vector<SparsityPattern> sx_taps;
    sx_taps.reserve(static_cast<std::size_t>(T));
    for (int k = 1; k <= T; ++k)
        sx_taps.push_back(a_powers[static_cast<std::size_t>(delay_exponent(h, k - 1, d))]);

    // Control taps start at k = 2: the estimate of w[k-tau] is formed once
    // x[k-tau+1] is measured and then travels s/h hops per step, so the tap-k
    // row support reaches radius floor(h (k-1)). For non-scalar sub-systems a
    // control may act on a column only when its whole actuation footprint
    // stays inside the (d+1)-region of that column.
    const SparsityPattern bt = b_pattern.transposed();
    const SparsityPattern region = pattern_power_union(a_pattern, d + 1);
    std::vector<std::vector<Index>> footprints;
    footprints.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) footprints.push_back(b_pattern.col_support(i));

    std::vector<SparsityPattern> su_taps;
    su_taps.reserve(static_cast<std::size_t>(T));
    su_taps.emplace_back(m, n);
    for (int k = 2; k <= T; ++k) {
        SparsityPattern tap = pattern_product(
            bt, a_powers[static_cast<std::size_t>(delay_exponent(h, k - 1, d + 1))]);
        for (Index i = 0; i < m; ++i)
            for (Index c = 0; c < n; ++c)
                if (tap.get(i, c)) {
                    const bool contained =
                        std::all_of(footprints[static_cast<std::size_t>(i)].begin(),
                                    footprints[static_cast<std::size_t>(i)].end(),
                                    [&](Index row) { return region.get(row, c); });
                    if (!contained) tap.set(i, c, false);
                }
        su_taps.push_back(std::move(tap));
    }

    LocalizedConstraints out{ConstraintSpace(std::move(sx_taps)),
                             ConstraintSpace(std::move(su_taps))};

    // Deliverability: reference trajectories must be computable before the
    // corresponding measurements arrive.
    for (int k = 1; k < T; ++k) {
        const SparsityPattern& needed = a_powers[static_cast<std::size_t>(std::min(k, d))];
        if (!needed.subset_of(out.state_space.tap(k + 1)))
            throw std::domain_error(
                "build_localized_fir_constraints: communication delay condition violated at tap " +
                std::to_string(k + 1));
    }

    if (!validate_localized_fir_constraints(out.state_space, out.control_space, a_pattern,
                                            b_pattern, d, T))
        throw std::domain_error(
            "build_localized_fir_constraints: constructed pair fails the localized FIR conditions");

    return out;
}

bool validate_localized_fir_constraints(const ConstraintSpace& state_space,
                                        const ConstraintSpace& control_space,
                                        const SparsityPattern& a_pattern,
                                        const SparsityPattern& b_pattern, int d, int T) {
    require(a_pattern.rows() == a_pattern.cols(), "validate_localized_fir_constraints: A not square");
    require(state_space.rows() == a_pattern.rows() && state_space.cols() == a_pattern.cols(),
            "validate_localized_fir_constraints: S_x shape mismatch");
    require(control_space.rows() == b_pattern.cols() && control_space.cols() == a_pattern.rows(),
            "validate_localized_fir_constraints: S_u shape mismatch");

    if (state_space.horizon() != T || control_space.horizon() != T) return false;
    if (!is_d_localized(state_space, a_pattern, d)) return false;

    const SparsityPattern bound = pattern_power_union(a_pattern, d + 1);
    for (int k = 1; k <= T; ++k)
        if (!pattern_product(b_pattern, control_space.tap(k)).subset_of(bound)) return false;
    return true;
}

void save_pattern(std::ostream& os, const SparsityPattern& pattern) {
    os << pattern.rows() << ' ' << pattern.cols() << ' ' << pattern.nnz() << '\n';
    for (const auto& [i, j] : pattern.entries()) os << i + 1 << ' ' << j + 1 << '\n';
}

void save_pattern(const std::string& path, const SparsityPattern& pattern) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_pattern: cannot open " + path);
    save_pattern(os, pattern);
}

SparsityPattern load_pattern(std::istream& is) {
    Index rows = 0, cols = 0, nnz = 0;
    if (!(is >> rows >> cols >> nnz)) throw std::runtime_error("load_pattern: malformed header");
    SparsityPattern p(rows, cols);
    for (Index e = 0; e < nnz; ++e) {
        Index i = 0, j = 0;
        if (!(is >> i >> j)) throw std::runtime_error("load_pattern: truncated entry list");
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw std::runtime_error("load_pattern: entry out of bounds");
        p.set(i - 1, j - 1);
    }
    return p;
}

SparsityPattern load_pattern(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_pattern: cannot open " + path);
    return load_pattern(is);
}

}  // namespace llqr
