#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace llqr {

using Index = Eigen::Index;

/// Absolute threshold separating structural zeros from round-off when taking
/// the support of a real matrix.
inline constexpr double kSupportTolerance = 1e-12;

/// Binary matrix marking the structural support of a real matrix (or of one
/// spectral component of a transfer function). Entries behave as a set:
/// duplicates are impossible and union is idempotent.
class SparsityPattern {
public:
    SparsityPattern() = default;
    SparsityPattern(Index rows, Index cols);

    static SparsityPattern identity(Index n);
    static SparsityPattern ones(Index rows, Index cols);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    bool get(Index i, Index j) const { return mask_[idx(i, j)] != 0; }
    void set(Index i, Index j, bool value = true) { mask_[idx(i, j)] = value ? 1 : 0; }

    Index nnz() const;
    bool empty() const { return nnz() == 0; }

    /// Sorted (row, col) pairs of the nonzero entries, row-major.
    std::vector<std::pair<Index, Index>> entries() const;

    /// Column indices of the nonzero entries in row i, ascending.
    std::vector<Index> row_support(Index i) const;
    /// Row indices of the nonzero entries in column j, ascending.
    std::vector<Index> col_support(Index j) const;

    bool subset_of(const SparsityPattern& other) const;
    SparsityPattern transposed() const;

    SparsityPattern& operator|=(const SparsityPattern& other);
    friend SparsityPattern operator|(SparsityPattern a, const SparsityPattern& b) {
        a |= b;
        return a;
    }

    friend bool operator==(const SparsityPattern& a, const SparsityPattern& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.mask_ == b.mask_;
    }
    friend bool operator!=(const SparsityPattern& a, const SparsityPattern& b) {
        return !(a == b);
    }

private:
    Index idx(Index i, Index j) const;

    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<std::uint8_t> mask_;
};

/// Support operator: entry (i, j) is set iff |M(i,j)| > tol.
SparsityPattern support(const Eigen::MatrixXd& matrix, double tol = kSupportTolerance);

/// Boolean matrix product: (S1)_{ij} = 1 iff some k has (S2)_{ik} = (S3)_{kj} = 1.
SparsityPattern pattern_product(const SparsityPattern& s2, const SparsityPattern& s3);

/// p-th boolean power of a square pattern; power 0 is the identity.
SparsityPattern pattern_power(const SparsityPattern& s0, int p);

/// Union of the boolean powers 0..d of a square pattern.
SparsityPattern pattern_power_union(const SparsityPattern& s0, int d);

/// Shortest path length from node `from` to node `to` in the directed graph
/// whose adjacency pattern is s0 (edge s -> t iff entry (t, s) is set).
/// nullopt when `to` is unreachable.
std::optional<int> graph_distance(const SparsityPattern& s0, Index from, Index to);

enum class Direction {
    incoming,  // nodes that reach j within d hops
    outgoing,  // nodes reachable from j within d hops
};

/// The d-hop region around node j: incoming returns the nonzero column
/// indices of row j of pattern_power_union(s0, d), outgoing the nonzero row
/// indices of column j.
std::vector<Index> localized_region(const SparsityPattern& s0, Index j, int d,
                                    Direction direction);

/// True iff every entry of X lies inside pattern_power_union(a_pattern, d).
bool is_d_localized(const SparsityPattern& x, const SparsityPattern& a_pattern, int d);

/// Finite sequence of sparsity patterns indexed by spectral tap k = 1..T.
/// Taps beyond T are implicitly all-zero.
class ConstraintSpace {
public:
    explicit ConstraintSpace(std::vector<SparsityPattern> taps);

    int horizon() const { return static_cast<int>(taps_.size()); }
    Index rows() const { return taps_.front().rows(); }
    Index cols() const { return taps_.front().cols(); }

    /// 1-based tap accessor: tap(k) holds S[k].
    const SparsityPattern& tap(int k) const;

private:
    std::vector<SparsityPattern> taps_;
};

bool is_d_localized(const ConstraintSpace& space, const SparsityPattern& a_pattern, int d);

struct LocalizedConstraints {
    ConstraintSpace state_space;    // S_x, taps n x n
    ConstraintSpace control_space;  // S_u, taps m x n
};

/// Constructs the localized FIR constraint pair for horizon T, locality
/// radius d and communication/propagation speed ratio h >= 1:
///   S_x[k] = Sp(A)^{min(d, floor(h (k-1)))}
///   S_u[1] = 0,  S_u[k] = Sp(B^T) Sp(A)^{min(d+1, floor(h (k-1)))} for k >= 2.
/// Throws std::domain_error when the pair fails validation or when the delay
/// deliverability condition Sp(A)^{min(k,d)} subset S_x[k+1] is violated.
LocalizedConstraints build_localized_fir_constraints(const SparsityPattern& a_pattern,
                                                     const SparsityPattern& b_pattern,
                                                     int d, int T, double h);

/// Checks the three defining conditions of a (d, T) localized FIR constraint
/// pair: both spaces finite in T, S_x d-localized w.r.t. A, and
/// Sp(B) S_u[k] (d+1)-localized for every tap.
bool validate_localized_fir_constraints(const ConstraintSpace& state_space,
                                        const ConstraintSpace& control_space,
                                        const SparsityPattern& a_pattern,
                                        const SparsityPattern& b_pattern, int d, int T);

/// Coordinate-list text format: header "rows cols nnz", then one "i j" pair
/// per line, 1-indexed, sorted row-major.
void save_pattern(std::ostream& os, const SparsityPattern& pattern);
void save_pattern(const std::string& path, const SparsityPattern& pattern);
SparsityPattern load_pattern(std::istream& is);
SparsityPattern load_pattern(const std::string& path);

}  // namespace llqr
