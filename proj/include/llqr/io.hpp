#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>

namespace llqr {

/// Writes one matrix as rows of space-separated reals with 17 significant
/// digits (lossless text round-trip for doubles).
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);

/// Reads rows x cols whitespace-separated reals; throws std::runtime_error
/// with `what` as context on malformed input.
Eigen::MatrixXd read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols,
                            const std::string& what);

/// CSV export of a time-indexed log: header "t,<prefix>1..<prefix>n", one row
/// per step. When log_magnitude is set, values are log10(|v| + 1e-15).
void write_log_csv(const std::string& path, const Eigen::MatrixXd& log,
                   const std::string& prefix, bool log_magnitude = false);

}  // namespace llqr
