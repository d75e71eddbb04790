#include "llqr/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace llqr {

namespace {
constexpr int kTextDigits = 17;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    const auto old_precision = os.precision(kTextDigits);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
    os.precision(old_precision);
}

Eigen::MatrixXd read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols,
                            const std::string& what) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(is >> m(i, j)))
                throw std::runtime_error(what + ": malformed or truncated matrix data");
    return m;
}

void write_log_csv(const std::string& path, const Eigen::MatrixXd& log,
                   const std::string& prefix, bool log_magnitude) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_log_csv: cannot open " + path);
    os.precision(kTextDigits);
    os << 't';
    for (Eigen::Index j = 0; j < log.cols(); ++j) os << ',' << prefix << j + 1;
    os << '\n';
    for (Eigen::Index k = 0; k < log.rows(); ++k) {
        os << k;
        for (Eigen::Index j = 0; j < log.cols(); ++j) {
            const double v =
                log_magnitude ? std::log10(std::abs(log(k, j)) + 1e-15) : log(k, j);
            os << ',' << v;
        }
        os << '\n';
    }
}

}  // namespace llqr
