#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <string>

namespace prodbar {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Extended precision is used wherever monomial Gram matrices are factored.
using lreal = long double;
using lcplx = std::complex<long double>;
using LRealMatrix = Eigen::Matrix<lreal, Eigen::Dynamic, Eigen::Dynamic>;
using LMatrix = Eigen::Matrix<lcplx, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr long double kPi = 3.141592653589793238462643383279502884L;

/// Form bidegree (p, q): p holomorphic and q antiholomorphic differentials.
struct Bidegree {
    int p = 0;
    int q = 0;

    constexpr auto operator<=>(const Bidegree&) const = default;
    constexpr Bidegree operator+(const Bidegree& o) const { return {p + o.p, q + o.q}; }
    constexpr int degree() const { return p + q; }
    /// (-1)^{p+q}
    constexpr int sign() const { return (p + q) % 2 == 0 ? 1 : -1; }

    std::string str() const { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }
};

/// The four bidegrees of forms on a one-dimensional factor, in storage order.
inline constexpr std::array<Bidegree, 4> kFactorBidegrees{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

constexpr bool is_factor_bidegree(Bidegree b) { return b.p >= 0 && b.p <= 1 && b.q >= 0 && b.q <= 1; }
constexpr std::size_t factor_slot(Bidegree b) { return static_cast<std::size_t>(2 * b.p + b.q); }

inline Matrix to_double(const LMatrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = cplx(static_cast<double>(m(i, j).real()), static_cast<double>(m(i, j).imag()));
    return out;
}

}  // namespace prodbar
