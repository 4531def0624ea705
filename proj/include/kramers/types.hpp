#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace kramers {

using Real = double;
using Complex = std::complex<Real>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = Matrix<Real>;
using MatrixXc = Matrix<Complex>;
using VectorXr = Vector<Real>;
using VectorXc = Vector<Complex>;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kSpeedOfLight = 299792458.0;  // m/s

enum class SymmetryClass { GOE, GUE, GSE };

std::string_view to_string(SymmetryClass cls);
SymmetryClass parse_symmetry_class(std::string_view text);

}  // namespace kramers
