#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace gaeco {

using Real = double;
using Index = std::int64_t;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<Real>;
using Vector = VectorX<Real>;
using RowVector = RowVectorX<Real>;
using IndexVector = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

using SparseMatrix = Eigen::SparseMatrix<Real, Eigen::RowMajor, Index>;

using MatrixRef = Eigen::Ref<Matrix>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the file loaders on malformed input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}

} // namespace gaeco
