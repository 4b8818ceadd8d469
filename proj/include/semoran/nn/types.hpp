#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace semoran {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// Thrown when operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces or receives a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// N-dimensional row-major array. The flat storage is an Eigen vector so it
/// can be mapped into matrices without copying.
template <typename Scalar>
struct NdArray {
  std::vector<std::size_t> shape;
  Vector<Scalar> data;

  NdArray() = default;
  NdArray(std::vector<std::size_t> dims, Vector<Scalar> values)
      : shape(std::move(dims)), data(std::move(values)) {
    check();
  }

  static NdArray zeros(std::vector<std::size_t> dims) {
    NdArray a;
    a.shape = std::move(dims);
    a.data = Vector<Scalar>::Zero(static_cast<Index>(element_count(a.shape)));
    return a;
  }

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) {
      if (d == 0) throw ShapeError("array dimensions must be positive");
      n *= d;
    }
    return n;
  }

  std::size_t size() const { return static_cast<std::size_t>(data.size()); }
  std::size_t rank() const { return shape.size(); }

  void check() const {
    if (element_count(shape) != size())
      throw ShapeError("array of shape " + shape_string(shape) + " holds " +
                       std::to_string(size()) + " values");
  }

  bool all_finite() const { return data.allFinite(); }

  friend bool operator==(const NdArray& a, const NdArray& b) {
    return a.shape == b.shape && a.data.size() == b.data.size() && a.data == b.data;
  }
};

}  // namespace semoran
