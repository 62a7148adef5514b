#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace phasemap {

/// Dense real tensor with row-major flat storage.
///
/// A rank-0 tensor holds exactly one scalar. Values are plain data: copies are
/// deep and a const Tensor can be shared freely between threads.
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  /// Rank-0 tensor holding 0.
  Tensor();
  /// Zero-filled tensor. Every dimension must be positive.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor identity(std::size_t n);
  /// Builds a rows x cols matrix from row-major values.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  template <typename... I>
  double& operator()(I... index) {
    const std::array<std::size_t, sizeof...(I)> idx = {static_cast<std::size_t>(index)...};
    return at(std::span<const std::size_t>(idx.data(), idx.size()));
  }
  template <typename... I>
  double operator()(I... index) const {
    const std::array<std::size_t, sizeof...(I)> idx = {static_cast<std::size_t>(index)...};
    return at(std::span<const std::size_t>(idx.data(), idx.size()));
  }

  /// Same data, new shape; product of dimensions must match.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  /// Result axis k is input axis perm[k].
  Tensor permuted(std::span<const std::size_t> perm) const;

  double norm() const;

  Tensor& operator*=(double alpha);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);

 private:
  std::size_t flat_index(std::span<const std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

Tensor operator*(double alpha, Tensor t);
Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);

/// Largest entrywise absolute difference; shapes must agree.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Sums over paired axes. Result indices are the free indices of `a` followed
/// by the free indices of `b`, each in original order.
Tensor contract(const Tensor& a, std::span<const std::size_t> axes_a,
                const Tensor& b, std::span<const std::size_t> axes_b);

inline Tensor contract(const Tensor& a, std::initializer_list<std::size_t> axes_a,
                       const Tensor& b, std::initializer_list<std::size_t> axes_b) {
  return contract(a, std::span<const std::size_t>(axes_a.begin(), axes_a.size()), b,
                  std::span<const std::size_t>(axes_b.begin(), axes_b.size()));
}

struct TruncationReport {
  std::size_t kept = 0;
  /// Sum of discarded s^2 over sum of all s^2.
  double discarded_weight = 0.0;
};

struct SvdResult {
  Tensor u;               ///< shape: first `split` dims of the input, then kept
  std::vector<double> s;  ///< descending, all > 0
  Tensor vt;              ///< shape: kept, then remaining dims of the input
  TruncationReport report;
};

/// Truncated SVD of `t` viewed as a matrix whose rows are the first `split`
/// indices. Keeps min(chi_max, #{s : s^2 / sum s^2 > cutoff}) values, at least one.
SvdResult svd_truncate(const Tensor& t, std::size_t split, std::size_t chi_max,
                       double cutoff);

struct QrResult {
  Tensor q;  ///< first `split` dims, then k = min(rows, cols); orthonormal columns
  Tensor r;  ///< k, then remaining dims
};

/// Thin QR of `t` viewed as a matrix split after index `split`.
QrResult qr(const Tensor& t, std::size_t split);

}  // namespace phasemap
