#include "phasemap/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "phasemap/error.hpp"

namespace phasemap {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Tensor::Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

void check_dims(const Tensor::Shape& shape) {
  for (auto d : shape)
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
}

}  // namespace

Tensor::Tensor() : data_(1, 0.0) {}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(product(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_dims(shape_);
  if (data_.size() != product(shape_))
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size())
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(shape_.size()));
  return shape_[axis];
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw ShapeError("index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) throw ShapeError("index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double& Tensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }

double Tensor::at(std::span<const std::size_t> index) const {
  return data_[flat_index(index)];
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(*this).reshaped(std::move(shape)); }

Tensor Tensor::reshaped(Shape shape) && {
  if (product(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), std::move(data_));
}

Tensor Tensor::permuted(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw ShapeError("permutation length does not match rank");
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw ShapeError("invalid axis permutation");
    seen[p] = true;
  }
  if (std::is_sorted(perm.begin(), perm.end())) return *this;

  Shape out_shape(r);
  for (std::size_t k = 0; k < r; ++k) out_shape[k] = shape_[perm[k]];

  // Input strides, reordered to follow the output axes.
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t k = r; k-- > 1;) in_stride[k - 1] = in_stride[k] * shape_[k];
  std::vector<std::size_t> stride(r);
  for (std::size_t k = 0; k < r; ++k) stride[k] = in_stride[perm[k]];

  std::vector<double> out(data_.size());
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); ++dst) {
    out[dst] = data_[src];
    for (std::size_t k = r; k-- > 0;) {
      src += stride[k];
      if (++counter[k] < out_shape[k]) break;
      src -= stride[k] * out_shape[k];
      counter[k] = 0;
    }
  }
  return Tensor(std::move(out_shape), std::move(out));
}

double Tensor::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Tensor& Tensor::operator*=(double alpha) {
  for (double& x : data_) x *= alpha;
  return *this;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) throw ShapeError("shape mismatch in addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (other.shape_ != shape_) throw ShapeError("shape mismatch in subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor operator*(double alpha, Tensor t) { return t *= alpha; }
Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("shape mismatch in comparison");
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

Tensor contract(const Tensor& a, std::span<const std::size_t> axes_a, const Tensor& b,
                std::span<const std::size_t> axes_b) {
  if (axes_a.size() != axes_b.size())
    throw ShapeError("contract: axis lists have different lengths");
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    const auto ia = axes_a[k], ib = axes_b[k];
    if (ia >= a.rank() || ib >= b.rank() || used_a[ia] || used_b[ib])
      throw ShapeError("contract: invalid axis pair (" + std::to_string(ia) + "," +
                       std::to_string(ib) + ")");
    if (a.dim(ia) != b.dim(ib))
      throw ShapeError("contract: dimension mismatch on axis pair (" + std::to_string(ia) +
                       "," + std::to_string(ib) + "): " + std::to_string(a.dim(ia)) +
                       " vs " + std::to_string(b.dim(ib)));
    used_a[ia] = used_b[ib] = true;
  }

  std::vector<std::size_t> perm_a, perm_b;
  Tensor::Shape out_shape;
  std::size_t rows = 1, cols = 1, inner = 1;
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!used_a[k]) {
      perm_a.push_back(k);
      out_shape.push_back(a.dim(k));
      rows *= a.dim(k);
    }
  for (auto k : axes_a) {
    perm_a.push_back(k);
    inner *= a.dim(k);
  }
  for (auto k : axes_b) perm_b.push_back(k);
  for (std::size_t k = 0; k < b.rank(); ++k)
    if (!used_b[k]) {
      perm_b.push_back(k);
      out_shape.push_back(b.dim(k));
      cols *= b.dim(k);
    }

  const Tensor pa = a.permuted(perm_a);
  const Tensor pb = b.permuted(perm_b);
  Tensor out(out_shape);
  MatrixMap(out.data().data(), static_cast<Eigen::Index>(rows),
            static_cast<Eigen::Index>(cols))
      .noalias() = ConstMatrixMap(pa.data().data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(inner)) *
                   ConstMatrixMap(pb.data().data(), static_cast<Eigen::Index>(inner),
                                  static_cast<Eigen::Index>(cols));
  return out;
}

namespace {

struct MatrixView {
  std::size_t rows = 1, cols = 1;
  Tensor::Shape row_dims, col_dims;
};

MatrixView split_view(const Tensor& t, std::size_t split) {
  if (split < 1 || split >= t.rank())
    throw ValidationError("split must satisfy 1 <= split < rank, got split=" +
                          std::to_string(split) + " for rank " + std::to_string(t.rank()));
  MatrixView v;
  for (std::size_t k = 0; k < t.rank(); ++k) {
    if (k < split) {
      v.rows *= t.dim(k);
      v.row_dims.push_back(t.dim(k));
    } else {
      v.cols *= t.dim(k);
      v.col_dims.push_back(t.dim(k));
    }
  }
  return v;
}

}  // namespace

SvdResult svd_truncate(const Tensor& t, std::size_t split, std::size_t chi_max,
                       double cutoff) {
  if (chi_max == 0) throw ValidationError("chi_max must be positive");
  if (!(cutoff >= 0.0)) throw ValidationError("cutoff must be >= 0");
  const MatrixView view = split_view(t, split);
  const auto rows = static_cast<Eigen::Index>(view.rows);
  const auto cols = static_cast<Eigen::Index>(view.cols);
  const ConstMatrixMap m(t.data().data(), rows, cols);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  if (!(total > 0.0)) throw NumericalError("zero tensor has no SVD truncation");

  std::size_t above = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] * sv[i] / total > cutoff) ++above;
  const std::size_t kept = std::max<std::size_t>(1, std::min(chi_max, above));

  double discarded = 0.0;
  for (Eigen::Index i = static_cast<Eigen::Index>(kept); i < sv.size(); ++i)
    discarded += sv[i] * sv[i];

  SvdResult out;
  out.s.assign(sv.data(), sv.data() + kept);
  out.report = {kept, std::clamp(discarded / total, 0.0, 1.0)};

  Tensor::Shape ushape = view.row_dims;
  ushape.push_back(kept);
  out.u = Tensor(ushape);
  MatrixMap(out.u.data().data(), rows, static_cast<Eigen::Index>(kept)) =
      svd.matrixU().leftCols(static_cast<Eigen::Index>(kept));

  Tensor::Shape vshape{kept};
  vshape.insert(vshape.end(), view.col_dims.begin(), view.col_dims.end());
  out.vt = Tensor(vshape);
  MatrixMap(out.vt.data().data(), static_cast<Eigen::Index>(kept), cols) =
      svd.matrixV().leftCols(static_cast<Eigen::Index>(kept)).transpose();
  return out;
}

QrResult qr(const Tensor& t, std::size_t split) {
  const MatrixView view = split_view(t, split);
  const auto rows = static_cast<Eigen::Index>(view.rows);
  const auto cols = static_cast<Eigen::Index>(view.cols);
  const auto k = std::min(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> hqr(ConstMatrixMap(t.data().data(), rows, cols));

  QrResult out;
  Tensor::Shape qshape = view.row_dims;
  qshape.push_back(static_cast<std::size_t>(k));
  out.q = Tensor(qshape);
  MatrixMap(out.q.data().data(), rows, k) =
      hqr.householderQ() * Eigen::MatrixXd::Identity(rows, k);

  Tensor::Shape rshape{static_cast<std::size_t>(k)};
  rshape.insert(rshape.end(), view.col_dims.begin(), view.col_dims.end());
  out.r = Tensor(rshape);
  MatrixMap(out.r.data().data(), k, cols) =
      hqr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

}  // namespace phasemap
