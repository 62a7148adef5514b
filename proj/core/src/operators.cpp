#include "phasemap/operators.hpp"

#include <string>

#include "phasemap/error.hpp"

namespace phasemap {

SiteOperator::SiteOperator(std::string l, Tensor m) : label(std::move(l)), matrix(std::move(m)) {
  if (matrix.shape() != Tensor::Shape{2, 2})
    throw ShapeError("site operator '" + label + "' must be 2x2");
}

bool operator==(const SiteOperator& a, const SiteOperator& b) {
  return a.label == b.label && a.matrix.shape() == b.matrix.shape() &&
         max_abs_diff(a.matrix, b.matrix) == 0.0;
}

namespace ops {

SiteOperator identity() { return {"I", Tensor::matrix(2, 2, {1, 0, 0, 1})}; }
SiteOperator sigma_x() { return {"Sx", Tensor::matrix(2, 2, {0, 1, 1, 0})}; }
SiteOperator sigma_z() { return {"Sz", Tensor::matrix(2, 2, {1, 0, 0, -1})}; }

SiteOperator from_label(std::string_view label) {
  if (label == "I") return identity();
  if (label == "Sx") return sigma_x();
  if (label == "Sz") return sigma_z();
  throw ValidationError("unknown operator label '" + std::string(label) +
                        "' (expected I, Sx or Sz)");
}

}  // namespace ops

}  // namespace phasemap
