#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "phasemap/tensor.hpp"

namespace phasemap {

/// A labelled 2x2 single-site operator.
struct SiteOperator {
  std::string label;
  Tensor matrix;  ///< shape {2, 2}; entry (t, s) = <t|op|s>

  SiteOperator(std::string label, Tensor matrix);

  friend bool operator==(const SiteOperator& a, const SiteOperator& b);
};

/// A product of single-site operators, one per site of the chain.
struct ProductOperator {
  std::string name;
  std::vector<SiteOperator> ops;
};

namespace ops {

SiteOperator identity();
SiteOperator sigma_x();
SiteOperator sigma_z();

/// "I", "Sx" or "Sz". Throws ValidationError for anything else.
SiteOperator from_label(std::string_view label);

}  // namespace ops

}  // namespace phasemap
