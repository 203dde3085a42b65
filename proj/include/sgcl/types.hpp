#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace sgcl {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using ItemIndex = std::int32_t;

// Internal index 0 is reserved for the [mask] token so it owns an
// embedding row and can never collide with a real item.
inline constexpr ItemIndex kMaskIndex = 0;

// A (possibly labeled) ordered list of internal item indices.
// `label < 0` means "no label yet" (pre-expansion).
struct Session {
  std::vector<ItemIndex> items;
  ItemIndex label = -1;

  bool has_label() const { return label >= 0; }
  int size() const { return static_cast<int>(items.size()); }
};

}  // namespace sgcl
