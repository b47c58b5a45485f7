#pragma once

#include <utility>
#include <vector>

#include "dwmap/model.hpp"

namespace dwmap {

// One priced subprogram solution. Since subprogram extreme points are
// one-hots, a column is identified by (edge, solution_index).
struct Column {
  EdgeId edge = -1;
  int solution_index = -1;  // flat index k of the one-hot edge variable
  double cost = 0.0;        // g = c_st[k]
  std::vector<std::pair<int, double>> constraint_column;  // B_st * y_hat, by global row
  int iteration = 0;        // when priced
};

}  // namespace dwmap
