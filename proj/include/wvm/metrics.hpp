#pragma once

#include <vector>

namespace wvm {

struct Score {
  std::vector<int> fp, fn;  // 0-based predictors
  double error_ratio = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool empty_selection = false;  // precision = 1 by convention when set
  bool recall_defined = true;    // false when the truth set is empty
};

// Scores a recovered set against the ground-truth direct causes.
Score score(const std::vector<int>& selected, const std::vector<int>& truth, int p);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Sweeps the selection threshold over the sorted unique statistic values
// (plus +infinity) and scores each induced selection; points come out sorted
// by recall.
std::vector<PrPoint> pr_curve(const std::vector<double>& stats, const std::vector<int>& truth);

}  // namespace wvm
