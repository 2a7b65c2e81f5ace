#include "wvm/metrics.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace wvm {

Score score(const std::vector<int>& selected, const std::vector<int>& truth, int p) {
  const std::set<int> sel(selected.begin(), selected.end());
  const std::set<int> tru(truth.begin(), truth.end());
  for (int j : sel) {
    if (j < 0 || j >= p) throw std::invalid_argument("selected index out of range");
  }
  for (int j : tru) {
    if (j < 0 || j >= p) throw std::invalid_argument("truth index out of range");
  }

  Score s;
  int tp = 0;
  for (int j : sel) {
    if (tru.count(j)) {
      ++tp;
    } else {
      s.fp.push_back(j);
    }
  }
  for (int j : tru) {
    if (!sel.count(j)) s.fn.push_back(j);
  }

  s.error_ratio = static_cast<double>(s.fp.size() + s.fn.size()) / static_cast<double>(p);
  const int negatives = p - static_cast<int>(tru.size());
  s.fpr = negatives > 0 ? static_cast<double>(s.fp.size()) / static_cast<double>(negatives) : 0.0;
  if (sel.empty()) {
    s.empty_selection = true;
    s.precision = 1.0;
  } else {
    s.precision = static_cast<double>(tp) / static_cast<double>(sel.size());
  }
  if (tru.empty()) {
    s.recall_defined = false;
    s.recall = 0.0;
  } else {
    s.recall = static_cast<double>(tp) / static_cast<double>(tru.size());
  }
  return s;
}

std::vector<PrPoint> pr_curve(const std::vector<double>& stats, const std::vector<int>& truth) {
  if (truth.empty()) throw std::invalid_argument("pr_curve needs a nonempty truth set");
  const int p = static_cast<int>(stats.size());

  std::vector<double> thresholds(stats.begin(), stats.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<PrPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    std::vector<int> selected;
    for (int k = 0; k < p; ++k) {
      if (stats[static_cast<std::size_t>(k)] > t) selected.push_back(k);
    }
    const Score s = score(selected, truth, p);
    points.push_back({t, s.precision, s.recall});
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  return points;
}

}  // namespace wvm
