#include "wvm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wvm {

QuantileView make_view(Eigen::VectorXd values) {
  std::sort(values.data(), values.data() + values.size());
  return QuantileView{std::move(values)};
}

double quantile_at(const QuantileView& view, double t) {
  if (!(t > 0.0) || t > 1.0) throw std::domain_error("quantile level must be in (0, 1]");
  if (view.size() == 0) throw std::domain_error("empty quantile view");
  const auto n = view.size();
  Eigen::Index idx = static_cast<Eigen::Index>(std::ceil(t * static_cast<double>(n)));
  idx = std::clamp<Eigen::Index>(idx, 1, n);
  return view.sorted_values[idx - 1];
}

QuantileGrid make_quantile_grid(const std::vector<Eigen::Index>& env_sizes) {
  const int n_env = static_cast<int>(env_sizes.size());
  if (n_env == 0) throw std::invalid_argument("no environments");
  // Levels are the rationals i/n_e; compare and deduplicate by
  // cross-multiplication so common divisors collapse exactly.
  struct Frac {
    long long num, den;
  };
  std::vector<Frac> fracs;
  Eigen::Index total = 0;
  for (Eigen::Index ne : env_sizes) {
    if (ne < 1) throw std::invalid_argument("environment size must be >= 1");
    total += ne;
  }
  fracs.reserve(static_cast<std::size_t>(total));
  for (Eigen::Index ne : env_sizes) {
    for (Eigen::Index i = 1; i <= ne; ++i) {
      fracs.push_back({static_cast<long long>(i), static_cast<long long>(ne)});
    }
  }
  auto less = [](const Frac& a, const Frac& b) { return a.num * b.den < b.num * a.den; };
  auto equal = [](const Frac& a, const Frac& b) { return a.num * b.den == b.num * a.den; };
  std::sort(fracs.begin(), fracs.end(), less);
  fracs.erase(std::unique(fracs.begin(), fracs.end(), equal), fracs.end());

  const Eigen::Index levels = static_cast<Eigen::Index>(fracs.size());
  QuantileGrid grid;
  grid.levels.resize(levels);
  grid.gaps.resize(levels);
  grid.index.resize(n_env, levels);
  for (Eigen::Index l = 0; l < levels; ++l) {
    grid.levels[l] = static_cast<double>(fracs[l].num) / static_cast<double>(fracs[l].den);
    grid.gaps[l] = l == 0 ? grid.levels[0] : grid.levels[l] - grid.levels[l - 1];
    for (int e = 0; e < n_env; ++e) {
      const long long ne = static_cast<long long>(env_sizes[e]);
      const long long idx = (fracs[l].num * ne + fracs[l].den - 1) / fracs[l].den;  // ceil
      grid.index(e, l) = static_cast<Eigen::Index>(idx) - 1;
    }
  }
  return grid;
}

double w2_squared(const QuantileView& a, const QuantileView& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("empty quantile view");
  if (a.size() == b.size()) {
    // Sorted matching; accumulated sequentially so the equal-size identity
    // holds bit-for-bit.
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double d = a.sorted_values[i] - b.sorted_values[i];
      sum += d * d;
    }
    return sum / static_cast<double>(a.size());
  }
  const QuantileGrid grid = make_quantile_grid({a.size(), b.size()});
  double total = 0.0;
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const double d = a.sorted_values[grid.index(0, l)] - b.sorted_values[grid.index(1, l)];
    total += grid.gaps[l] * d * d;
  }
  return total;
}

Eigen::VectorXd barycenter_quantile(const std::vector<QuantileView>& views, const Weights& w,
                                    const QuantileGrid& grid) {
  const int n_env = static_cast<int>(views.size());
  if (n_env != w.w.size() || n_env != grid.index.rows()) {
    throw std::invalid_argument("views, weights and grid disagree on the environment count");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    double m = 0.0;
    for (int e = 0; e < n_env; ++e) m += w.w[e] * views[e].sorted_values[grid.index(e, l)];
    out[l] = m;
  }
  return out;
}

double wasserstein_variance(const std::vector<QuantileView>& views, const Weights& w,
                            const QuantileGrid& grid) {
  const int n_env = static_cast<int>(views.size());
  if (n_env != w.w.size() || n_env != grid.index.rows()) {
    throw std::invalid_argument("views, weights and grid disagree on the environment count");
  }
  double total = 0.0;
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    double m = 0.0;
    for (int e = 0; e < n_env; ++e) m += w.w[e] * views[e].sorted_values[grid.index(e, l)];
    double acc = 0.0;
    for (int e = 0; e < n_env; ++e) {
      const double d = views[e].sorted_values[grid.index(e, l)] - m;
      acc += w.w[e] * d * d;
    }
    total += grid.gaps[l] * acc;
  }
  return total;
}

double wasserstein_variance(const std::vector<QuantileView>& views, const Weights& w) {
  std::vector<Eigen::Index> sizes;
  sizes.reserve(views.size());
  for (const auto& v : views) {
    if (v.size() == 0) throw std::invalid_argument("empty quantile view");
    sizes.push_back(v.size());
  }
  return wasserstein_variance(views, w, make_quantile_grid(sizes));
}

}  // namespace wvm
