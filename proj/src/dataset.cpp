#include "wvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace wvm {

Eigen::Index EnvironmentDataset::total_samples() const {
  Eigen::Index n = 0;
  for (const auto& env : environments) n += env.rows();
  return n;
}

std::vector<Eigen::Index> EnvironmentDataset::env_sizes() const {
  std::vector<Eigen::Index> sizes;
  sizes.reserve(environments.size());
  for (const auto& env : environments) sizes.push_back(env.rows());
  return sizes;
}

void EnvironmentDataset::validate() const {
  if (env_count() < 2) {
    throw DegenerateDataError("dataset needs at least 2 environments, got " +
                              std::to_string(env_count()));
  }
  for (const auto& env : environments) {
    if (env.rows() < 2) {
      throw DegenerateDataError("environment " + std::to_string(env.source_label) +
                                " has fewer than 2 rows");
    }
    if (env.x.rows() != env.y.size() || env.x.cols() != p) {
      throw std::invalid_argument("environment block shape mismatch");
    }
    if (!env.x.allFinite() || !env.y.allFinite()) {
      throw std::invalid_argument("dataset contains non-finite values");
    }
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string_view trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string_view(s).substr(b, e - b + 1);
}

double parse_double(const std::string& cell, int line_no) {
  std::string_view v = trimmed(cell);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
  }
  return out;
}

long long parse_label(const std::string& cell, int line_no) {
  std::string_view v = trimmed(cell);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": env label '" + cell +
                     "' is not an integer");
  }
  return out;
}

void format_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

EnvironmentDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
  auto header = split_line(line);
  if (header.size() < 3 || trimmed(header[0]) != "env" || trimmed(header[1]) != "y") {
    throw ParseError("header must be 'env,y,x1,...,xp'");
  }
  const int p = static_cast<int>(header.size()) - 2;

  struct Rows {
    std::vector<double> y;
    std::vector<double> x;  // row-major
  };
  std::vector<long long> labels;             // first-appearance order
  std::map<long long, std::size_t> label_ix;
  std::vector<Rows> blocks;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    auto cells = split_line(line);
    if (static_cast<int>(cells.size()) != p + 2) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(p + 2) + " cells, got " + std::to_string(cells.size()));
    }
    long long label = parse_label(cells[0], line_no);
    auto it = label_ix.find(label);
    if (it == label_ix.end()) {
      it = label_ix.emplace(label, blocks.size()).first;
      labels.push_back(label);
      blocks.emplace_back();
    }
    Rows& rows = blocks[it->second];
    rows.y.push_back(parse_double(cells[1], line_no));
    for (int j = 0; j < p; ++j) rows.x.push_back(parse_double(cells[2 + j], line_no));
  }

  EnvironmentDataset ds;
  ds.p = p;
  for (int j = 0; j < p; ++j) ds.predictor_names.push_back(std::string(trimmed(header[2 + j])));
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    const Rows& rows = blocks[e];
    EnvBlock block;
    block.env_id = static_cast<int>(e);
    block.source_label = labels[e];
    const Eigen::Index ne = static_cast<Eigen::Index>(rows.y.size());
    block.y = Eigen::Map<const Eigen::VectorXd>(rows.y.data(), ne);
    block.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>(rows.x.data(), ne, p);
    ds.environments.push_back(std::move(block));
  }
  ds.validate();
  return ds;
}

void write_csv(const EnvironmentDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  std::string line = "env,y";
  for (int j = 0; j < ds.p; ++j) {
    line += ',';
    line += (j < static_cast<int>(ds.predictor_names.size())) ? ds.predictor_names[j]
                                                              : "x" + std::to_string(j + 1);
  }
  line += '\n';
  out << line;
  for (const auto& env : ds.environments) {
    for (Eigen::Index i = 0; i < env.rows(); ++i) {
      line.clear();
      line += std::to_string(env.source_label);
      line += ',';
      format_double(line, env.y[i]);
      for (int j = 0; j < ds.p; ++j) {
        line += ',';
        format_double(line, env.x(i, j));
      }
      line += '\n';
      out << line;
    }
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

Weights proportional_weights(const EnvironmentDataset& ds) {
  const double n = static_cast<double>(ds.total_samples());
  Weights weights;
  weights.w.resize(ds.env_count());
  for (int e = 0; e < ds.env_count(); ++e) {
    weights.w[e] = static_cast<double>(ds.environments[e].rows()) / n;
  }
  weights.w /= weights.w.sum();
  return weights;
}

Weights uniform_weights(const EnvironmentDataset& ds) {
  Weights weights;
  weights.w = Eigen::VectorXd::Constant(ds.env_count(), 1.0 / ds.env_count());
  return weights;
}

std::pair<EnvironmentDataset, StandardizeTransform> standardize(const EnvironmentDataset& ds) {
  const Eigen::Index n = ds.total_samples();
  StandardizeTransform tf;
  tf.mean = Eigen::VectorXd::Zero(ds.p);
  tf.scale = Eigen::VectorXd::Ones(ds.p);
  tf.constant.assign(ds.p, false);

  for (const auto& env : ds.environments) tf.mean += env.x.colwise().sum().transpose();
  tf.mean /= static_cast<double>(n);

  Eigen::VectorXd ss = Eigen::VectorXd::Zero(ds.p);
  for (const auto& env : ds.environments) {
    ss += (env.x.rowwise() - tf.mean.transpose()).array().square().colwise().sum().matrix();
  }
  for (int j = 0; j < ds.p; ++j) {
    double var = ss[j] / static_cast<double>(n - 1);
    if (var > 0.0) {
      tf.scale[j] = std::sqrt(var);
    } else {
      tf.constant[j] = true;  // centered only
    }
  }

  EnvironmentDataset out = ds;
  for (auto& env : out.environments) {
    env.x = (env.x.rowwise() - tf.mean.transpose()).array().rowwise() /
            tf.scale.transpose().array();
  }
  return {std::move(out), std::move(tf)};
}

EnvironmentDataset select_predictors(const EnvironmentDataset& ds, const std::vector<int>& cols) {
  for (int c : cols) {
    if (c < 0 || c >= ds.p) throw std::invalid_argument("predictor index out of range");
  }
  EnvironmentDataset out;
  out.p = static_cast<int>(cols.size());
  for (int c : cols) {
    out.predictor_names.push_back(c < static_cast<int>(ds.predictor_names.size())
                                      ? ds.predictor_names[c]
                                      : "x" + std::to_string(c + 1));
  }
  for (const auto& env : ds.environments) {
    EnvBlock block;
    block.env_id = env.env_id;
    block.source_label = env.source_label;
    block.y = env.y;
    block.x.resize(env.rows(), out.p);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      block.x.col(static_cast<Eigen::Index>(j)) = env.x.col(cols[j]);
    }
    out.environments.push_back(std::move(block));
  }
  return out;
}

}  // namespace wvm
