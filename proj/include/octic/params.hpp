#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace octic {

/// Non-owning view of one learnable tensor, keyed by its layer path.
struct TensorRef {
  std::string path;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Eigen::MatrixXd> map() const { return {data, rows, cols}; }
};

using TensorList = std::vector<TensorRef>;

template <class Derived>
void register_tensor(TensorList& out, std::string path, Eigen::PlainObjectBase<Derived>& t) {
  out.push_back({std::move(path), t.data(), t.rows(), t.cols()});
}

inline std::string join_path(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

}  // namespace octic
