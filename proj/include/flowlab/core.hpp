#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// runtime failure carrying a short reason ("degenerate metric", config errors, ...)
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

constexpr double kEps = 2.220446049250313e-16;
constexpr double kPi = 3.141592653589793238462643383279502884;

// coupling constant of the extended flow, (n-1)/(n-2)
inline double alpha_n(int n) {
  require(n >= 3, "alpha_n requires dimension >= 3");
  return double(n - 1) / double(n - 2);
}

inline double sq(double x) { return x * x; }

// dense rank-3 container T(a,b,c), small dims
class Tensor3 {
public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), d_(std::size_t(n) * n * n, 0.0) {}
  double& operator()(int a, int b, int c) { return d_[std::size_t((a * n_ + b) * n_ + c)]; }
  double operator()(int a, int b, int c) const { return d_[std::size_t((a * n_ + b) * n_ + c)]; }
  int dim() const { return n_; }
  double max_abs() const {
    double m = 0;
    for (double v : d_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  int n_ = 0;
  std::vector<double> d_;
};

// dense rank-4 container T(a,b,c,d)
class Tensor4 {
public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), d_(std::size_t(n) * n * n * n, 0.0) {}
  double& operator()(int a, int b, int c, int e) {
    return d_[std::size_t(((a * n_ + b) * n_ + c) * n_ + e)];
  }
  double operator()(int a, int b, int c, int e) const {
    return d_[std::size_t(((a * n_ + b) * n_ + c) * n_ + e)];
  }
  int dim() const { return n_; }
  double max_abs() const {
    double m = 0;
    for (double v : d_) m = std::max(m, std::abs(v));
    return m;
  }

private:
  int n_ = 0;
  std::vector<double> d_;
};

}  // namespace flowlab
