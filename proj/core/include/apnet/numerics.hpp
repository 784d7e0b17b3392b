#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace apnet {

// Neumaier-compensated accumulator. Some quantities are parity-checked across
// two independently coded routes with tolerances tighter than naive summation
// error at the working scale (the input average within 1e-14, the Lyapunov
// dissipation identity within 1e-10), so every such route accumulates with
// compensation. Each route then yields the correctly rounded sum of its terms
// and the comparison measures algebra, not float noise.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc.add(a(i) * b(i));
  return acc.value();
}

}  // namespace apnet
