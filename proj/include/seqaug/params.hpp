#pragma once

#include "seqaug/autodiff.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace seqaug {

// A parameter block exposed by name, for checkpoints and the optimizer.
struct NamedMatrix {
  std::string name;
  Eigen::MatrixXd* value;
};

// Gradient descent with momentum: v <- mu v + g; p <- p - lr v.
class MomentumSgd {
 public:
  MomentumSgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<NamedMatrix>& params, const std::vector<ad::Var>& bound);
  double lr() const { return lr_; }

 private:
  double lr_;
  double momentum_;
  std::map<std::string, Eigen::MatrixXd> velocity_;
};

}  // namespace seqaug
