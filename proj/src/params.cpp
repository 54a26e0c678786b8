#include "seqaug/params.hpp"

#include "seqaug/errors.hpp"

namespace seqaug {

void MomentumSgd::step(const std::vector<NamedMatrix>& params, const std::vector<ad::Var>& bound) {
  if (params.size() != bound.size()) throw DimensionError("optimizer: parameter and gradient lists differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::MatrixXd g = bound[i].grad();
    auto [it, fresh] = velocity_.try_emplace(params[i].name, Eigen::MatrixXd::Zero(g.rows(), g.cols()));
    Eigen::MatrixXd& v = it->second;
    v = momentum_ * v + g;
    *params[i].value -= lr_ * v;
  }
}

}  // namespace seqaug
