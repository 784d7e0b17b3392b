#include "apnet/input_layout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apnet/errors.hpp"
#include "apnet/numerics.hpp"

namespace apnet {

InputLayout::InputLayout(int n, std::vector<ExogenousInput> inputs)
    : n_(n), inputs_(std::move(inputs)) {
  if (n < 1) {
    throw ValidationError("n", "agent count must be positive, got " + std::to_string(n));
  }
  if (inputs_.empty()) {
    throw ValidationError("inputs", "at least one exogenous input is required");
  }
  attachments_.assign(static_cast<std::size_t>(n) + 1, {});
  for (std::size_t h = 0; h < inputs_.size(); ++h) {
    auto& input = inputs_[h];
    const std::string field = "inputs[" + std::to_string(h) + "]";
    if (!std::isfinite(input.value)) {
      throw ValidationError(field + ".value", "must be finite");
    }
    if (input.targets.empty()) {
      throw ValidationError(field + ".targets", "must not be empty");
    }
    std::sort(input.targets.begin(), input.targets.end());
    for (std::size_t k = 0; k < input.targets.size(); ++k) {
      const int id = input.targets[k];
      if (id < 1 || id > n) {
        throw ValidationError(field + ".targets", "agent id " + std::to_string(id) +
                                                      " outside [1, " + std::to_string(n) + "]");
      }
      if (k > 0 && input.targets[k - 1] == id) {
        throw ValidationError(field + ".targets",
                              "duplicate attachment to agent " + std::to_string(id));
      }
      attachments_[id].push_back(static_cast<int>(h) + 1);
    }
  }
}

const std::vector<int>& InputLayout::attachments_of(int id) const {
  if (id < 1 || id > n_) {
    throw DimensionMismatch("agent id " + std::to_string(id) + " outside [1, " +
                            std::to_string(n_) + "]");
  }
  return attachments_[id];
}

AgentClassification classify_agents(const InputLayout& layout) {
  AgentClassification result;
  for (int id = 1; id <= layout.n(); ++id) {
    if (layout.attachments_of(id).empty()) {
      result.passive.insert(id);
    } else {
      result.active.insert(id);
    }
  }
  return result;
}

InputClassification classify_inputs(const InputLayout& layout) {
  InputClassification result;
  for (int h = 1; h <= layout.m(); ++h) {
    if (layout.inputs()[h - 1].targets.size() == 1) {
      result.isolated.insert(h);
    } else {
      result.non_isolated.insert(h);
    }
  }
  return result;
}

DerivedLayout build_derived(const InputLayout& layout) {
  const int n = layout.n();
  const int m = layout.m();
  if (m > n) {
    throw TooManyInputs("m = " + std::to_string(m) + " inputs exceed n = " + std::to_string(n) +
                        " agents; the square attachment matrix needs m <= n");
  }
  DerivedLayout d;
  d.K2 = Eigen::MatrixXd::Zero(n, n);
  d.c_padded = Eigen::VectorXd::Zero(n);
  for (int h = 0; h < m; ++h) {
    d.c_padded(h) = layout.inputs()[h].value;
    for (int id : layout.inputs()[h].targets) {
      d.K2(id - 1, h) = 1.0;
    }
  }
  d.K1 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d.K1(i, i) = d.K2.row(i).sum();
  }

  // Attachment mass and weighted value total in matrix (agent-major) order,
  // compensated so that this route and the record-major route in
  // average_of_inputs_expanded both produce the correctly rounded sum.
  CompensatedSum weighted;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < m; ++h) {
      if (d.K2(i, h) != 0.0) {
        weighted.add(d.K2(i, h) * d.c_padded(h));
        mass += 1.0;
      }
    }
  }
  d.epsilon = weighted.value() / mass;
  d.Lc = d.K1 * Eigen::MatrixXd::Ones(n, n) / mass - Eigen::MatrixXd::Identity(n, n);
  return d;
}

double average_of_inputs_expanded(const InputLayout& layout) {
  CompensatedSum total;
  double count = 0.0;
  for (const auto& input : layout.inputs()) {
    for (std::size_t k = 0; k < input.targets.size(); ++k) {
      total.add(input.value);
      count += 1.0;
    }
  }
  return total.value() / count;
}

}  // namespace apnet
