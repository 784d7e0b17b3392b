#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

namespace apnet {

struct ExogenousInput {
  double value = 0.0;        // constant over a run
  std::vector<int> targets;  // 1-based agent ids, non-empty, duplicate-free
};

// The m >= 1 constant inputs and their attachments to agents. A zero value is
// legal: activity is structural, not value-dependent. Target lists are
// canonicalized to sorted order at construction.
class InputLayout {
 public:
  InputLayout(int n, std::vector<ExogenousInput> inputs);

  int n() const noexcept { return n_; }
  int m() const noexcept { return static_cast<int>(inputs_.size()); }
  const std::vector<ExogenousInput>& inputs() const noexcept { return inputs_; }

  // 1-based indices of the inputs attached to the given agent.
  const std::vector<int>& attachments_of(int id) const;

 private:
  int n_;
  std::vector<ExogenousInput> inputs_;
  std::vector<std::vector<int>> attachments_;
};

struct AgentClassification {
  std::set<int> active;   // agents appearing in at least one target set
  std::set<int> passive;  // the complement
};
AgentClassification classify_agents(const InputLayout& layout);

struct InputClassification {
  std::set<int> isolated;      // 1-based input indices with exactly one target
  std::set<int> non_isolated;  // two or more targets
};
InputClassification classify_inputs(const InputLayout& layout);

struct DerivedLayout {
  Eigen::MatrixXd K1;        // diagonal matrix of per-agent attachment counts
  Eigen::MatrixXd K2;        // n x n binary attachment matrix, columns past m zero
  Eigen::VectorXd c_padded;  // input values padded with zeros to length n
  double epsilon = 0.0;      // attachment-weighted input average
  Eigen::MatrixXd Lc;        // K1 * ones * ones^T / mass - I
};

// Throws TooManyInputs when m > n; the square K2 and padded c shapes need
// m <= n.
DerivedLayout build_derived(const InputLayout& layout);

// The same average computed by direct double summation over the attachment
// relation, with no matrix algebra. Independent route used to cross-check
// DerivedLayout::epsilon; the two agree within 1e-14.
double average_of_inputs_expanded(const InputLayout& layout);

}  // namespace apnet
