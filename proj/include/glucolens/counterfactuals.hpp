#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glucolens/features.hpp"

namespace glucolens {

// P(class 1) for each row of raw (unscaled) feature vectors.
using ProbaFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct CfConstraints {
  std::vector<std::string> names;
  Eigen::VectorXd min, max;  // feasible range per feature
  Eigen::VectorXd mad;       // median absolute deviation, floored at 1e-6
  std::vector<bool> immutable;
  std::vector<bool> integer;

  static const std::set<std::string>& default_immutable();  // bmi, day_of_week
  static const std::set<std::string>& default_integer();    // day_of_week, work_from_home

  // Ranges and MADs from the training rows (raw units). Unknown names in the
  // sets raise InvalidConfig.
  static CfConstraints from_training(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
                                     const std::set<std::string>& immutable = default_immutable(),
                                     const std::set<std::string>& integer = default_integer());
};

struct CfConfig {
  int k = 3;
  long budget = 20000;  // model evaluations
  double proximity_weight = 0.5;
  double diversity_weight = 1.0;
  int population = 50;
  std::uint64_t seed = 0;
};

enum class CfStatus { Complete, Partial };

struct CounterfactualSet {
  std::vector<std::string> names;
  Eigen::VectorXd original;
  int original_label = 0;
  int target_label = 1;
  std::vector<Eigen::VectorXd> counterfactuals;
  std::vector<int> labels;
  CfStatus status = CfStatus::Complete;
  double loss = 0.0;
  long evaluations = 0;
  // Best set loss after each evaluation that improved it: (evaluation, loss).
  std::vector<std::pair<long, double>> loss_trace;
};

// MAD-scaled L1 distance over mutable features.
double cf_distance(const CfConstraints& c, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Loss of a candidate set: 1e6 per missing slot + w_p * mean proximity to the
// original - w_d * mean pairwise distance.
double cf_set_loss(const CfConstraints& c, const CfConfig& cfg, const Eigen::VectorXd& original,
                   const std::vector<Eigen::VectorXd>& set);

// Population search (random sparse restarts, mutation, crossover and
// reversion toward the original). Raises NoCounterfactualFound when no valid
// candidate turns up within the budget.
CounterfactualSet generate_counterfactuals(const ProbaFn& model, const Eigen::VectorXd& instance, int target_label,
                                           const CfConstraints& constraints, const CfConfig& cfg);

struct CfChange {
  std::string feature;
  double from = 0.0;
  double to = 0.0;
};

// Changed features per counterfactual, in feature order.
std::vector<std::vector<CfChange>> diff_report(const CounterfactualSet& set);
std::string render_diff_report(const CounterfactualSet& set);
nlohmann::json counterfactuals_to_json(const CounterfactualSet& set);

}  // namespace glucolens
