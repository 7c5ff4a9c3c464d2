#include "glucolens/counterfactuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

namespace {

constexpr double kMissingSlotPenalty = 1e6;
constexpr std::size_t kArchiveCap = 512;

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

int label_of(double p1) { return p1 > 0.5 ? 1 : 0; }

}  // namespace

const std::set<std::string>& CfConstraints::default_immutable() {
  static const std::set<std::string> s = {"bmi", "day_of_week"};
  return s;
}

const std::set<std::string>& CfConstraints::default_integer() {
  static const std::set<std::string> s = {"day_of_week", "work_from_home"};
  return s;
}

CfConstraints CfConstraints::from_training(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
                                           const std::set<std::string>& immutable,
                                           const std::set<std::string>& integer) {
  if (static_cast<Eigen::Index>(names.size()) != X.cols())
    fail(ErrorCode::DimensionMismatch, "one name per feature column is required");
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "constraints need training rows");
  // The default sets name features that a reduced feature set may lack.
  auto check = [&](const std::set<std::string>& set, const std::set<std::string>& defaults) {
    for (const auto& n : set)
      if (std::find(names.begin(), names.end(), n) == names.end() && !defaults.count(n))
        fail(ErrorCode::InvalidConfig, fmt::format("constraint names unknown feature '{}'", n));
  };
  check(immutable, default_immutable());
  check(integer, default_integer());

  CfConstraints c;
  c.names = names;
  c.min = X.colwise().minCoeff().transpose();
  c.max = X.colwise().maxCoeff().transpose();
  c.mad.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::vector<double> col(X.col(j).data(), X.col(j).data() + X.rows());
    const double med = median(col);
    for (auto& v : col) v = std::abs(v - med);
    c.mad(j) = std::max(median(col), 1e-6);
  }
  for (const auto& n : names) {
    c.immutable.push_back(immutable.count(n) > 0);
    c.integer.push_back(integer.count(n) > 0);
  }
  if (!c.min.allFinite() || !c.max.allFinite()) fail(ErrorCode::InvalidConfig, "feature ranges must be finite");
  return c;
}

double cf_distance(const CfConstraints& c, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double d = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (!c.immutable[static_cast<std::size_t>(j)]) d += std::abs(a(j) - b(j)) / c.mad(j);
  return d;
}

double cf_set_loss(const CfConstraints& c, const CfConfig& cfg, const Eigen::VectorXd& original,
                   const std::vector<Eigen::VectorXd>& set) {
  const auto n = set.size();
  double loss = kMissingSlotPenalty * static_cast<double>(std::max<long>(0, cfg.k - static_cast<long>(n)));
  if (n == 0) return loss;
  double prox = 0.0;
  for (const auto& x : set) prox += cf_distance(c, x, original);
  loss += cfg.proximity_weight * prox / static_cast<double>(n);
  if (n >= 2) {
    double div = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) div += cf_distance(c, set[i], set[j]);
    loss -= cfg.diversity_weight * div / static_cast<double>(n * (n - 1) / 2);
  }
  return loss;
}

namespace {

struct Entry {
  Eigen::VectorXd x;
  double proximity;
};

class Search {
 public:
  Search(const ProbaFn& model, const Eigen::VectorXd& original, int target, const CfConstraints& c,
         const CfConfig& cfg)
      : model_(model), x0_(original), target_(target), c_(c), cfg_(cfg), rng_(make_rng(cfg.seed, {0xcf})) {
    for (Eigen::Index j = 0; j < x0_.size(); ++j)
      if (!c_.immutable[static_cast<std::size_t>(j)] && c_.max(j) > c_.min(j)) mutable_.push_back(j);
    best_loss_ = cf_set_loss(c_, cfg_, x0_, {});
  }

  void run() {
    if (mutable_.empty()) return;
    while (evaluations_ < cfg_.budget) {
      std::vector<Eigen::VectorXd> children = breed();
      const long room = cfg_.budget - evaluations_;
      if (static_cast<long>(children.size()) > room) children.resize(static_cast<std::size_t>(room));
      const bool complete = static_cast<long>(children.size()) == cfg_.population;
      evaluate(children);
      if (complete) full_selection();
    }
  }

  CounterfactualSet result() && {
    CounterfactualSet out;
    out.names = c_.names;
    out.original = x0_;
    out.target_label = target_;
    out.evaluations = evaluations_;
    out.loss = best_loss_;
    out.loss_trace = std::move(trace_);
    std::sort(best_.begin(), best_.end(), [&](const auto& a, const auto& b) {
      const double da = cf_distance(c_, a, x0_), db = cf_distance(c_, b, x0_);
      if (da != db) return da < db;
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    out.counterfactuals = std::move(best_);
    out.labels.assign(out.counterfactuals.size(), target_);
    out.status = static_cast<int>(out.counterfactuals.size()) == cfg_.k ? CfStatus::Complete : CfStatus::Partial;
    return out;
  }

  bool found() const { return !best_.empty(); }

 private:
  double spread(Eigen::Index j) const { return std::max(c_.mad(j), 0.05 * (c_.max(j) - c_.min(j))); }

  Eigen::VectorXd finalize(Eigen::VectorXd x) const {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (c_.immutable[jj]) {
        x(j) = x0_(j);
        continue;
      }
      if (c_.integer[jj]) x(j) = std::round(x(j));
      x(j) = std::clamp(x(j), c_.min(j), c_.max(j));
      if (c_.integer[jj] && x(j) != std::round(x(j))) x(j) = std::ceil(x(j));
    }
    return x;
  }

  Eigen::Index pick_mutable() { return mutable_[uniform_index(rng_, mutable_.size())]; }

  Eigen::VectorXd restart() {
    Eigen::VectorXd x = x0_;
    const auto m = 1 + uniform_index(rng_, std::min<std::size_t>(3, mutable_.size()));
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::Index j = pick_mutable();
      x(j) = c_.min(j) + uniform01(rng_) * (c_.max(j) - c_.min(j));
    }
    return finalize(std::move(x));
  }

  Eigen::VectorXd mutate(const Eigen::VectorXd& parent) {
    static constexpr double kScales[] = {0.25, 1.0, 2.0};
    Eigen::VectorXd x = parent;
    const auto m = 1 + uniform_index(rng_, 2);
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::Index j = pick_mutable();
      x(j) += kScales[uniform_index(rng_, 3)] * spread(j) * standard_normal(rng_);
    }
    return finalize(std::move(x));
  }

  Eigen::VectorXd crossover(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = a;
    for (auto j : mutable_)
      if (uniform01(rng_) < 0.5) x(j) = b(j);
    return finalize(std::move(x));
  }

  Eigen::VectorXd revert(const Eigen::VectorXd& parent) {
    std::vector<Eigen::Index> changed;
    for (auto j : mutable_)
      if (parent(j) != x0_(j)) changed.push_back(j);
    Eigen::VectorXd x = parent;
    if (!changed.empty()) {
      const Eigen::Index j = changed[uniform_index(rng_, changed.size())];
      x(j) = uniform01(rng_) < 0.5 ? x0_(j) : 0.5 * (x(j) + x0_(j));
    }
    return finalize(std::move(x));
  }

  // Parents: the closest valid candidates when any exist, otherwise the
  // candidates of the last generation that came nearest to flipping.
  const Eigen::VectorXd& parent() {
    const std::size_t n = std::min<std::size_t>(pool_.size(), 20);
    const std::size_t a = uniform_index(rng_, n), b = uniform_index(rng_, n);
    return pool_[std::min(a, b)];
  }

  std::vector<Eigen::VectorXd> breed() {
    std::vector<Eigen::VectorXd> out;
    const auto pop = static_cast<std::size_t>(cfg_.population);
    while (out.size() < pop) {
      const double r = uniform01(rng_);
      if (pool_.empty() || (archive_.empty() && r < 0.5) || (!archive_.empty() && r < 0.2)) {
        out.push_back(restart());
      } else if (archive_.empty() || r < 0.6) {
        out.push_back(mutate(parent()));
      } else if (r < 0.8) {
        const Eigen::VectorXd& a = parent();
        out.push_back(crossover(a, parent()));
      } else {
        out.push_back(revert(parent()));
      }
    }
    return out;
  }

  void evaluate(const std::vector<Eigen::VectorXd>& xs) {
    if (xs.empty()) return;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), x0_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
    const Eigen::VectorXd p = model_(X);
    if (p.size() != X.rows()) fail(ErrorCode::DimensionMismatch, "model returned the wrong number of rows");

    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ++evaluations_;
      const double pi = p(static_cast<Eigen::Index>(i));
      const double prox = cf_distance(c_, xs[i], x0_);
      if (label_of(pi) == target_ && prox > 0.0) {
        if (insert(xs[i], prox)) improve_with(xs[i]);
      } else {
        const double hinge = target_ == 1 ? 0.5 - pi : pi - 0.5;
        near.emplace_back(hinge + 1e-3 * prox, i);
      }
    }
    pool_.clear();
    if (!archive_.empty()) {
      for (const auto& e : archive_) pool_.push_back(e.x);
    } else {
      std::stable_sort(near.begin(), near.end(), [](auto& a, auto& b) { return a.first < b.first; });
      for (const auto& [score, i] : near) pool_.push_back(xs[i]);
    }
  }

  // Keeps the archive sorted by proximity and free of duplicates.
  bool insert(const Eigen::VectorXd& x, double prox) {
    for (const auto& e : archive_)
      if (e.x == x) return false;
    if (archive_.size() >= kArchiveCap && prox >= archive_.back().proximity) return false;
    auto pos = std::upper_bound(archive_.begin(), archive_.end(), prox,
                                [](double v, const Entry& e) { return v < e.proximity; });
    archive_.insert(pos, {x, prox});
    if (archive_.size() > kArchiveCap) archive_.pop_back();
    return true;
  }

  void consider(std::vector<Eigen::VectorXd> set) {
    const double loss = cf_set_loss(c_, cfg_, x0_, set);
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_ = std::move(set);
      trace_.emplace_back(evaluations_, loss);
    }
  }

  void improve_with(const Eigen::VectorXd& x) {
    if (static_cast<int>(best_.size()) < cfg_.k) {
      auto s = best_;
      s.push_back(x);
      consider(std::move(s));
      return;
    }
    std::vector<Eigen::VectorXd> best_swap;
    double best_swap_loss = best_loss_;
    for (std::size_t i = 0; i < best_.size(); ++i) {
      auto s = best_;
      s[i] = x;
      const double l = cf_set_loss(c_, cfg_, x0_, s);
      if (l < best_swap_loss) {
        best_swap_loss = l;
        best_swap = std::move(s);
      }
    }
    if (!best_swap.empty()) consider(std::move(best_swap));
  }

  // Greedy construction over the whole archive followed by one swap pass.
  void full_selection() {
    if (archive_.empty()) return;
    std::vector<Eigen::VectorXd> s;
    std::vector<bool> used(archive_.size(), false);
    while (static_cast<int>(s.size()) < cfg_.k) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t pick = archive_.size();
      for (std::size_t i = 0; i < archive_.size(); ++i) {
        if (used[i]) continue;
        s.push_back(archive_[i].x);
        const double l = cf_set_loss(c_, cfg_, x0_, s);
        s.pop_back();
        if (l < best) {
          best = l;
          pick = i;
        }
      }
      if (pick == archive_.size()) break;
      used[pick] = true;
      s.push_back(archive_[pick].x);
    }
    double current = cf_set_loss(c_, cfg_, x0_, s);
    for (std::size_t slot = 0; slot < s.size(); ++slot) {
      for (std::size_t i = 0; i < archive_.size(); ++i) {
        if (used[i]) continue;
        auto trial = s;
        trial[slot] = archive_[i].x;
        const double l = cf_set_loss(c_, cfg_, x0_, trial);
        if (l < current) {
          current = l;
          s = std::move(trial);
          used.assign(archive_.size(), false);
          for (const auto& x : s)
            for (std::size_t a = 0; a < archive_.size(); ++a)
              if (archive_[a].x == x) used[a] = true;
        }
      }
    }
    consider(std::move(s));
  }

  const ProbaFn& model_;
  Eigen::VectorXd x0_;
  int target_;
  const CfConstraints& c_;
  const CfConfig& cfg_;
  Rng rng_;
  std::vector<Eigen::Index> mutable_;
  std::vector<Entry> archive_;
  std::vector<Eigen::VectorXd> pool_;
  std::vector<Eigen::VectorXd> best_;
  double best_loss_;
  long evaluations_ = 0;
  std::vector<std::pair<long, double>> trace_;
};

}  // namespace

CounterfactualSet generate_counterfactuals(const ProbaFn& model, const Eigen::VectorXd& instance, int target_label,
                                           const CfConstraints& constraints, const CfConfig& cfg) {
  if (cfg.k < 1) fail(ErrorCode::InvalidHyperparameter, "k must be >= 1");
  if (cfg.budget < 1 || cfg.population < 2) fail(ErrorCode::InvalidHyperparameter, "budget and population too small");
  if (target_label != 0 && target_label != 1) fail(ErrorCode::InvalidHyperparameter, "target label must be 0 or 1");
  if (instance.size() != static_cast<Eigen::Index>(constraints.names.size()))
    fail(ErrorCode::DimensionMismatch,
         fmt::format("instance has {} features, constraints {}", instance.size(), constraints.names.size()));

  Eigen::MatrixXd row = instance.transpose();
  const int original_label = label_of(model(row)(0));
  Search search(model, instance, target_label, constraints, cfg);
  search.run();
  if (!search.found())
    fail(ErrorCode::NoCounterfactualFound,
         fmt::format("no candidate reached label {} within {} evaluations", target_label, cfg.budget));
  CounterfactualSet out = std::move(search).result();
  out.original_label = original_label;
  return out;
}

std::vector<std::vector<CfChange>> diff_report(const CounterfactualSet& set) {
  std::vector<std::vector<CfChange>> out;
  for (const auto& cf : set.counterfactuals) {
    std::vector<CfChange> changes;
    for (Eigen::Index j = 0; j < cf.size(); ++j)
      if (cf(j) != set.original(j)) changes.push_back({set.names[static_cast<std::size_t>(j)], set.original(j), cf(j)});
    out.push_back(std::move(changes));
  }
  return out;
}

std::string render_diff_report(const CounterfactualSet& set) {
  std::string out = fmt::format("Original prediction: {} -> target {}\n", set.original_label, set.target_label);
  const auto diffs = diff_report(set);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    out += fmt::format("Option {}:\n", i + 1);
    for (const auto& ch : diffs[i]) out += fmt::format("  {}: {:.2f} -> {:.2f}\n", ch.feature, ch.from, ch.to);
  }
  if (set.status == CfStatus::Partial) out += fmt::format("(only {} option(s) found)\n", diffs.size());
  return out;
}

nlohmann::json counterfactuals_to_json(const CounterfactualSet& set) {
  auto keyed = [&](const Eigen::VectorXd& v) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < set.names.size(); ++i) j[set.names[i]] = v(static_cast<Eigen::Index>(i));
    return j;
  };
  nlohmann::json cfs = nlohmann::json::array();
  const auto diffs = diff_report(set);
  for (std::size_t i = 0; i < set.counterfactuals.size(); ++i) {
    nlohmann::json changes = nlohmann::json::object();
    for (const auto& ch : diffs[i]) changes[ch.feature] = {{"from", ch.from}, {"to", ch.to}};
    cfs.push_back({{"values", keyed(set.counterfactuals[i])}, {"label", set.labels[i]}, {"changes", changes}});
  }
  return {{"original", keyed(set.original)},
          {"original_label", set.original_label},
          {"target_label", set.target_label},
          {"status", set.status == CfStatus::Complete ? "complete" : "partial"},
          {"loss", set.loss},
          {"evaluations", set.evaluations},
          {"counterfactuals", cfs}};
}

}  // namespace glucolens
