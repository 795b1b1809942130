#pragma once

#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ambit/eval/metrics.hpp"
#include "ambit/eval/seeds.hpp"
#include "ambit/residual/ambit.hpp"
#include "ambit/residual/models.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/util/error.hpp"

namespace ambit::experiment {

// Catalog kinds plus "ambit_<anchor>" and "ambit_<anchor>_nobase".
inline std::optional<residual::AnchorSpec> ambit_spec(const std::string& kind) {
  if (kind.rfind("ambit_", 0) != 0) return std::nullopt;
  std::string rest = kind.substr(6);
  residual::AnchorSpec s;
  const std::string suffix = "_nobase";
  if (rest.size() > suffix.size() && rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0) {
    s.include_base_feature = false;
    rest.resize(rest.size() - suffix.size());
  }
  s.anchor = residual::anchor_from_string(rest);
  return s;
}

inline std::vector<std::string> known_kinds() {
  std::vector<std::string> out;
  for (const auto& [k, n] : residual::model_catalog()) out.push_back(k);
  for (auto a : residual::kAnchors) {
    out.push_back(std::string("ambit_") + residual::to_string(a));
    out.push_back(std::string("ambit_") + residual::to_string(a) + "_nobase");
  }
  return out;
}

struct Fitted {
  std::string kind;
  std::string name;
  residual::ModelPtr model;
  std::vector<double> test_pred;
  std::optional<eval::Metrics> metrics;
  eval::Timing timing;
  std::string error;

  bool ok() const { return error.empty(); }
};

// Fits models on one task, each at most once, and scores them on the test
// rows. With `parallel`, prefetch() fits independent kinds concurrently.
class Bench {
 public:
  Bench(const residual::Task& task, residual::ModelOptions opt, bool parallel = false)
      : task_(task), opt_(std::move(opt)), parallel_(parallel) {}

  const residual::Task& task() const { return task_; }
  const residual::ModelOptions& options() const { return opt_; }

  const Fitted& get(const std::string& kind) {
    std::shared_future<Fitted> fut;
    std::promise<Fitted> mine;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      auto it = cache_.find(kind);
      if (it == cache_.end()) {
        fut = mine.get_future().share();
        cache_.emplace(kind, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) mine.set_value(compute(kind));
    return fut.get();
  }

  void prefetch(const std::vector<std::string>& kinds) {
    if (!parallel_) return;
    std::vector<std::future<void>> jobs;
    for (const auto& k : kinds) jobs.push_back(std::async(std::launch::async, [this, k] { get(k); }));
    for (auto& j : jobs) j.get();
  }

 private:
  Fitted compute(const std::string& kind) {
    Fitted f;
    f.kind = kind;
    try {
      eval::Stopwatch train;
      if (auto spec = ambit_spec(kind)) {
        const auto& base = get(residual::anchor_model_kind(spec->anchor));
        if (!base.ok()) throw FitError("anchor baseline failed: " + base.error);
        f.model = residual::fit_ambit(task_, *spec, opt_.boost, opt_, base.model);
        f.timing.train_s = train.seconds() + base.timing.train_s;
      } else {
        f.model = residual::fit_model(kind, task_, opt_);
        f.timing.train_s = train.seconds();
      }
      f.name = f.model->name();
      eval::Stopwatch pred;
      f.test_pred = f.model->predict(task_, task_.test);
      f.timing.pred_s = pred.seconds();
      f.metrics = eval::compute_metrics(eval::observed(task_.test), f.test_pred);
    } catch (const std::exception& e) {
      f.error = e.what();
      if (f.name.empty()) {
        try {
          f.name = ambit_spec(kind) ? residual::ambit_name(*ambit_spec(kind)) : residual::display_name(kind);
        } catch (const std::exception&) {
          f.name = kind;
        }
      }
    }
    return f;
  }

  const residual::Task& task_;
  residual::ModelOptions opt_;
  bool parallel_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<Fitted>> cache_;
};

}  // namespace ambit::experiment
