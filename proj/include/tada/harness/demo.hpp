#pragma once

// Trains the two-stage demo network on the ramp-direction task and
// reports test accuracy plus a time-reversal probe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "tada/blocks/network.hpp"
#include "tada/harness/equivalence_suite.hpp"
#include "tada/harness/suite.hpp"
#include "tada/harness/synthetic.hpp"

namespace tada::harness {

enum class DemoModel { static_conv, tada, tada_no_context };

inline const char* to_string(DemoModel m) {
  switch (m) {
    case DemoModel::static_conv: return "static";
    case DemoModel::tada: return "tada";
    case DemoModel::tada_no_context: return "tada_no_context";
  }
  return "?";
}

inline DemoModel parse_demo_model(const std::string& s) {
  if (s == "static") return DemoModel::static_conv;
  if (s == "tada") return DemoModel::tada;
  if (s == "tada_no_context") return DemoModel::tada_no_context;
  throw UsageError("unknown demo model '" + s + "' (static | tada | tada_no_context)");
}

struct TrainOptions {
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  double lr = 0.05;
  double momentum = 0.9;
  /// Stop once the epoch's training accuracy reaches this for two
  /// consecutive epochs; > 1 disables early stopping.
  double stop_accuracy = 1.0;

  void validate() const {
    if (!epochs || !batch_size) throw ConfigError("demo: epochs and batch_size must be >= 1");
    if (!(lr > 0) || !(momentum >= 0) || !(momentum < 1)) {
      throw ConfigError("demo: need lr > 0 and 0 <= momentum < 1");
    }
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0;            // mean training loss
  double train_accuracy = 0;  // fraction of training clips classified correctly during the epoch
};

struct DemoResult {
  DemoModel model = DemoModel::tada;
  std::uint64_t seed = 0;
  std::vector<EpochStats> curve;
  double test_accuracy = 0;
  double reversed_accuracy = 0;  // reversed test clips scored against flipped labels
  double seconds = 0;
  bool diverged = false;
  std::string diagnostic;
};

/// Network spec and calibration config for one demo model.
inline NetSpec demo_spec(DemoModel m, const SyntheticTaskSpec& task) {
  NetSpec s = presets::demo(std::string("demo_") + to_string(m),
                            m == DemoModel::static_conv ? ConvKind::spatial : ConvKind::tada);
  s.in_channels = task.channels;
  s.frames = task.frames;
  s.height = task.height;
  s.width = task.width;
  return s;
}

inline TAdaConvConfig demo_config(DemoModel m) {
  TAdaConvConfig cfg;
  if (m == DemoModel::tada_no_context) {
    cfg.k1 = 1;
    cfg.k2 = 1;
    cfg.use_global = false;
  }
  return cfg;
}

/// Plain SGD with momentum: v <- mu v + g; p <- p - lr v.
template <class T>
class Sgd {
 public:
  Sgd(std::vector<Parameter<T>*> params, double lr, double momentum)
      : params_(std::move(params)), lr_(static_cast<T>(lr)), mu_(static_cast<T>(momentum)) {
    for (auto* p : params_) velocity_.push_back(Tensor<T>::zeros(p->value.shape()));
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto v = velocity_[i].data();
      auto g = params_[i]->grad.data();
      auto w = params_[i]->value.data();
      if (g.size() != w.size()) continue;  // not reached by this loss
      for (std::size_t j = 0; j < w.size(); ++j) {
        v[j] = mu_ * v[j] + g[j];
        w[j] -= lr_ * v[j];
      }
    }
  }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<Tensor<T>> velocity_;
  T lr_, mu_;
};

template <class T>
std::vector<std::size_t> argmax_rows(const Tensor<T>& logits) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.dim(1); ++c)
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    out.push_back(best);
  }
  return out;
}

template <class T>
std::vector<std::size_t> predict(Network<T>& net, const ClipSet<T>& set, std::size_t batch) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += batch) {
    idx.clear();
    for (std::size_t i = start; i < std::min(set.size(), start + batch); ++i) idx.push_back(i);
    const auto b = gather(set, idx);
    Tape<T> tape;
    const auto pred = argmax_rows(net.forward(tape.constant(b.clips), Mode::eval).value());
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

inline double accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& labels) {
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

/// Trains one model on the ramp task and scores it. `finished`, when set,
/// sees the trained network (e.g. to save its parameters).
template <class T>
DemoResult run_demo(DemoModel model, const SyntheticTaskSpec& task, const TrainOptions& train,
                    const std::function<void(Network<T>&)>& finished = {}) {
  task.validate();
  train.validate();
  Stopwatch clock;
  DemoResult res;
  res.model = model;
  res.seed = task.seed;
  Rng data_rng = case_rng(task.seed, 0, 100), init_rng = case_rng(task.seed, 0, 101),
      order_rng = case_rng(task.seed, 0, 102), test_rng = case_rng(task.seed, 0, 103);
  const auto train_set = make_ramp_clips<T>(task, task.train_per_class, data_rng);
  const auto test_set = make_ramp_clips<T>(task, task.test_per_class, test_rng);
  Network<T> net(demo_spec(model, task), demo_config(model), init_rng);
  Sgd<T> opt(net.parameters(), train.lr, train.momentum);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t streak = 0;
  for (std::size_t epoch = 1; epoch <= train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0;
    std::size_t batches = 0, hits = 0;
    for (std::size_t start = 0; start < order.size(); start += train.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<long>(start),
                                         order.begin() + static_cast<long>(std::min(order.size(), start + train.batch_size)));
      const auto b = gather(train_set, idx);
      Tape<T> tape;
      Var<T> logits = net.forward(tape.constant(b.clips), Mode::train);
      const auto pred = argmax_rows(logits.value());
      for (std::size_t r = 0; r < pred.size(); ++r) hits += pred[r] == b.labels[r];
      Var<T> loss = softmax_cross_entropy(logits, b.labels);
      const double l = static_cast<double>(loss.value().data()[0]);
      if (!std::isfinite(l)) {
        res.diverged = true;
        res.diagnostic = "loss became " + std::to_string(l) + " at epoch " + std::to_string(epoch);
        res.seconds = clock.seconds();
        return res;
      }
      tape.backward(loss);
      opt.step();
      loss_sum += l;
      ++batches;
    }
    const double train_acc = static_cast<double>(hits) / static_cast<double>(train_set.size());
    res.curve.push_back({epoch, loss_sum / static_cast<double>(batches), train_acc});
    streak = train_acc >= train.stop_accuracy ? streak + 1 : 0;
    if (streak >= 2) break;
  }
  res.test_accuracy = accuracy(predict(net, test_set, 64), test_set.labels);
  ClipSet<T> reversed{reverse_time(test_set.clips), {}};
  for (auto l : test_set.labels) reversed.labels.push_back(l == ascending ? descending : ascending);
  res.reversed_accuracy = accuracy(predict(net, reversed, 64), reversed.labels);
  if (finished) finished(net);
  res.seconds = clock.seconds();
  return res;
}

/// Pass bars for the demo. Accuracies are fractions in [0, 1].
struct DemoThresholds {
  double tada_min = 0.95;
  double reversed_min = 0.95;
  double static_max = 0.60;
  double gap_min = 0.30;
};

/// Problems with one trained model taken alone; empty means it passed.
inline std::vector<std::string> demo_problems(const DemoResult& r, const DemoThresholds& th = {}) {
  std::vector<std::string> out;
  const std::string who = std::string(to_string(r.model)) + " seed " + std::to_string(r.seed);
  auto pct = [](double v) { return std::to_string(static_cast<int>(std::lround(100.0 * v))) + "%"; };
  if (r.diverged) {
    out.push_back(who + ": diverged (" + r.diagnostic + ")");
    return out;
  }
  if (r.model == DemoModel::tada) {
    if (r.test_accuracy < th.tada_min) out.push_back(who + ": test accuracy " + pct(r.test_accuracy) + " < " + pct(th.tada_min));
    if (r.reversed_accuracy < th.reversed_min) {
      out.push_back(who + ": reversed-clip accuracy " + pct(r.reversed_accuracy) + " < " + pct(th.reversed_min));
    }
  } else if (r.model == DemoModel::static_conv && r.test_accuracy > th.static_max) {
    out.push_back(who + ": test accuracy " + pct(r.test_accuracy) + " > " + pct(th.static_max));
  }
  return out;
}

/// Gap check between a tada run and a static run on the same seed.
inline std::vector<std::string> demo_gap_problems(const DemoResult& tada, const DemoResult& stat,
                                                  const DemoThresholds& th = {}) {
  std::vector<std::string> out;
  const double gap = tada.test_accuracy - stat.test_accuracy;
  if (!(gap >= th.gap_min - 1e-12)) {
    out.push_back("seed " + std::to_string(tada.seed) + ": accuracy gap " +
                  std::to_string(100.0 * gap) + " points < " + std::to_string(100.0 * th.gap_min));
  }
  return out;
}

}  // namespace tada::harness
