// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is nonzero when any criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tada/cost/net_cost.hpp"
#include "tada/harness/demo.hpp"
#include "tada/harness/equivalence_suite.hpp"
#include "tada/harness/gradcheck_suite.hpp"
#include "tada/harness/synthetic.hpp"

namespace {

using namespace tada;
using namespace tada::harness;

struct Verdict {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [violated: " << what << "]";
    }
  }
};

bool run_criterion(int id, const std::string& title, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  Stopwatch clock;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  const double secs = clock.seconds();
  const bool in_budget = secs < budget_s;
  const bool ok = v.ok && in_budget;
  char timing[96];
  std::snprintf(timing, sizeof(timing), "%.2f s (budget %.0f s%s)", secs, budget_s, in_budget ? "" : ", EXCEEDED");
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " " << title << ":" << v.detail.str() << " | "
            << timing << std::endl;
  return ok;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

double round_to(double v, int digits) {
  const double s = std::pow(10.0, digits);
  return std::round(v * s) / s;
}

cost::OpCost table_op(cost::OpKind kind) {
  cost::OpCostQuery q;
  q.kind = kind;
  q.ci = q.co = 64;
  q.k = 3;
  q.kt = 3;
  q.t = 8;
  q.h = q.w = 56;
  q.r = 4;
  return cost::op_cost(q);
}

void op_level_cost(Verdict& v) {
  const auto tada_op = table_op(cost::OpKind::tadaconv);
  const auto r21d = table_op(cost::OpKind::r2plus1d);
  v.detail << " tadaconv " << tada_op.flops << " FLOPs / " << tada_op.params << " params; (2+1)D " << r21d.flops
           << " FLOPs / " << r21d.params << " params";
  v.require(round_to(tada_op.flops / 1e9, 4) == 0.9268, "tadaconv 0.9268 GFLOPs");
  v.require(tada_op.params == 43008, "tadaconv 43,008 params");
  v.require(round_to(r21d.flops / 1e9, 4) == 1.2331, "(2+1)D 1.2331 GFLOPs");
  v.require(r21d.params == 49152, "(2+1)D 49,152 params");
}

void network_level_cost(Verdict& v) {
  struct Target {
    const char* preset;
    double gflops, mparams;
  };
  for (const Target& t : {Target{"tada2d50", 33.02, 27.5}, Target{"r2plus1d50", 37.94, 28.1}}) {
    const auto rep = cost::net_cost(presets::by_name(t.preset));
    const double gf = rep.total_flops() / 1e9, mp = rep.total_params() / 1e6;
    const double df = 100.0 * (gf - t.gflops) / t.gflops, dp = 100.0 * (mp - t.mparams) / t.mparams;
    char buf[160];
    std::snprintf(buf, sizeof(buf), " %s %.3f G (%+.2f%%) / %.2f M (%+.2f%%);", t.preset, gf, df, mp, dp);
    v.detail << buf;
    v.require(std::abs(df) <= 2.0, std::string(t.preset) + " FLOPs within 2%");
    v.require(std::abs(dp) <= 2.0, std::string(t.preset) + " params within 2%");
  }
}

void temporal_rewrite(Verdict& v) {
  EquivalenceSuiteOptions o;
  o.seed = 20240601;
  o.cases = 100;
  // Only the temporal-conv family is needed here; it alternates the ReLU-mask
  // and no-activation forms by case parity.
  SuiteResult linear_form("no-activation", 1e-10), relu_form("relu-mask", 1e-10);
  for (std::size_t i = 0; i < o.cases; ++i) {
    Rng rng = case_rng(o.seed, i, 0);
    const double d = harness::detail::temporal_conv_case<double>(rng, i, 0.0);
    (i % 2 == 0 ? relu_form : linear_form).record("case " + std::to_string(i), d);
  }
  v.detail << " relu-mask " << relu_form.cases << " cases worst " << sci(relu_form.worst) << ", no-activation "
           << linear_form.cases << " cases worst " << sci(linear_form.worst);
  v.require(relu_form.passed() && linear_form.passed(), "max abs diff <= 1e-10");
  v.require(relu_form.cases + linear_form.cases == 100, "100 instances");
}

void identity_init(Verdict& v) {
  constexpr double tol = 1e-12;
  constexpr std::size_t inputs = 20;
  SuiteResult layers("layers", tol), network("network", tol);
  const auto grid = config_grid();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (std::size_t i = 0; i < inputs; ++i) {
      Rng rng = case_rng(77, c * inputs + i, 40);
      TAdaConvConfig cfg = grid[c];
      cfg.identity_init = true;
      const std::size_t n = 2, ci = 8, co = 6, t = 5, h = 7, w = 6, stride = 1 + i % 2;
      TAdaConv2d<double> layer("layer", ci, co, 3, stride, 1, cfg, t, rng);
      const auto x = random_normal<double>({n, ci, t, h, w}, rng);
      Tape<double> tape;
      auto xv = tape.constant(x);
      const auto y = layer.forward(xv, i % 2 ? Mode::eval : Mode::train).value();
      const auto ref = conv2d_per_frame(xv, tape.constant(layer.weight.value), stride, 1).value();
      layers.record("config " + std::to_string(c) + " input " + std::to_string(i), max_abs_diff(y, ref));
    }
  }
  Rng init(5);
  Network<double> plain(presets::by_name("r2d_tiny"), {}, init);
  Network<double> tada_net(presets::by_name("tada2d_tiny"), {}, init);
  tada_net.copy_matching(plain);
  const auto& spec = plain.spec();
  for (std::size_t i = 0; i < inputs; ++i) {
    Rng rng = case_rng(78, i, 41);
    const auto x = random_normal<double>({2, spec.in_channels, spec.frames, spec.height, spec.width}, rng);
    const Mode mode = i % 2 ? Mode::eval : Mode::train;
    Tape<double> tape;
    const auto a = tada_net.forward(tape.constant(x), mode).value();
    const auto b = plain.forward(tape.constant(x), mode).value();
    network.record("input " + std::to_string(i), max_abs_diff(a, b));
  }
  v.detail << " " << grid.size() << " configs x " << inputs << " inputs worst " << sci(layers.worst)
           << "; tada2d_tiny vs r2d_tiny " << network.cases << " inputs worst " << sci(network.worst);
  v.require(layers.passed(), "layer outputs equal plain conv to 1e-12");
  v.require(network.passed(), "network outputs equal plain network to 1e-12");
}

void gradients(Verdict& v) {
  GradCheckSuiteOptions o;
  o.seed = 11;
  o.cases = 50;
  o.tolerance = 1e-5;
  const auto results = run_gradcheck<double>(o);
  for (std::size_t i = 1; i < results.size(); ++i) {
    v.detail << " " << results[i].name << " " << results[i].cases << " cases worst " << sci(results[i].worst) << ";";
  }
  bool tada_seen = false, agg_seen = false;
  for (const auto& r : results) {
    tada_seen |= r.name == "tadaconv" && r.cases == 50;
    agg_seen |= r.name == "aggregation" && r.cases == 50;
  }
  v.require(tada_seen && agg_seen, "50 tadaconv and 50 aggregation cases");
  v.require(results.front().passed(), "max relative error <= 1e-5");
}

void adaptivity_demo(Verdict& v) {
  SyntheticTaskSpec task;
  TrainOptions train;
  const DemoThresholds th;
  double worst_tada = 1.0, worst_static = 0.0, worst_gap = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    task.seed = seed;
    const auto tada_run = run_demo<float>(DemoModel::tada, task, train);
    const auto static_run = run_demo<float>(DemoModel::static_conv, task, train);
    v.require(!tada_run.diverged && !static_run.diverged, "no divergence (seed " + std::to_string(seed) + ")");
    worst_tada = std::min(worst_tada, tada_run.test_accuracy);
    worst_static = std::max(worst_static, static_run.test_accuracy);
    worst_gap = std::min(worst_gap, tada_run.test_accuracy - static_run.test_accuracy);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), " 5 seeds: tada min %.1f%%, static max %.1f%%, min gap %.1f points",
                100 * worst_tada, 100 * worst_static, 100 * worst_gap);
  v.detail << buf;
  v.require(worst_tada >= th.tada_min, "tada >= 95%");
  v.require(worst_static <= th.static_max, "static <= 60%");
  v.require(worst_gap >= th.gap_min - 1e-12, "gap >= 30 points");
}

/// alpha(reverse(x)) against reverse_t(alpha(x)), largest abs difference.
double reversal_gap(TAdaConv2d<double>& layer, const Tensor<double>& x) {
  Tape<double> tape;
  const auto a = layer.calibration(tape.constant(x), Mode::eval).alpha.value();
  const auto b = layer.calibration(tape.constant(reverse_time(x)), Mode::eval).alpha.value();
  const std::size_t rows = a.dim(0) * a.dim(1), t = a.dim(2);
  double worst = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t s = 0; s < t; ++s)
      worst = std::max(worst, std::abs(a.data()[r * t + s] - b.data()[r * t + (t - 1 - s)]));
  return worst;
}

void order_sensitivity(Verdict& v) {
  double context_gap = 0.0, pointwise_worst = 0.0;
  std::size_t pointwise_cases = 0;
  for (auto form : {GeneratorForm::nonlinear, GeneratorForm::linear}) {
    for (auto dim : {CalibrationDim::cin, CalibrationDim::cout, CalibrationDim::cin_x_cout, CalibrationDim::kspatial}) {
      for (std::size_t i = 0; i < 5; ++i) {
        Rng rng = case_rng(31, pointwise_cases, 60);
        TAdaConvConfig cfg;
        cfg.generator = form;
        cfg.calibration_dim = dim;
        cfg.identity_init = false;
        cfg.k1 = cfg.k2 = 1;
        cfg.use_global = true;
        TAdaConv2d<double> pointwise("pw", 8, 6, 3, 1, 1, cfg, 6, rng);
        cfg.k1 = cfg.k2 = 3;
        TAdaConv2d<double> context("ctx", 8, 6, 3, 1, 1, cfg, 6, rng);
        const auto x = random_normal<double>({2, 8, 6, 5, 5}, rng);
        pointwise_worst = std::max(pointwise_worst, reversal_gap(pointwise, x));
        context_gap = std::max(context_gap, reversal_gap(context, x));
        ++pointwise_cases;
      }
    }
  }
  v.detail << " k1=k2=3: largest alpha reversal mismatch " << sci(context_gap) << "; k1=k2=1 + global: "
           << pointwise_cases << " inputs, largest mismatch " << sci(pointwise_worst);
  v.require(context_gap > 1e-3, "a non-equivariant input exists with temporal context");
  v.require(pointwise_worst == 0.0, "exact equivariance with k1=k2=1 + global");
}

}  // namespace

int main() {
  std::cout << "acceptance run (f64 unless noted)" << std::endl;
  int failed = 0;
  failed += !run_criterion(1, "op-level cost (tadaconv, (2+1)D at Ci=Co=64 k=3 T=8 56x56 r=4)", 1, op_level_cost);
  failed += !run_criterion(2, "network-level cost within 2% (8x224^2)", 5, network_level_cost);
  failed += !run_criterion(3, "temporal conv as calibrated weights, 100 cases <= 1e-10", 30, temporal_rewrite);
  failed += !run_criterion(4, "identity initialization <= 1e-12", 60, identity_init);
  failed += !run_criterion(5, "analytic vs finite-difference gradients <= 1e-5", 120, gradients);
  failed += !run_criterion(6, "adaptivity on the temporal-order task, 5 seeds (f32)", 300, adaptivity_demo);
  failed += !run_criterion(7, "order sensitivity of calibration weights", 60, order_sensitivity);
  std::cout << (failed ? "FAIL" : "PASS") << ": " << 7 - failed << " of 7 criteria passed" << std::endl;
  return failed ? 1 : 0;
}
