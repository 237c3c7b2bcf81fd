// tada: verification suites, cost reports and the synthetic demo.
//
//   tada equivalence [--cases N] [--fault-beta X]
//   tada gradcheck   [--cases N]
//   tada cost <preset|op|file> [--compare NAME] [--convention global-full|global-reduced]
//   tada demo        [--model all|tada|static|tada_no_context] [--seeds N] [--config FILE]
//
// Global flags: --seed, --dtype f32|f64, --cases N, --out PATH.
// Exit status: 0 all checks passed, 1 a check failed, 2 bad invocation or input.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tada/cost/net_cost.hpp"
#include "tada/harness/config_file.hpp"
#include "tada/harness/demo.hpp"
#include "tada/harness/equivalence_suite.hpp"
#include "tada/harness/gradcheck_suite.hpp"
#include "tada/harness/param_io.hpp"
#include "tada/harness/spec_file.hpp"

namespace {

using namespace tada;
using namespace tada::harness;

constexpr int kPass = 0, kFail = 1, kBadInput = 2;

struct Global {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string dtype;  // empty: the subcommand's default
  std::optional<std::size_t> cases;
  std::string out;
};

bool use_f32(const Global& g, const char* fallback) {
  const std::string d = g.dtype.empty() ? fallback : g.dtype;
  return d == "f32";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path + "'");
  return os;
}

int report_suites(const std::vector<SuiteResult>& suites, const Global& g) {
  for (const auto& r : suites) write_summary(std::cout, r);
  if (!g.out.empty()) {
    auto os = open_out(g.out);
    write_csv(os, suites);
  }
  return suites.front().passed() ? kPass : kFail;
}

// ---------------------------------------------------------------- equivalence

int cmd_equivalence(const Global& g, double fault_beta) {
  EquivalenceSuiteOptions o;
  o.seed = g.seed;
  o.cases = g.cases.value_or(o.cases);
  o.beta_fault = fault_beta;
  if (fault_beta != 0.0) std::cout << "fault injection: beta offset " << fault_beta << " on the rewritten side\n";
  return report_suites(use_f32(g, "f64") ? run_equivalence<float>(o) : run_equivalence<double>(o), g);
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const Global& g, std::size_t block_every) {
  if (use_f32(g, "f64")) throw UsageError("gradcheck runs in f64 only; finite differences are too coarse in f32");
  GradCheckSuiteOptions o;
  o.seed = g.seed;
  o.cases = g.cases.value_or(o.cases);
  o.block_every = block_every;
  return report_suites(run_gradcheck<double>(o), g);
}

// ---------------------------------------------------------------- cost

struct CostArgs {
  std::string target;
  std::string compare;
  std::string convention = "global-full";
  std::string kind = "tadaconv";
  std::optional<cost::Count> ci, co, k, kt, t, h, w, r;
};

struct NetTarget {
  NetSpec spec;
  TAdaConvConfig cfg;
};

NetTarget resolve_net(const std::string& name) {
  const auto names = presets::names();
  if (std::find(names.begin(), names.end(), name) != names.end()) return {presets::by_name(name), {}};
  if (std::filesystem::is_regular_file(name)) {
    const auto kv = KeyValueConfig::load(name);
    NetTarget t{netspec_from(kv), tada_config_from(kv)};
    kv.reject_unused();
    return t;
  }
  std::string list;
  for (const auto& n : names) list += " " + n;
  throw UsageError("unknown network preset or spec file '" + name + "' (presets:" + list + ")");
}

int cmd_cost(const Global& g, const CostArgs& a) {
  const auto convention = cost::parse_convention(a.convention);
  if (a.target == "op") {
    if (!a.compare.empty()) throw UsageError("--compare applies to networks, not single operators");
    cost::OpCostQuery q;
    q.kind = cost::parse_op_kind(a.kind);
    q.ci = a.ci;
    q.co = a.co;
    q.k = a.k;
    q.kt = a.kt;
    q.t = a.t;
    q.h = a.h;
    q.w = a.w;
    q.r = a.r;
    q.convention = convention;
    const auto c = cost::op_cost(q);
    cost::CostReport rep(std::string("op-") + cost::to_string(q.kind));
    rep.add({"op", cost::to_string(q.kind), q.ci.value_or(0), q.co.value_or(0), *q.t, *q.h, *q.w, c.flops,
             c.params});
    std::cout << cost::to_string(q.kind) << " (" << cost::to_string(convention) << "): " << c.flops
              << " FLOPs (" << std::fixed << std::setprecision(4) << c.flops / 1e9 << " G), " << c.params
              << " params\n";
    if (!g.out.empty()) {
      auto os = open_out(g.out);
      rep.write_csv(os);
    }
    return kPass;
  }
  const NetTarget net = resolve_net(a.target);
  const auto rep = cost::net_cost(net.spec, net.cfg, convention);
  rep.write_table(std::cout);
  if (!a.compare.empty()) {
    const NetTarget base = resolve_net(a.compare);
    write_comparison(std::cout, rep.compare(cost::net_cost(base.spec, base.cfg, convention)));
  }
  if (!g.out.empty()) {
    auto os = open_out(g.out);
    rep.write_csv(os);
  }
  return kPass;
}

// ---------------------------------------------------------------- demo

struct DemoArgs {
  std::string model = "all";
  std::string config;
  std::optional<std::size_t> seeds, epochs;
  std::string save_params;
};

template <class T>
int run_demos(const DemoSettings& d, const std::string& save_params, const std::string& out) {
  std::vector<DemoModel> models;
  if (d.model == "all") models = {DemoModel::tada, DemoModel::static_conv, DemoModel::tada_no_context};
  else models = {parse_demo_model(d.model)};
  const bool many = models.size() * d.seeds > 1;

  std::vector<DemoResult> results;
  std::vector<std::string> problems;
  for (std::size_t s = 0; s < d.seeds; ++s) {
    SyntheticTaskSpec task = d.task;
    task.seed = d.task.seed + s;
    const DemoResult* tada_run = nullptr;
    const DemoResult* static_run = nullptr;
    std::size_t first = results.size();
    for (auto m : models) {
      std::function<void(Network<T>&)> save;
      if (!save_params.empty()) {
        const std::string path =
            many ? save_params + "." + to_string(m) + "." + std::to_string(task.seed) : save_params;
        save = [path](Network<T>& net) { save_parameters(path, net.parameters()); };
      }
      results.push_back(run_demo<T>(m, task, d.train, save));
      const auto& r = results.back();
      std::cout << std::left << std::setw(16) << to_string(m) << " seed " << r.seed << "  epochs "
                << std::setw(3) << r.curve.size() << " test " << std::fixed << std::setprecision(1)
                << 100.0 * r.test_accuracy << "%  reversed " << 100.0 * r.reversed_accuracy << "%  "
                << std::setprecision(2) << r.seconds << " s" << std::defaultfloat << '\n';
      for (auto& p : demo_problems(r)) problems.push_back(std::move(p));
    }
    for (std::size_t i = first; i < results.size(); ++i) {
      if (results[i].model == DemoModel::tada) tada_run = &results[i];
      if (results[i].model == DemoModel::static_conv) static_run = &results[i];
    }
    if (tada_run && static_run && !tada_run->diverged && !static_run->diverged) {
      for (auto& p : demo_gap_problems(*tada_run, *static_run)) problems.push_back(std::move(p));
    }
  }
  if (!out.empty()) {
    auto os = open_out(out);
    os << "model,seed,epoch,loss,train_accuracy,test_accuracy,reversed_accuracy\n";
    for (const auto& r : results) {
      for (const auto& e : r.curve) {
        os << to_string(r.model) << ',' << r.seed << ',' << e.epoch << ',' << std::setprecision(9) << e.loss
           << ',' << e.train_accuracy << ',' << r.test_accuracy << ',' << r.reversed_accuracy << '\n';
      }
    }
  }
  for (const auto& p : problems) std::cout << "FAIL " << p << '\n';
  std::cout << (problems.empty() ? "PASS" : "FAIL") << " demo: " << results.size() << " runs\n";
  return problems.empty() ? kPass : kFail;
}

int cmd_demo(const Global& g, const DemoArgs& a) {
  DemoSettings d;
  d.task.seed = g.seed;
  if (!a.config.empty()) {
    const auto kv = KeyValueConfig::load(a.config);
    if (g.seed_given && kv.seed() != g.seed) {
      throw UsageError("--seed " + std::to_string(g.seed) + " conflicts with seed " +
                       std::to_string(kv.seed()) + " in " + a.config);
    }
    d = demo_settings_from(kv, d);
  }
  if (a.model != "all" || d.model.empty()) d.model = a.model;
  if (d.model != "all") (void)parse_demo_model(d.model);
  if (a.seeds) d.seeds = *a.seeds;
  if (a.epochs) d.train.epochs = *a.epochs;
  if (d.seeds < 1) throw UsageError("demo: --seeds must be >= 1");
  return use_f32(g, "f32") ? run_demos<float>(d, a.save_params, g.out)
                           : run_demos<double>(d, a.save_params, g.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TAdaConv operator library: verification suites, cost reports and a synthetic demo"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "base random seed")->each([&g](const std::string&) { g.seed_given = true; });
  app.add_option("--dtype", g.dtype, "scalar type (default f64; demo defaults to f32)")
      ->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--cases", g.cases, "number of randomized cases")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "write a comma-separated report here");

  double fault_beta = 0.0;
  auto* eq = app.add_subcommand("equivalence", "oracle suite: temporal conv rewrite, identity init, materialized kernels");
  eq->add_option("--fault-beta", fault_beta, "corrupt beta on one side by this offset (negative control)");

  std::size_t block_every = 5;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks (f64)");
  gc->add_option("--block-every", block_every, "check a full bottleneck every n-th case; 0 disables");

  CostArgs ca;
  auto* cc = app.add_subcommand("cost", "FLOPs / parameter report for a preset, a spec file or one operator");
  cc->add_option("target", ca.target, "preset name, spec file, or 'op'")->required();
  cc->add_option("--compare", ca.compare, "baseline preset or spec file for a delta report");
  cc->add_option("--convention", ca.convention, "global-full (default) or global-reduced");
  cc->add_option("--kind", ca.kind, "operator kind for 'op'");
  cc->add_option("--ci", ca.ci);
  cc->add_option("--co", ca.co);
  cc->add_option("--kernel", ca.k, "spatial kernel size");
  cc->add_option("--kernel-t", ca.kt, "temporal kernel size");
  cc->add_option("--frames", ca.t);
  cc->add_option("--height", ca.h);
  cc->add_option("--width", ca.w);
  cc->add_option("--reduction", ca.r, "generator reduction ratio");

  DemoArgs da;
  auto* dm = app.add_subcommand("demo", "train on the synthetic temporal-order task");
  dm->add_option("--model", da.model, "all, tada, static or tada_no_context");
  dm->add_option("--config", da.config, "key = value file (seed is mandatory)");
  dm->add_option("--seeds", da.seeds, "number of consecutive seeds");
  dm->add_option("--epochs", da.epochs, "epoch cap");
  dm->add_option("--save-params", da.save_params, "dump trained parameters here");

  for (auto* sub : {eq, gc, cc, dm}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kBadInput;
  }

  try {
    if (*eq) return cmd_equivalence(g, fault_beta);
    if (*gc) return cmd_gradcheck(g, block_every);
    if (*cc) return cmd_cost(g, ca);
    if (*dm) return cmd_demo(g, da);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kBadInput;
}
