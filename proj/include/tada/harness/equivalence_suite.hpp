#pragma once

// Randomized oracle suite: the temporal-conv rewrite, identity
// initialization, and the calibrated operator against a materialized
// per-frame kernel.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tada/baseline/equivalence.hpp"
#include "tada/core/random.hpp"
#include "tada/harness/oracle.hpp"
#include "tada/harness/suite.hpp"
#include "tada/tadaconv/tadaconv.hpp"

namespace tada::harness {

struct EquivalenceSuiteOptions {
  std::uint64_t seed = 0;
  std::size_t cases = 100;
  /// Added to beta on the rewritten side of the temporal-conv check; any
  /// nonzero value must make the suite fail.
  double beta_fault = 0.0;
};

/// Independent stream per (seed, case, lane) so cases can be replayed alone.
inline Rng case_rng(std::uint64_t seed, std::size_t index, std::uint64_t lane) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(lane)};
  return Rng(seq);
}

template <class T>
constexpr double equivalence_tolerance() {
  return sizeof(T) >= 8 ? 1e-10 : 1e-4;
}

/// Every (generator form, calibration dim, global descriptor) combination.
inline std::vector<TAdaConvConfig> config_grid() {
  std::vector<TAdaConvConfig> out;
  for (auto form : {GeneratorForm::nonlinear, GeneratorForm::linear})
    for (auto dim : {CalibrationDim::cin, CalibrationDim::cout, CalibrationDim::cin_x_cout,
                     CalibrationDim::kspatial})
      for (bool global : {true, false}) {
        TAdaConvConfig c;
        c.generator = form;
        c.calibration_dim = dim;
        c.use_global = global;
        out.push_back(c);
      }
  return out;
}

namespace detail {

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return uniform_index(rng, lo, hi); }

/// A config from the grid with the remaining knobs drawn at random.
inline TAdaConvConfig draw_config(Rng& rng, std::size_t index, bool identity) {
  const auto grid = config_grid();
  TAdaConvConfig c = grid[index % grid.size()];
  c.temporally_varying = pick(rng, 0, 3) != 0;
  c.k1 = pick(rng, 0, 1) ? 3 : 1;
  c.k2 = pick(rng, 0, 1) ? 3 : 1;
  c.calibrated_fraction = pick(rng, 0, 2) == 0 ? Fraction{1, 2} : Fraction{1, 1};
  c.identity_init = identity;
  return c;
}

template <class T>
double temporal_conv_case(Rng& rng, std::size_t index, double fault) {
  const std::size_t n = pick(rng, 1, 2), ci = pick(rng, 1, 4), co = pick(rng, 1, 4);
  const std::size_t t = pick(rng, 1, 6), h = pick(rng, 3, 7), w = pick(rng, 3, 7);
  const std::size_t k = pick(rng, 0, 1) ? 3 : 1, kt = 2 * pick(rng, 0, 2) + 1;
  const auto x = random_normal<T>({n, ci, t, h, w}, rng);
  const auto ws = random_normal<T>({co, ci, k, k}, rng);
  const auto beta = random_normal<T>({co, kt}, rng);
  EquivalenceOptions opts;
  opts.with_activation = index % 2 == 0;
  opts.beta_fault = fault;
  return static_cast<double>(temporal_conv_equivalence_oracle(x, ws, beta, opts).max_abs_diff);
}

template <class T>
double identity_case(Rng& rng, std::size_t index) {
  const TAdaConvConfig cfg = draw_config(rng, index, true);
  const std::size_t n = pick(rng, 1, 2), ci = pick(rng, 4, 8), co = pick(rng, 1, 6);
  const std::size_t t = pick(rng, 1, 5), h = pick(rng, 3, 7), w = pick(rng, 3, 7);
  const std::size_t stride = pick(rng, 1, 2);
  TAdaConv2d<T> layer("case", ci, co, 3, stride, 1, cfg, t, rng);
  const auto x = random_normal<T>({n, ci, t, h, w}, rng);
  Tape<T> tape;
  Var<T> xv = tape.constant(x);
  const auto y = layer.forward(xv, Mode::train).value();
  const auto ref = conv2d_per_frame(xv, tape.constant(layer.weight.value), stride, 1).value();
  return static_cast<double>(max_abs_diff(y, ref));
}

template <class T>
double materialized_case(Rng& rng, std::size_t index) {
  const TAdaConvConfig cfg = draw_config(rng, index / 2, false);
  const std::size_t n = pick(rng, 1, 2), ci = pick(rng, 4, 8), co = pick(rng, 1, 6);
  const std::size_t t = pick(rng, 1, 5), h = pick(rng, 3, 7), w = pick(rng, 3, 7);
  const std::size_t k = pick(rng, 0, 1) ? 3 : 1, stride = pick(rng, 1, 2), pad = (k - 1) / 2;
  TAdaConv2d<T> layer("case", ci, co, k, stride, pad, cfg, t, rng);
  const auto x = random_normal<T>({n, ci, t, h, w}, rng);
  Tape<T> tape;
  Var<T> xv = tape.constant(x);
  const auto calib = layer.calibration(xv, Mode::eval);
  const auto y = layer.forward(xv, Mode::eval).value();
  const auto ref = materialized_tadaconv(x, layer.weight.value, calib.alpha.value(), cfg.calibration_dim,
                                         cfg.calibrated_channels(ci), stride, pad);
  return static_cast<double>(max_abs_diff(y, ref));
}

}  // namespace detail

/// Runs the three oracle families `cases` times each. The first result is
/// the combined verdict, followed by one result per family.
template <class T>
std::vector<SuiteResult> run_equivalence(const EquivalenceSuiteOptions& opts) {
  if (opts.cases < 1) throw UsageError("equivalence: cases must be >= 1");
  const double tol = equivalence_tolerance<T>();
  Stopwatch clock;
  SuiteResult temporal("temporal-conv-rewrite", tol), identity("identity-init", tol),
      material("materialized-kernel", tol);
  for (std::size_t i = 0; i < opts.cases; ++i) {
    const std::string id = "case " + std::to_string(i);
    Rng r0 = case_rng(opts.seed, i, 0), r1 = case_rng(opts.seed, i, 1), r2 = case_rng(opts.seed, i, 2);
    Stopwatch lap;
    temporal.record(id + (i % 2 == 0 ? " (relu mask)" : " (linear)"),
                    detail::temporal_conv_case<T>(r0, i, opts.beta_fault));
    temporal.seconds += lap.seconds();
    lap = Stopwatch();
    identity.record(id, detail::identity_case<T>(r1, i));
    identity.seconds += lap.seconds();
    lap = Stopwatch();
    material.record(id, detail::materialized_case<T>(r2, i));
    material.seconds += lap.seconds();
  }
  SuiteResult all("equivalence", tol);
  for (auto* r : {&temporal, &identity, &material}) all.merge(*r);
  all.seconds = clock.seconds();
  return {all, temporal, identity, material};
}

}  // namespace tada::harness
