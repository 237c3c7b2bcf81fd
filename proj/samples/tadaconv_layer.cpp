// One TAdaConv layer on a random clip: forward, per-frame calibration
// vectors, backward. Starts from the identity initialization, then perturbs
// the generator so the frames get different kernels.

#include <cmath>
#include <iomanip>
#include <iostream>

#include "tada/tada.hpp"

int main() {
  using namespace tada;
  Rng rng(2024);
  TAdaConvConfig cfg;  // non-linear generator, k1 = k2 = 3, global descriptor on
  TAdaConv2d<double> layer("layer", 8, 8, 3, 1, 1, cfg, 6, rng);
  const auto clip = random_normal<double>({1, 8, 6, 10, 10}, rng);

  {
    Tape<double> tape;
    auto x = tape.constant(clip);
    const auto y = layer.forward(x, Mode::eval).value();
    const auto ref = conv2d_per_frame(x, tape.constant(layer.weight.value), 1, 1).value();
    std::cout << "identity init, max |TAdaConv - plain conv| = " << max_abs_diff(y, ref) << "\n";
  }

  auto expand = layer.generator.expand.value.data();
  for (std::size_t i = 0; i < expand.size(); ++i) expand[i] = 0.2 * std::sin(static_cast<double>(i));

  Tape<double> tape;
  auto x = tape.constant(clip);
  const auto alpha = layer.calibration(x, Mode::eval).alpha.value();  // [N, D, T]
  std::cout << "calibration of input channel 0 per frame:";
  for (std::size_t t = 0; t < alpha.dim(2); ++t) std::cout << ' ' << std::fixed << std::setprecision(3) << alpha.at(0, 0, t);
  std::cout << '\n';

  auto loss = mean(layer.forward(x, Mode::train));
  tape.backward(loss);
  double norm = 0;
  for (auto g : layer.weight.grad.data()) norm += g * g;
  std::cout << "loss " << loss.value().data()[0] << ", |dL/dW_base|^2 = " << norm << '\n';
}
