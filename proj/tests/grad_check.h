// tests/grad_check.h

// Copyright 2026  The usvs Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef USVS_TESTS_GRAD_CHECK_H_
#define USVS_TESTS_GRAD_CHECK_H_

#include <functional>

#include <torch/torch.h>

namespace usvs::testing {

using TensorFn = std::function<torch::Tensor(const torch::Tensor &)>;

// w^T J via autograd, x is double.
inline torch::Tensor AnalyticVjp(const TensorFn &f, const torch::Tensor &x, const torch::Tensor &w) {
  torch::Tensor xi = x.detach().clone().set_requires_grad(true);
  torch::Tensor y = f(xi);
  auto g = torch::autograd::grad({y}, {xi}, {w}, /*retain_graph=*/false, /*create_graph=*/false,
                                 /*allow_unused=*/true)[0];
  return g.defined() ? g.detach() : torch::zeros_like(x);
}

// Central differences of <w, f(x)>, one coordinate at a time. If `coords` is
// positive only that many evenly spaced coordinates are probed and the rest
// of the result is copied from `fill`.
inline torch::Tensor NumericVjp(const TensorFn &f, const torch::Tensor &x, const torch::Tensor &w, double eps,
                                long coords = 0, const torch::Tensor &fill = {}) {
  torch::NoGradGuard no_grad;
  torch::Tensor xf = x.detach().clone().contiguous();
  torch::Tensor out = fill.defined() ? fill.clone().contiguous() : torch::zeros_like(xf);
  auto *px = xf.data_ptr<double>();
  auto *po = out.data_ptr<double>();
  const long n = xf.numel();
  const long step = coords > 0 ? std::max(1L, n / coords) : 1;
  for (long i = 0; i < n; i += step) {
    const double orig = px[i];
    px[i] = orig + eps;
    const double up = (f(xf) * w).sum().item<double>();
    px[i] = orig - eps;
    const double down = (f(xf) * w).sum().item<double>();
    px[i] = orig;
    po[i] = (up - down) / (2 * eps);
  }
  return out;
}

inline double RelError(const torch::Tensor &a, const torch::Tensor &b) {
  const double denom = std::max(b.norm().item<double>(), 1e-12);
  return (a - b).norm().item<double>() / denom;
}

}  // namespace usvs::testing

#endif  // USVS_TESTS_GRAD_CHECK_H_
