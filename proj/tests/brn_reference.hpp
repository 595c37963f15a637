#pragma once

#include <vector>

#include "wmbind/brn.hpp"

namespace brn_reference {

// Straight-loop evaluator over a dense weight matrix, built independently
// from the CSR layout by walking every (j, i) pair.
struct DenseRef {
  std::size_t n;
  double f;
  std::vector<double> w;  // w[j * n + i]

  explicit DenseRef(const wmbind::BrnNet& net) : n(net.n), f(net.forget_rate), w(net.n * net.n, 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      auto src = net.sources_of(j);
      auto wt = net.weights_of(j);
      for (std::size_t e = 0; e < src.size(); ++e) w[j * n + src[e]] = wt[e];
    }
  }

  std::vector<double> step(const std::vector<double>& p, const std::vector<double>& in) const {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (w[j * n + i] != 0.0) s += w[j * n + i] * p[i];
      double v = f * (in[j] + s);
      out[j] = v > 0.0 ? v : 0.0;
    }
    return out;
  }
};

}  // namespace brn_reference
