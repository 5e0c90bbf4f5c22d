#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <variant>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percept/error.hpp"
#include "percept/models.hpp"
#include "percept/network.hpp"
#include "percept/rng.hpp"
#include "percept/tensor.hpp"

namespace percept::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PERCEPT_FIXTURE_DIR) / name;
}

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(PERCEPT_GOLDEN_DIR) / name;
}

// Compares `bytes` with tests/golden/<name>. With PERCEPT_UPDATE_GOLDEN set the
// file is rewritten instead and the comparison passes.
inline bool matches_golden(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const auto path = golden(name);
  if (const char* update = std::getenv("PERCEPT_UPDATE_GOLDEN"); update != nullptr && *update != '\0') {
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  const std::vector<std::uint8_t> want((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return want == bytes;
}

// Error code thrown by `f`, empty when it returns normally.
inline std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Uniform(lo, hi) tensor from a seed.
inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Tensor t(shape);
  Rng rng(seed);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Text "t0 t1 ... t{d-1}" of distinct tokens.
inline std::string numbered_tokens(int d) {
  std::string s;
  for (int i = 0; i < d; ++i) s += (i ? " t" : "t") + std::to_string(i);
  return s;
}

// Two-class text predictor whose class-1 probability is `p(present)`, where
// present[i] says whether token "t<i>" occurs. Counts calls and rows.
struct CountingTextPredictor {
  int d;
  std::function<double(const std::vector<bool>&)> p;
  std::shared_ptr<int> calls = std::make_shared<int>(0);
  std::shared_ptr<int> rows = std::make_shared<int>(0);

  TextPredictor predictor() const {
    auto self = *this;
    return TextPredictor(
        [self](std::span<const std::string> texts) {
          ++*self.calls;
          *self.rows += static_cast<int>(texts.size());
          ProbMatrix out(static_cast<Eigen::Index>(texts.size()), 2);
          for (std::size_t r = 0; r < texts.size(); ++r) {
            std::vector<bool> present(static_cast<std::size_t>(self.d), false);
            for (const auto& tok : BowTextClassifier::tokenize(texts[r])) {
              if (tok.size() > 1 && tok[0] == 't') present[static_cast<std::size_t>(std::stoi(tok.substr(1)))] = true;
            }
            const double p1 = self.p(present);
            out(static_cast<Eigen::Index>(r), 0) = 1.0 - p1;
            out(static_cast<Eigen::Index>(r), 1) = p1;
          }
          return out;
        },
        2, {"off", "on"});
  }
};

// Plain scalar-loop forward pass in double precision, written against the
// layer parameters only. Returns the output of layer `upto`.
inline std::vector<double> oracle_output(const Network& net, const std::vector<double>& input, std::size_t upto) {
  std::vector<double> x = input;
  Shape shape = net.input_shape();
  for (std::size_t li = 0; li <= upto; ++li) {
    const Layer& layer = net.layers()[li];
    std::vector<double> y;
    if (const auto* c = std::get_if<Conv2d>(&layer.params)) {
      const int ci = shape[0], h = shape[1], w = shape[2];
      const int oh = (h + 2 * c->padding - c->kernel) / c->stride + 1;
      const int ow = (w + 2 * c->padding - c->kernel) / c->stride + 1;
      y.assign(static_cast<std::size_t>(c->out_channels) * oh * ow, 0.0);
      for (int o = 0; o < c->out_channels; ++o)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double acc = c->bias[static_cast<std::size_t>(o)];
            for (int i = 0; i < ci; ++i)
              for (int ky = 0; ky < c->kernel; ++ky)
                for (int kx = 0; kx < c->kernel; ++kx) {
                  const int iy = oy * c->stride + ky - c->padding, ix = ox * c->stride + kx - c->padding;
                  if (iy < 0 || ix < 0 || iy >= h || ix >= w) continue;
                  acc += c->weight(o, i, ky, kx) * x[(static_cast<std::size_t>(i) * h + iy) * w + ix];
                }
            y[(static_cast<std::size_t>(o) * oh + oy) * ow + ox] = acc;
          }
      shape = {c->out_channels, oh, ow};
    } else if (std::holds_alternative<Relu>(layer.params)) {
      y = x;
      for (auto& v : y) v = v > 0.0 ? v : 0.0;
    } else if (const auto* p = std::get_if<MaxPool2d>(&layer.params)) {
      const int ch = shape[0], h = shape[1], w = shape[2];
      const int oh = (h - p->kernel) / p->stride + 1, ow = (w - p->kernel) / p->stride + 1;
      y.assign(static_cast<std::size_t>(ch) * oh * ow, 0.0);
      for (int c = 0; c < ch; ++c)
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double m = -1e300;
            for (int ky = 0; ky < p->kernel; ++ky)
              for (int kx = 0; kx < p->kernel; ++kx)
                m = std::max(m, x[(static_cast<std::size_t>(c) * h + oy * p->stride + ky) * w + ox * p->stride + kx]);
            y[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] = m;
          }
      shape = {ch, oh, ow};
    } else if (std::holds_alternative<Flatten>(layer.params)) {
      y = x;
      shape = {static_cast<int>(y.size())};
    } else if (const auto* d = std::get_if<Dense>(&layer.params)) {
      y.assign(static_cast<std::size_t>(d->out_features), 0.0);
      for (int o = 0; o < d->out_features; ++o) {
        double acc = d->bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < d->in_features; ++i) acc += d->weight(o, i) * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = acc;
      }
      shape = {d->out_features};
    }
    x = std::move(y);
  }
  return x;
}

inline std::vector<double> oracle_logits(const Network& net, const std::vector<double>& input) {
  return oracle_output(net, input, net.logit_layer());
}

inline std::vector<double> to_double(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

// Shapley values of the game `table` (indexed by coalition bitmask) as the
// average marginal contribution over all d! player orders.
inline std::vector<double> shapley_by_permutations(const std::vector<double>& table, int d) {
  std::vector<int> order(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
  double count = 0.0;
  do {
    std::uint32_t mask = 0;
    for (int p : order) {
      phi[static_cast<std::size_t>(p)] += table[mask | (1u << p)] - table[mask];
      mask |= 1u << p;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

// Shapley values of the game `table` (indexed by coalition bitmask) from the
// subset formula phi_i = sum_S |S|!(d-|S|-1)!/d! (v(S+i) - v(S)).
inline std::vector<double> shapley_by_subsets(const std::vector<double>& table, int d) {
  std::vector<double> fact(static_cast<std::size_t>(d) + 1, 1.0);
  for (int i = 1; i <= d; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    const std::uint32_t bit = 1u << i;
    for (std::uint32_t s = 0; s < (1u << d); ++s) {
      if (s & bit) continue;
      const int k = __builtin_popcount(s);
      const double w = fact[static_cast<std::size_t>(k)] * fact[static_cast<std::size_t>(d - k - 1)] /
                       fact[static_cast<std::size_t>(d)];
      phi[static_cast<std::size_t>(i)] += w * (table[s | bit] - table[s]);
    }
  }
  return phi;
}

}  // namespace percept::testing
