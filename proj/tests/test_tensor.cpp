#include <cmath>
#include <functional>

#include "doctest.h"

#include "bevnav/rng.hpp"
#include "bevnav/tensor.hpp"

using namespace bevnav;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Central-difference check of d(scalar fn)/d(leaf) against the backward pass.
void check_gradient(const std::vector<int>& shape, Rng& rng,
                    const std::function<Tensor<double>(const Tensor<double>&)>& fn,
                    double tol = 1e-7) {
  size_t total = 1;
  for (int d : shape) total *= static_cast<size_t>(d);
  std::vector<double> base = random_vec(rng, total);

  Tensor<double> leaf = Tensor<double>::leaf(shape, base, true);
  Tensor<double> out = fn(leaf);
  out.backward();

  const double eps = 1e-6;
  for (size_t i = 0; i < total; ++i) {
    auto eval = [&](double delta) {
      std::vector<double> v = base;
      v[i] += delta;
      return fn(Tensor<double>::leaf(shape, v, false)).item();
    };
    const double numeric = (eval(eps) - eval(-eps)) / (2 * eps);
    const double analytic = leaf.grad()[i];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    CHECK(std::abs(numeric - analytic) / denom < tol);
  }
}

// Weighted sum against fixed coefficients turns any tensor into a scalar
// whose gradient exercises every element.
Tensor<double> spread(const Tensor<double>& x, Rng& rng) {
  std::vector<double> w = random_vec(rng, x.size());
  Tensor<double> coeff = Tensor<double>::constant(x.shape(), std::move(w));
  return scale(mean_all(mul(x, coeff)), 3.0);
}

}  // namespace

TEST_CASE("autodiff: elementwise ops match finite differences") {
  Rng rng(1);
  Rng coef(2);
  check_gradient({3, 4}, rng, [&](const Tensor<double>& x) {
    Rng c(7);
    return spread(tanh_t(x), c);
  });
  check_gradient({3, 4}, rng, [&](const Tensor<double>& x) {
    Rng c(8);
    return spread(sigmoid_t(x), c);
  });
  check_gradient({10}, rng, [&](const Tensor<double>& x) {
    Rng c(9);
    return spread(softmax1d(x), c);
  });
  check_gradient({2, 5}, rng, [&](const Tensor<double>& x) {
    Rng c(10);
    return spread(rsub_scalar(1.0, x), c);
  });
  (void)coef;
}

TEST_CASE("autodiff: reused nodes accumulate gradients") {
  // y = mean(x*x + x); dy/dx_i = (2 x_i + 1) / n
  Tensor<double> x = Tensor<double>::leaf({3}, {0.5, -1.0, 2.0}, true);
  Tensor<double> y = mean_all(add(mul(x, x), x));
  y.backward();
  CHECK(y.item() == doctest::Approx((0.75 + 0.0 + 6.0) / 3.0));
  CHECK(x.grad()[0] == doctest::Approx(2.0 / 3.0));
  CHECK(x.grad()[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(x.grad()[2] == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("autodiff: matmul forward and gradients") {
  Tensor<double> a = Tensor<double>::leaf({2, 2}, {1, 2, 3, 4}, false);
  Tensor<double> b = Tensor<double>::leaf({2, 2}, {5, 6, 7, 8}, false);
  const Tensor<double> c = matmul(a, b);
  CHECK(c.value() == std::vector<double>{19, 22, 43, 50});

  Rng rng(3);
  check_gradient({3, 4}, rng, [&](const Tensor<double>& x) {
    Rng c2(11);
    Tensor<double> w = Tensor<double>::constant({4, 2}, random_vec(c2, 8));
    Rng c3(12);
    return spread(matmul(x, w), c3);
  });
  check_gradient({4, 2}, rng, [&](const Tensor<double>& w) {
    Rng c2(13);
    Tensor<double> x = Tensor<double>::constant({3, 4}, random_vec(c2, 12));
    Rng c3(14);
    return spread(matmul(x, w), c3);
  });
}

TEST_CASE("autodiff: conv2d matches a naive direct convolution") {
  Rng rng(4);
  const int H = 5, W = 6, Ci = 3, Co = 2, k = 3, stride = 2, pad = 1;
  std::vector<double> xv = random_vec(rng, H * W * Ci);
  std::vector<double> wv = random_vec(rng, k * k * Ci * Co);
  std::vector<double> bv = random_vec(rng, Co);

  Tensor<double> x = Tensor<double>::constant({H, W, Ci}, xv);
  Tensor<double> w = Tensor<double>::constant({k, k, Ci, Co}, wv);
  Tensor<double> b = Tensor<double>::constant({Co}, bv);
  const Tensor<double> y = conv2d(x, w, b, stride, pad);

  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  REQUIRE(y.shape() == std::vector<int>{Ho, Wo, Co});
  for (int oh = 0; oh < Ho; ++oh) {
    for (int ow = 0; ow < Wo; ++ow) {
      for (int co = 0; co < Co; ++co) {
        double acc = bv[co];
        for (int kh = 0; kh < k; ++kh) {
          for (int kw = 0; kw < k; ++kw) {
            const int ih = oh * stride - pad + kh;
            const int iw = ow * stride - pad + kw;
            if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
            for (int ci = 0; ci < Ci; ++ci) {
              acc += xv[(ih * W + iw) * Ci + ci] * wv[((kh * k + kw) * Ci + ci) * Co + co];
            }
          }
        }
        CHECK(y.value()[(oh * Wo + ow) * Co + co] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("autodiff: conv2d gradients vs finite differences") {
  Rng rng(5);
  check_gradient({4, 4, 2}, rng, [&](const Tensor<double>& x) {
    Rng c2(21);
    Tensor<double> w = Tensor<double>::constant({3, 3, 2, 2}, random_vec(c2, 36));
    Tensor<double> b = Tensor<double>::constant({2}, random_vec(c2, 2));
    Rng c3(22);
    return spread(conv2d(x, w, b, 1, 1), c3);
  });
  check_gradient({3, 3, 2, 2}, rng, [&](const Tensor<double>& w) {
    Rng c2(23);
    Tensor<double> x = Tensor<double>::constant({4, 4, 2}, random_vec(c2, 32));
    Tensor<double> b = Tensor<double>::constant({2}, random_vec(c2, 2));
    Rng c3(24);
    return spread(conv2d(x, w, b, 2, 1), c3);
  });
  check_gradient({2}, rng, [&](const Tensor<double>& b) {
    Rng c2(25);
    Tensor<double> x = Tensor<double>::constant({4, 4, 2}, random_vec(c2, 32));
    Tensor<double> w = Tensor<double>::constant({3, 3, 2, 2}, random_vec(c2, 36));
    Rng c3(26);
    return spread(conv2d(x, w, b, 1, 1), c3);
  });
}

TEST_CASE("autodiff: transposed conv shapes, values and gradients") {
  // A one-hot input paints exactly its 2x2 kernel block.
  Tensor<double> x = Tensor<double>::leaf({2, 2, 1}, {1, 0, 0, 0}, false);
  Tensor<double> w = Tensor<double>::leaf({2, 2, 1, 1}, {1, 2, 3, 4}, false);
  Tensor<double> b = Tensor<double>::leaf({1}, {0}, false);
  const Tensor<double> y = conv_transpose2x2(x, w, b);
  REQUIRE(y.shape() == std::vector<int>{4, 4, 1});
  CHECK(y.value()[0] == 1);   // (0,0)
  CHECK(y.value()[1] == 2);   // (0,1)
  CHECK(y.value()[4] == 3);   // (1,0)
  CHECK(y.value()[5] == 4);   // (1,1)
  CHECK(y.value()[10] == 0);

  Rng rng(6);
  check_gradient({3, 3, 2}, rng, [&](const Tensor<double>& xx) {
    Rng c2(31);
    Tensor<double> ww = Tensor<double>::constant({2, 2, 2, 3}, random_vec(c2, 24));
    Tensor<double> bb = Tensor<double>::constant({3}, random_vec(c2, 3));
    Rng c3(32);
    return spread(conv_transpose2x2(xx, ww, bb), c3);
  });
  check_gradient({2, 2, 2, 3}, rng, [&](const Tensor<double>& ww) {
    Rng c2(33);
    Tensor<double> xx = Tensor<double>::constant({3, 3, 2}, random_vec(c2, 18));
    Tensor<double> bb = Tensor<double>::constant({3}, random_vec(c2, 3));
    Rng c3(34);
    return spread(conv_transpose2x2(xx, ww, bb), c3);
  });
}

TEST_CASE("autodiff: concat, gate broadcast and row stacking") {
  Rng rng(7);
  check_gradient({2, 3, 2}, rng, [&](const Tensor<double>& x) {
    Rng c2(41);
    Tensor<double> other = Tensor<double>::constant({2, 3, 1}, random_vec(c2, 6));
    Rng c3(42);
    return spread(concat_channels<double>({x, other}), c3);
  });
  check_gradient({2, 3, 1}, rng, [&](const Tensor<double>& g) {
    Rng c2(43);
    Tensor<double> x = Tensor<double>::constant({2, 3, 4}, random_vec(c2, 24));
    Rng c3(44);
    return spread(mul_gate(x, g), c3);
  });
  check_gradient({2, 3, 4}, rng, [&](const Tensor<double>& x) {
    Rng c2(45);
    Tensor<double> g = Tensor<double>::constant({2, 3, 1}, random_vec(c2, 6));
    Rng c3(46);
    return spread(mul_gate(x, g), c3);
  });
  check_gradient({2, 4}, rng, [&](const Tensor<double>& x) {
    Rng c2(47);
    Tensor<double> other = Tensor<double>::constant({3, 4}, random_vec(c2, 12));
    Rng c3(48);
    return spread(concat_rows<double>({x, other}), c3);
  });
}

TEST_CASE("autodiff: embedding mean and masked row replacement") {
  Rng rng(8);
  const std::vector<int> ids = {0, 2, 2};
  check_gradient({4, 3}, rng, [&](const Tensor<double>& table) {
    Rng c(51);
    return spread(reshape(embed_mean(table, ids), {1, 3}), c);
  });

  const std::vector<uint8_t> valid = {1, 0, 1};
  check_gradient({3, 4}, rng, [&](const Tensor<double>& x) {
    Rng c2(52);
    Tensor<double> rep = Tensor<double>::constant({4}, random_vec(c2, 4));
    Rng c3(53);
    return spread(mask_rows_replace(x, valid, rep), c3);
  });
  check_gradient({4}, rng, [&](const Tensor<double>& rep) {
    Rng c2(54);
    Tensor<double> x = Tensor<double>::constant({3, 4}, random_vec(c2, 12));
    Rng c3(55);
    return spread(mask_rows_replace(x, valid, rep), c3);
  });
}

TEST_CASE("autodiff: scatter-mean pooling forward and backward") {
  // Tokens 0 and 1 pool into cell 0 (mean of two), token 1 alone into cell 3.
  const std::vector<std::pair<int, int>> pairs = {{0, 0}, {1, 0}, {1, 3}};
  const std::vector<float> counts = {2, 0, 0, 1};
  Tensor<double> tokens = Tensor<double>::leaf({2, 2}, {1, 2, 3, 4}, false);
  const Tensor<double> pooled = scatter_mean_pool(tokens, pairs, counts, 2, 2);
  REQUIRE(pooled.shape() == std::vector<int>{2, 2, 2});
  CHECK(pooled.value()[0] == doctest::Approx(2.0));  // (1+3)/2
  CHECK(pooled.value()[1] == doctest::Approx(3.0));  // (2+4)/2
  CHECK(pooled.value()[6] == doctest::Approx(3.0));
  CHECK(pooled.value()[7] == doctest::Approx(4.0));
  CHECK(pooled.value()[2] == 0.0);

  Rng rng(9);
  check_gradient({2, 2}, rng, [&](const Tensor<double>& t) {
    Rng c(61);
    return spread(scatter_mean_pool(t, pairs, counts, 2, 2), c);
  });
}

TEST_CASE("bce with logits: analytic values and closed-form gradient") {
  // All-zero logits give ln 2 regardless of the mask.
  std::vector<float> mask = {1, 0, 0, 1, 0, 0, 0, 0};
  Tensor<double> zero = Tensor<double>::zeros({8}, true);
  const Tensor<double> l0 = bce_with_logits_mean(zero, mask);
  CHECK(std::abs(l0.item() - std::log(2.0)) < 1e-12);

  // Saturated correct logits drive the loss to ~0.
  std::vector<double> sat(8);
  for (int i = 0; i < 8; ++i) sat[i] = mask[i] > 0 ? 40.0 : -40.0;
  const Tensor<double> lsat =
      bce_with_logits_mean(Tensor<double>::leaf({8}, sat, false), mask);
  CHECK(lsat.item() < 1e-12);

  // Cellwise gradient equals (sigmoid(l) - y) / n.
  Rng rng(10);
  std::vector<double> logits = random_vec(rng, 8, -3, 3);
  Tensor<double> leaf = Tensor<double>::leaf({8}, logits, true);
  const Tensor<double> loss = bce_with_logits_mean(leaf, mask);
  loss.backward();
  for (int i = 0; i < 8; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-logits[i]));
    CHECK(std::abs(leaf.grad()[i] - (s - mask[i]) / 8.0) < 1e-9);
  }

  check_gradient({8}, rng, [&](const Tensor<double>& x) {
    return scale(bce_with_logits_mean(x, mask, 2.5), 1.0);
  });
}

TEST_CASE("softmax cross entropy: uniform logits and gradients") {
  Tensor<double> logits = Tensor<double>::zeros({8}, true);
  const Tensor<double> loss = softmax_cross_entropy(logits, 3);
  CHECK(loss.item() == doctest::Approx(std::log(8.0)).epsilon(1e-12));

  Rng rng(11);
  check_gradient({5}, rng, [&](const Tensor<double>& x) {
    return scale(softmax_cross_entropy(x, 2), 2.0);
  });
}
