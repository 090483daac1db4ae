#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "genesis/network.hpp"
#include "oracles.hpp"

using namespace genesis;

namespace {

ModelSpec tiny_spec(int bin_count = 64) {
  ModelSpec spec;
  spec.bin_count = bin_count;
  spec.conv_channels = {6, 6, 6, 6};
  spec.conv_kernels = {7, 7, 3, 3};
  spec.pool_window = 4;
  spec.pool_stride = 4;
  spec.fc_widths = {16, 16};
  return spec;
}

View random_view(int bins, int label, Rng& rng) {
  View v;
  v.bins.resize(bins);
  for (float& b : v.bins) b = static_cast<float>(rng.uniform(-1.0, 0.3));
  v.label = label;
  return v;
}

double loss_of(const GenesisModel& model, const View& v, int label) {
  ForwardCache cache;
  forward_view(model, v, false, nullptr, cache);
  return softmax_cross_entropy(cache.logits, label).loss;
}

// inference-mode oracle forward built only from the brute-force layer
// implementations
std::vector<double> oracle_logits(const GenesisModel& m, const View& view) {
  FeatureMap x;
  x.resize(1, static_cast<int>(view.bins.size()));
  for (std::size_t i = 0; i < view.bins.size(); ++i)
    x.values[i] = view.bins[i];
  auto relu = [](FeatureMap& f) {
    for (double& v : f.values) v = std::max(0.0, v);
  };
  FeatureMap a = oracle::conv1d(x, m.conv[0]);
  relu(a);
  a = oracle::conv1d(a, m.conv[1]);
  relu(a);
  a = oracle::maxpool(a, m.spec.pool_window, m.spec.pool_stride);
  a = oracle::conv1d(a, m.conv[2]);
  relu(a);
  a = oracle::conv1d(a, m.conv[3]);
  relu(a);
  std::vector<double> h = oracle::global_avg_pool(a);
  auto dense = [](const std::vector<double>& in, const DenseLayer& l) {
    std::vector<double> out(l.out_dim);
    for (int o = 0; o < l.out_dim; ++o) {
      out[o] = l.bias[o];
      for (int i = 0; i < l.in_dim; ++i)
        out[o] += l.weights[static_cast<std::size_t>(o) * l.in_dim + i] * in[i];
    }
    return out;
  };
  h = dense(h, m.fc[0]);
  for (double& v : h) v = std::max(0.0, v);
  h = dense(h, m.fc[1]);
  for (double& v : h) v = std::max(0.0, v);
  return dense(h, m.head);
}

}  // namespace

TEST_CASE("xavier bound and moments") {
  Rng rng(1);
  std::vector<double> values(1000);
  xavier_uniform_fill(values, 3, 3, rng);  // a = 1
  for (double v : values) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }

  std::vector<double> big(1000000);
  xavier_uniform_fill(big, 100, 100, rng);
  const double a = std::sqrt(6.0 / 200.0);
  double ss = 0.0;
  for (double v : big) ss += v * v;
  const double var = ss / big.size();
  CHECK(var == doctest::Approx(a * a / 3.0).epsilon(0.02));

  Rng r1(7), r2(7);
  std::vector<double> x1(64), x2(64);
  xavier_uniform_fill(x1, 10, 10, r1);
  xavier_uniform_fill(x2, 10, 10, r2);
  CHECK(x1 == x2);
}

TEST_CASE("conv identity kernel passes the input through") {
  ConvLayer layer;
  layer.resize(1, 1, 3);
  layer.weights = {0.0, 1.0, 0.0};
  FeatureMap x;
  x.resize(1, 10);
  Rng rng(2);
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  FeatureMap y;
  conv1d_forward(x, layer, y);
  for (int t = 0; t < 10; ++t) CHECK(y.at(0, t) == x.at(0, t));
}

TEST_CASE("conv hand case with zero padding at the edges") {
  ConvLayer layer;
  layer.resize(1, 1, 3);
  layer.weights = {1.0, 1.0, 1.0};
  FeatureMap x;
  x.resize(1, 3);
  x.values = {1.0, 2.0, 3.0};
  FeatureMap y;
  conv1d_forward(x, layer, y);
  CHECK(y.at(0, 0) == 3.0);
  CHECK(y.at(0, 1) == 6.0);
  CHECK(y.at(0, 2) == 5.0);
}

TEST_CASE("conv matches the triple-loop oracle on random shapes") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const int in_ch = 1 + static_cast<int>(rng.uniform_below(6));
    const int out_ch = 1 + static_cast<int>(rng.uniform_below(8));
    const int k = 1 + static_cast<int>(rng.uniform_below(12));
    const int len = std::max(k, 5 + static_cast<int>(rng.uniform_below(60)));
    ConvLayer layer;
    layer.resize(in_ch, out_ch, k);
    for (double& w : layer.weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : layer.bias) b = rng.uniform(-1.0, 1.0);
    FeatureMap x;
    x.resize(in_ch, len);
    for (double& v : x.values) v = rng.uniform(-1.0, 1.0);

    FeatureMap y;
    conv1d_forward(x, layer, y);
    const FeatureMap ref = oracle::conv1d(x, layer);
    for (std::size_t i = 0; i < ref.values.size(); ++i)
      CHECK(std::fabs(y.values[i] - ref.values[i]) < 1e-12);
  }
}

TEST_CASE("conv rejects mismatched channels") {
  ConvLayer layer;
  layer.resize(2, 3, 5);
  FeatureMap x;
  x.resize(4, 20);
  FeatureMap y;
  CHECK_THROWS_AS(conv1d_forward(x, layer, y), std::invalid_argument);
}

TEST_CASE("fft conv path equals the direct path") {
  Rng rng(13);
  ConvLayer layer;
  layer.resize(24, 24, 21);
  for (double& w : layer.weights) w = rng.uniform(-1.0, 1.0);
  for (double& b : layer.bias) b = rng.uniform(-1.0, 1.0);
  FeatureMap x;
  x.resize(24, 900);
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  REQUIRE(FftConvWorkspace::accelerates(layer, x.length));

  FeatureMap y_direct, y_fft;
  conv1d_forward(x, layer, y_direct);
  FftConvWorkspace ws;
  conv1d_forward(x, layer, y_fft, &ws, 0);
  double scale = 1.0;
  for (double v : y_direct.values) scale = std::max(scale, std::fabs(v));
  for (std::size_t i = 0; i < y_direct.values.size(); ++i)
    CHECK(std::fabs(y_direct.values[i] - y_fft.values[i]) < 1e-12 * scale);

  FeatureMap dy;
  dy.resize(24, 900);
  for (double& v : dy.values) v = rng.uniform(-1.0, 1.0);
  std::vector<double> dw1(layer.weights.size(), 0.0), db1(24, 0.0);
  std::vector<double> dw2(layer.weights.size(), 0.0), db2(24, 0.0);
  FeatureMap dx1, dx2;
  conv1d_backward(x, layer, dy, dw1, db1, &dx1);
  conv1d_backward(x, layer, dy, dw2, db2, &dx2, &ws, 0);
  for (std::size_t i = 0; i < dx1.values.size(); ++i)
    CHECK(std::fabs(dx1.values[i] - dx2.values[i]) < 1e-11);
  CHECK(dw1 == dw2);  // weight gradients share the direct path
}

TEST_CASE("maxpool covers the window arithmetic") {
  FeatureMap x;
  x.resize(1, 64);
  Rng rng(4);
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  FeatureMap y;
  maxpool_forward(x, 32, 32, y);
  REQUIRE(y.length == 2);
  CHECK(y.at(0, 0) ==
        *std::max_element(x.values.begin(), x.values.begin() + 32));
  CHECK(y.at(0, 1) == *std::max_element(x.values.begin() + 32, x.values.end()));

  FeatureMap wide;
  wide.resize(1, 2001);
  for (double& v : wide.values) v = rng.uniform(-1.0, 1.0);
  maxpool_forward(wide, 32, 32, y);
  CHECK(y.length == 62);  // trailing 17 samples dropped

  FeatureMap flat;
  flat.resize(2, 100);
  std::fill(flat.values.begin(), flat.values.end(), 0.25);
  maxpool_forward(flat, 32, 32, y);
  for (double v : y.values) CHECK(v == 0.25);

  FeatureMap tiny;
  tiny.resize(1, 10);
  CHECK_THROWS_AS(maxpool_forward(tiny, 32, 32, y), std::invalid_argument);
}

TEST_CASE("maxpool matches the oracle and routes gradient to first max") {
  Rng rng(5);
  FeatureMap x;
  x.resize(3, 77);
  for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
  FeatureMap y;
  std::vector<int> argmax;
  maxpool_forward(x, 8, 8, y, &argmax);
  const FeatureMap ref = oracle::maxpool(x, 8, 8);
  CHECK(y.values == ref.values);

  // tie-breaking: equal values in one window send gradient to the first
  FeatureMap ties;
  ties.resize(1, 8);
  std::fill(ties.values.begin(), ties.values.end(), 1.0);
  maxpool_forward(ties, 4, 4, y, &argmax);
  CHECK(argmax[0] == 0);
  CHECK(argmax[1] == 4);
  FeatureMap dy;
  dy.resize(1, 2);
  dy.values = {2.0, 3.0};
  FeatureMap dx;
  dx.resize(1, 8);
  maxpool_backward(dy, argmax, dx);
  CHECK(dx.values == std::vector<double>{2, 0, 0, 0, 3, 0, 0, 0});
}

TEST_CASE("global average pool and its backward") {
  FeatureMap x;
  x.resize(1, 2);
  x.values = {1.0, 3.0};
  CHECK(global_avg_pool(x)[0] == 2.0);

  FeatureMap c;
  c.resize(4, 9);
  std::fill(c.values.begin(), c.values.end(), -0.75);
  for (double v : global_avg_pool(c)) CHECK(v == -0.75);

  Rng rng(6);
  FeatureMap r;
  r.resize(64, 59);
  for (double& v : r.values) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> mine = global_avg_pool(r);
  const std::vector<double> ref = oracle::global_avg_pool(r);
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(mine[i] - ref[i]) < 1e-14);

  std::vector<double> dpool = {6.0};
  FeatureMap dx;
  dx.resize(1, 3);
  global_avg_pool_backward(dpool, dx);
  CHECK(dx.values == std::vector<double>{2, 2, 2});
}

TEST_CASE("relu and dropout behavior") {
  std::vector<double> x = {-1.0, 0.0, 2.0};
  relu_inplace(x);
  CHECK(x == std::vector<double>{0.0, 0.0, 2.0});

  std::vector<double> in(1000000, 1.0), out(in.size()), mask(in.size());
  dropout_forward(in, 0.25, false, nullptr, out, mask);
  CHECK(out == in);  // inference is the identity

  Rng rng(8);
  dropout_forward(in, 0.25, true, &rng, out, mask);
  std::size_t zeros = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    zeros += out[i] == 0.0 ? 1 : 0;
    mean += out[i];
  }
  mean /= out.size();
  const double zero_frac = static_cast<double>(zeros) / out.size();
  CHECK(zero_frac > 0.2485);
  CHECK(zero_frac < 0.2515);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("softmax cross-entropy hand values and stability") {
  const SoftmaxLoss even = softmax_cross_entropy(std::vector<double>{0, 0}, 0);
  CHECK(even.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const SoftmaxLoss big =
      softmax_cross_entropy(std::vector<double>{1000.0, 0.0}, 0);
  CHECK(std::isfinite(big.loss));
  CHECK(big.loss == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const double span = trial < 15 ? 5.0 : 1e4;
    std::vector<double> logits = {rng.uniform(-span, span),
                                  rng.uniform(-span, span)};
    const int label = static_cast<int>(rng.uniform_below(2));
    const SoftmaxLoss sl = softmax_cross_entropy(logits, label);
    CHECK(sl.probs[0] >= 0.0);
    CHECK(sl.probs[1] >= 0.0);
    CHECK(std::fabs(sl.probs[0] + sl.probs[1] - 1.0) < 1e-12);
  }

  // gradient against central differences on moderate logits
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> logits = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const int label = static_cast<int>(rng.uniform_below(2));
    const SoftmaxLoss sl = softmax_cross_entropy(logits, label);
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-6;
      std::vector<double> lp = logits, lm = logits;
      lp[j] += h;
      lm[j] -= h;
      const double fd = (softmax_cross_entropy(lp, label).loss -
                         softmax_cross_entropy(lm, label).loss) /
                        (2 * h);
      CHECK(sl.dlogits[j] ==
            doctest::Approx(fd).epsilon(1e-6).scale(std::fabs(fd) + 1.0));
    }
  }
}

TEST_CASE("forward on a zero model is the uniform distribution") {
  GenesisModel model = GenesisModel::make(tiny_spec());
  View v;
  v.bins.assign(64, 0.0f);
  ForwardCache cache;
  const std::vector<double> probs =
      forward_view(model, v, false, nullptr, cache);
  CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("forward probabilities are a distribution") {
  Rng rng(10);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  ForwardCache cache;
  for (int trial = 0; trial < 10; ++trial) {
    const View v = random_view(64, 1, rng);
    const std::vector<double> probs =
        forward_view(model, v, false, nullptr, cache);
    CHECK(probs[0] >= 0.0);
    CHECK(probs[1] >= 0.0);
    CHECK(std::fabs(probs[0] + probs[1] - 1.0) < 1e-12);
  }
}

TEST_CASE("forward matches the composed layer oracle") {
  Rng rng(11);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  ForwardCache cache;
  for (int trial = 0; trial < 5; ++trial) {
    const View v = random_view(64, 0, rng);
    forward_view(model, v, false, nullptr, cache);
    const std::vector<double> ref = oracle_logits(model, v);
    for (int j = 0; j < 2; ++j)
      CHECK(cache.logits[j] == doctest::Approx(ref[j]).epsilon(1e-10));
  }
}

TEST_CASE("backward matches central finite differences everywhere") {
  Rng rng(12);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  const View v = random_view(64, 1, rng);
  const int label = 1;

  ForwardCache cache;
  forward_view(model, v, false, nullptr, cache);
  Gradients grads = Gradients::zeros_like(model);
  backward(model, cache, label, grads);

  const auto params = model.params();
  std::size_t total = 0, good = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double theta = params[t][i];
      const double h = 1e-5 * std::max(1.0, std::fabs(theta));
      params[t][i] = theta + h;
      const double lp = loss_of(model, v, label);
      params[t][i] = theta - h;
      const double lm = loss_of(model, v, label);
      params[t][i] = theta;
      const double fd = (lp - lm) / (2 * h);
      const double an = grads.tensors[t][i];
      const double rel =
          std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-6});
      ++total;
      if (rel < 1e-4) ++good;
    }
  }
  CHECK(total == model.param_count());
  CHECK(static_cast<double>(good) / static_cast<double>(total) >= 0.999);
}

TEST_CASE("backward in training mode reuses the recorded dropout mask") {
  Rng rng(14);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  const View v = random_view(64, 0, rng);

  // same dropout mask on every evaluation via a fresh generator per call
  const std::uint64_t mask_seed = 77;
  auto loss_with_mask = [&]() {
    Rng drop(mask_seed);
    ForwardCache cache;
    forward_view(model, v, true, &drop, cache);
    return softmax_cross_entropy(cache.logits, 0).loss;
  };

  Rng drop(mask_seed);
  ForwardCache cache;
  forward_view(model, v, true, &drop, cache);
  Gradients grads = Gradients::zeros_like(model);
  backward(model, cache, 0, grads);

  auto params = model.params();
  // spot check a few parameters from each tensor
  Rng pick(15);
  std::size_t good = 0, total = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (int probe = 0; probe < 3; ++probe) {
      const std::size_t i = pick.uniform_below(params[t].size());
      const double theta = params[t][i];
      const double h = 1e-5 * std::max(1.0, std::fabs(theta));
      params[t][i] = theta + h;
      const double lp = loss_with_mask();
      params[t][i] = theta - h;
      const double lm = loss_with_mask();
      params[t][i] = theta;
      const double fd = (lp - lm) / (2 * h);
      const double an = grads.tensors[t][i];
      const double rel =
          std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-6});
      ++total;
      if (rel < 1e-4) ++good;
    }
  }
  CHECK(good == total);
}

TEST_CASE("saturated correct prediction has a vanishing gradient") {
  Rng rng(16);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  model.head.bias[1] = 80.0;  // force p(label 1) -> 1
  const View v = random_view(64, 1, rng);
  ForwardCache cache;
  forward_view(model, v, false, nullptr, cache);
  REQUIRE(cache.probs[1] > 1.0 - 1e-12);
  Gradients grads = Gradients::zeros_like(model);
  backward(model, cache, 1, grads);
  double norm = 0.0;
  for (const auto& t : grads.tensors)
    for (double g : t) norm += g * g;
  CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("head bias gradient equals dlogits") {
  Rng rng(17);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  const View v = random_view(64, 0, rng);
  ForwardCache cache;
  forward_view(model, v, false, nullptr, cache);
  Gradients grads = Gradients::zeros_like(model);
  backward(model, cache, 0, grads);
  CHECK(grads.head_b()[0] == cache.probs[0] - 1.0);
  CHECK(grads.head_b()[1] == cache.probs[1]);
}

TEST_CASE("a tiny gradient step never increases the sample loss") {
  Rng rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    GenesisModel model = GenesisModel::make(tiny_spec());
    init_parameters(model, rng);
    const int label = static_cast<int>(rng.uniform_below(2));
    const View v = random_view(64, label, rng);
    ForwardCache cache;
    forward_view(model, v, false, nullptr, cache);
    const double before = softmax_cross_entropy(cache.logits, label).loss;
    Gradients grads = Gradients::zeros_like(model);
    backward(model, cache, label, grads);
    auto params = model.params();
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t i = 0; i < params[t].size(); ++i)
        params[t][i] -= 1e-6 * grads.tensors[t][i];
    forward_view(model, v, false, nullptr, cache);
    const double after = softmax_cross_entropy(cache.logits, label).loss;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("parameter count reproduces the reference architecture") {
  CHECK(GenesisModel::genesis(2001).param_count() == 389506);
  CHECK(GenesisModel::genesis(4002).param_count() == 389506);

  DenseLayer small;
  small.resize(3, 2);
  CHECK(small.param_count() == 8);

  // closed-form layer arithmetic
  const GenesisModel g = GenesisModel::genesis(2001);
  CHECK(g.conv[0].param_count() == 3264);
  CHECK(g.conv[1].param_count() == 204864);
  CHECK(g.conv[2].param_count() == 49216);
  CHECK(g.conv[3].param_count() == 49216);
  CHECK(g.fc[0].param_count() == 16640);
  CHECK(g.fc[1].param_count() == 65792);
  CHECK(g.head.param_count() == 514);
}

TEST_CASE("model file round trip is bitwise") {
  Rng rng(19);
  GenesisModel model = GenesisModel::make(tiny_spec(128));
  init_parameters(model, rng);
  const std::string path = "model_roundtrip.genm";
  save_model(path, model);
  const GenesisModel back = load_model(path);
  CHECK(back.spec.bin_count == model.spec.bin_count);
  CHECK(back.spec.pool_window == model.spec.pool_window);
  CHECK(back.spec.dropout_rate == model.spec.dropout_rate);
  const auto a = model.params();
  const auto b = back.params();
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].size() == b[t].size());
    for (std::size_t i = 0; i < a[t].size(); ++i) CHECK(a[t][i] == b[t][i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("model file rejects a wrong magic") {
  const std::string path = "model_bad.genm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "JUNKjunkjunkjunkjunk";
  }
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("not a model file"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("forward rejects a bin-count mismatch") {
  Rng rng(20);
  GenesisModel model = GenesisModel::make(tiny_spec(64));
  init_parameters(model, rng);
  const View v = random_view(128, 1, rng);
  ForwardCache cache;
  CHECK_THROWS_WITH_AS(forward_view(model, v, false, nullptr, cache),
                       doctest::Contains("bin count mismatch"),
                       std::invalid_argument);
}

TEST_CASE("inference is deterministic, training randomness is seeded") {
  Rng rng(21);
  GenesisModel model = GenesisModel::make(tiny_spec());
  init_parameters(model, rng);
  const View v = random_view(64, 1, rng);
  ForwardCache c1, c2;
  const auto p1 = forward_view(model, v, false, nullptr, c1);
  const auto p2 = forward_view(model, v, false, nullptr, c2);
  CHECK(p1 == p2);

  Rng d1(5), d2(5), d3(6);
  ForwardCache t1, t2, t3;
  const auto q1 = forward_view(model, v, true, &d1, t1);
  const auto q2 = forward_view(model, v, true, &d2, t2);
  forward_view(model, v, true, &d3, t3);
  CHECK(q1 == q2);
  CHECK(t1.drop_mask == t2.drop_mask);
}
