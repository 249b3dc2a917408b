#include <cmath>
#include <limits>
#include <sstream>

#include <stdexcept>

#include "doctest.h"
#include "snn/layers.hpp"
#include "snn/rng.hpp"

using namespace snn;

namespace {

ConvLayer make_layer(const ConvGeometry& g, double weight, double threshold) {
  ConvLayer layer;
  layer.geom = g;
  layer.weights.assign(std::size_t(g.n_filters) * g.weights_per_filter(),
                       weight);
  layer.thresholds.assign(std::size_t(g.n_filters), threshold);
  return layer;
}

SpikeTensor random_tensor(Rng& rng, const Shape4& shape, double density) {
  SpikeTensor t;
  t.shape = shape;
  for (int z = 0; z < shape.td; ++z) {
    for (int y = 0; y < shape.h; ++y) {
      for (int x = 0; x < shape.w; ++x) {
        for (int k = 0; k < shape.c; ++k) {
          if (rng.uniform() < density) t.events.push_back({x, y, z, k, rng.uniform()});
        }
      }
    }
  }
  sort_events(t.events);
  return t;
}

// Dense cross-correlation of the binary spike indicator with the weights.
std::vector<double> dense_potentials(const ConvLayer& layer,
                                     const SpikeTensor& input) {
  const ConvGeometry& g = layer.geom;
  const Shape4 out = output_shape(g, input.shape);
  std::vector<double> dense(std::size_t(input.shape.volume()), 0.0);
  const Shape4& s = input.shape;
  for (const SpikeEvent& e : input.events) {
    dense[((std::size_t(e.z) * s.h + e.y) * s.w + e.x) * s.c + e.k] = 1.0;
  }
  std::vector<double> pot(std::size_t(out.w) * out.h * out.td * g.n_filters,
                          0.0);
  for (int oz = 0; oz < out.td; ++oz) {
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        const std::size_t loc = (std::size_t(oz) * out.h + oy) * out.w + ox;
        for (int k = 0; k < g.n_filters; ++k) {
          double acc = 0.0;
          for (int c = 0; c < g.c_in; ++c) {
            for (int fx = 0; fx < g.f_w; ++fx) {
              for (int fy = 0; fy < g.f_h; ++fy) {
                for (int fz = 0; fz < g.f_td; ++fz) {
                  const int ix = ox * g.stride_w + fx;
                  const int iy = oy * g.stride_h + fy;
                  const int iz = oz * g.stride_td + fz;
                  acc += layer.w_at(k, c, fx, fy, fz) *
                         dense[((std::size_t(iz) * s.h + iy) * s.w + ix) * s.c +
                               c];
                }
              }
            }
          }
          pot[loc * g.n_filters + k] = acc;
        }
      }
    }
  }
  return pot;
}

}  // namespace

TEST_CASE("output_shape valid-convolution arithmetic") {
  ConvGeometry g{5, 5, 2, 2, 16, 1, 1, 2};
  Shape4 out = output_shape(g, Shape4{80, 60, 20, 2});
  CHECK(out == Shape4{76, 56, 10, 16});

  ConvGeometry exact{5, 5, 2, 1, 4, 1, 1, 1};
  CHECK(output_shape(exact, Shape4{5, 5, 2, 1}) == Shape4{1, 1, 1, 4});

  ConvGeometry too_big{5, 5, 1, 1, 4, 1, 1, 1};
  CHECK_THROWS_AS(output_shape(too_big, Shape4{4, 4, 1, 1}),
                  std::runtime_error);
}

TEST_CASE("conv_forward empty input gives empty output") {
  ConvLayer layer = make_layer(ConvGeometry{3, 3, 1, 2, 4, 1, 1, 1}, 0.5, 1.0);
  SpikeTensor in;
  in.shape = {8, 8, 1, 2};
  SpikeTensor out = conv_forward_infer(layer, in);
  CHECK(out.events.empty());
  CHECK(out.shape == Shape4{6, 6, 1, 4});
}

TEST_CASE("conv_forward hand event-trace: fires on the fourth event") {
  // 2x2x1 input, one 2x2 filter, weights 0.3, threshold 1.0
  ConvLayer layer = make_layer(ConvGeometry{2, 2, 1, 1, 1, 1, 1, 1}, 0.3, 1.0);
  SpikeTensor in;
  in.shape = {2, 2, 1, 1};
  in.events = {{0, 0, 0, 0, 0.1},
               {1, 0, 0, 0, 0.2},
               {0, 1, 0, 0, 0.3},
               {1, 1, 0, 0, 0.4}};
  SpikeTensor out = conv_forward_infer(layer, in);
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0] == SpikeEvent{0, 0, 0, 0, 0.4});
}

TEST_CASE("conv_forward matches the dense oracle with infinite thresholds") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    ConvGeometry g;
    g.f_w = 1 + int(rng.below(4));
    g.f_h = 1 + int(rng.below(4));
    g.f_td = 1 + int(rng.below(3));
    g.c_in = 1 + int(rng.below(2));
    g.n_filters = 1 + int(rng.below(4));
    g.stride_w = 1 + int(rng.below(2));
    g.stride_h = 1 + int(rng.below(2));
    g.stride_td = 1 + int(rng.below(2));
    Shape4 in_shape{g.f_w + int(rng.below(5)), g.f_h + int(rng.below(5)),
                    g.f_td + int(rng.below(4)), g.c_in};
    ConvLayer layer = make_layer(g, 0.0, std::numeric_limits<double>::infinity());
    for (double& w : layer.weights) w = rng.uniform();
    SpikeTensor in = random_tensor(rng, in_shape, 0.5);
    std::vector<double> pots;
    SpikeTensor out = conv_forward_infer(layer, in, &pots);
    CHECK(out.events.empty());
    const std::vector<double> expect = dense_potentials(layer, in);
    REQUIRE(pots.size() == expect.size());
    for (std::size_t i = 0; i < pots.size(); ++i) {
      CHECK(pots[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv output causality and single-spike invariants") {
  Rng rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    ConvGeometry g{1 + int(rng.below(3)), 1 + int(rng.below(3)),
                   1 + int(rng.below(2)), 2, 1 + int(rng.below(5)), 1, 1, 1};
    Shape4 in_shape{g.f_w + 4, g.f_h + 4, g.f_td + 2, 2};
    ConvLayer layer = make_layer(g, 0.0, 0.0);
    Rng init(trial);
    for (double& w : layer.weights) w = init.uniform();
    for (double& th : layer.thresholds) th = init.uniform(0.5, 3.0);
    SpikeTensor in = random_tensor(rng, in_shape, 0.4);
    SpikeTensor out = conv_forward_infer(layer, in);
    CHECK(!validate_tensor(out).has_value());
    for (const SpikeEvent& e : out.events) {
      bool found = false;
      for (const SpikeEvent& i : in.events) found = found || i.t == e.t;
      CHECK(found);
    }
  }
}

TEST_CASE("a 3D layer with f_td = 1 matches 2D behaviour on a single frame") {
  Rng rng(77);
  ConvGeometry g2{3, 3, 1, 2, 4, 1, 1, 1};
  ConvLayer layer2 = make_layer(g2, 0.0, 1.5);
  for (double& w : layer2.weights) w = rng.uniform();
  ConvLayer layer3 = layer2;
  layer3.geom.stride_td = 1;  // already f_td = 1
  SpikeTensor in = random_tensor(rng, Shape4{7, 7, 1, 2}, 0.6);
  SpikeTensor a = conv_forward_infer(layer2, in);
  SpikeTensor b = conv_forward_infer(layer3, in);
  CHECK(a.events == b.events);
}

TEST_CASE("conv_forward_train on a frozen layer throws") {
  ConvLayer layer = make_layer(ConvGeometry{2, 2, 1, 1, 1, 1, 1, 1}, 0.3, 1.0);
  layer.frozen = true;
  SpikeTensor in;
  in.shape = {2, 2, 1, 1};
  std::vector<std::int32_t> locs = {0};
  CHECK_THROWS_AS(conv_forward_train(layer, in, locs), std::runtime_error);
}

TEST_CASE("frozen layers are bitwise weight-invariant under inference") {
  Rng rng(88);
  ConvLayer layer = make_layer(ConvGeometry{3, 3, 2, 2, 4, 1, 1, 1}, 0.0, 1.0);
  for (double& w : layer.weights) w = rng.uniform();
  layer.frozen = true;
  const std::vector<double> before = layer.weights;
  SpikeTensor in = random_tensor(rng, Shape4{8, 8, 4, 2}, 0.5);
  conv_forward_infer(layer, in);
  CHECK(layer.weights == before);
}

TEST_CASE("training updates the winner filter and all thresholds") {
  ConvGeometry g{2, 2, 1, 1, 2, 1, 1, 1};
  ConvLayer layer = make_layer(g, 0.3, 1.0);
  layer.thresholds = {1.0, 2.0};
  layer.threshold.t_obj = 0.65;
  SpikeTensor in;
  in.shape = {2, 2, 1, 1};
  in.events = {{0, 0, 0, 0, 0.1},
               {1, 0, 0, 0, 0.2},
               {0, 1, 0, 0, 0.3},
               {1, 1, 0, 0, 0.4}};
  std::vector<std::int32_t> locs = {0};
  SpikeTensor out = conv_forward_train(layer, in, locs);
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0].k == 0);
  CHECK(out.events[0].t == 0.4);
  // filter 0 potentiated at zero-to-small delays; filter 1 untouched
  for (int fx = 0; fx < 2; ++fx) {
    for (int fy = 0; fy < 2; ++fy) {
      CHECK(layer.w_at(0, 0, fx, fy, 0) > 0.3);
      CHECK(layer.w_at(1, 0, fx, fy, 0) == 0.3);
    }
  }
  // winner threshold up, loser down: drift = -(0.4 - 0.65) = +0.25
  CHECK(layer.thresholds[0] == doctest::Approx(1.0 + 0.25 + 1.0));
  CHECK(layer.thresholds[1] == doctest::Approx(2.0 + 0.25 - 0.5));
}

TEST_CASE("pool_forward keeps the earliest spike per window") {
  PoolGeometry g{2, 2, 1, 2, 2, 1};
  SpikeTensor in;
  in.shape = {4, 4, 1, 1};
  in.events = {{0, 0, 0, 0, 0.3}, {1, 1, 0, 0, 0.5}, {2, 2, 0, 0, 0.7}};
  sort_events(in.events);
  SpikeTensor out = pool_forward(g, in);
  CHECK(out.shape == Shape4{2, 2, 1, 1});
  REQUIRE(out.events.size() == 2);
  CHECK(out.events[0] == SpikeEvent{0, 0, 0, 0, 0.3});  // window won by t=0.3
  CHECK(out.events[1] == SpikeEvent{1, 1, 0, 0, 0.7});
}

TEST_CASE("pool_forward shape arithmetic and event bounds") {
  Rng rng(3);
  PoolGeometry g{2, 2, 2, 2, 2, 2};
  SpikeTensor in = random_tensor(rng, Shape4{76, 56, 10, 3}, 0.05);
  SpikeTensor out = pool_forward(g, in);
  CHECK(out.shape == Shape4{38, 28, 5, 3});
  CHECK(out.events.size() <= in.events.size());
  CHECK(!validate_tensor(out).has_value());
  for (const SpikeEvent& e : out.events) {
    bool found = false;
    for (const SpikeEvent& i : in.events) found = found || i.t == e.t;
    CHECK(found);
  }
}

TEST_CASE("sum_pool_features counts spikes per cell and channel") {
  SpikeTensor in;
  in.shape = {8, 8, 2, 4};
  SUBCASE("empty tensor") {
    CHECK(sum_pool_features(in, 1, 1, 1) == std::vector<double>(4, 0.0));
  }
  SUBCASE("single cell counting") {
    for (int i = 0; i < 7; ++i) in.events.push_back({i, 0, 0, 3, 0.1 * i});
    sort_events(in.events);
    auto f = sum_pool_features(in, 1, 1, 1);
    CHECK(f == std::vector<double>{0, 0, 0, 7});
  }
  SUBCASE("2x2 grid cell assignment") {
    in.events = {{1, 2, 0, 0, 0.1}, {0, 3, 1, 1, 0.2}};
    sort_events(in.events);
    auto f = sum_pool_features(in, 2, 2, 1);
    // only the top-left cell is populated
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 1.0);
    for (std::size_t i = 2; i < f.size(); ++i) CHECK(f[i] == 0.0);
  }
}

TEST_CASE("layer snapshot round-trips byte-exactly") {
  Rng rng(13);
  ConvLayer layer = make_layer(ConvGeometry{3, 3, 2, 2, 4, 1, 1, 2}, 0.0, 0.0);
  for (double& w : layer.weights) w = rng.uniform();
  for (double& th : layer.thresholds) th = rng.gauss(5.0, 1.0);
  layer.frozen = true;
  std::ostringstream first;
  save_layer(layer, first);
  std::istringstream in(first.str());
  ConvLayer loaded = load_layer(in);
  CHECK(loaded.weights == layer.weights);
  CHECK(loaded.thresholds == layer.thresholds);
  CHECK(loaded.frozen == layer.frozen);
  std::ostringstream second;
  save_layer(loaded, second);
  CHECK(first.str() == second.str());
}
