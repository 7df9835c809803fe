/*
 * Copyright 2026 The SeisNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "seisnet/model.hpp"
#include "test_support.hpp"

namespace seisnet {
namespace {

using testing::conv_oracle;
using testing::random_map;

// Closed-form learnable-parameter count: stem conv, then per dense layer
// BN (gamma, beta) and conv (kernel + bias) on d0 + k*l inputs, then the head.
std::size_t closed_form_count(const ArchSpec& s) {
  std::size_t n = s.stem_kernel * s.input_channels * s.stem_filters + s.stem_filters;
  for (std::size_t b = 0; b < s.block_count; ++b) {
    const std::size_t d0 = s.stem_filters + b * s.layers_per_block * s.growth_rate;
    for (std::size_t l = 0; l < s.layers_per_block; ++l) {
      const std::size_t c = d0 + s.growth_rate * l;
      n += 2 * c + s.block_kernel * c * s.growth_rate + s.growth_rate;
    }
  }
  const std::size_t features = s.stem_filters + s.block_count * s.layers_per_block * s.growth_rate;
  return n + features + 1;
}

TEST(ArchSpecTest, CanonicalAndMiniPresets) {
  const ArchSpec c = ArchSpec::canonical();
  EXPECT_EQ(c.input_length, 18000u);
  EXPECT_EQ(c.block_count, 10u);
  EXPECT_EQ(c.layers_per_block, 6u);
  EXPECT_EQ(c.feature_dim(), 744u);
  const ArchSpec m = ArchSpec::mini();
  EXPECT_EQ(m.input_length, 4500u);
  EXPECT_EQ(m.block_count, 5u);
  EXPECT_EQ(m.layers_per_block, 4u);
  EXPECT_EQ(m.feature_dim(), 264u);
}

TEST(ArchSpecTest, DeclaredFinalPoolMustMatchLength) {
  ArchSpec s = ArchSpec::canonical();
  EXPECT_NO_THROW(s.validate());
  s.final_pool_window = 8;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(build_model<float>(s, InitRule::He, 1), ConfigError);
}

TEST(ArchSpecTest, WidthLaw) {
  const ArchSpec s = ArchSpec::canonical();
  for (std::size_t b = 0; b < s.block_count; ++b)
    for (std::size_t l = 0; l < s.layers_per_block; ++l)
      EXPECT_EQ(s.layer_input_channels(b, l), 24 + 72 * b + 12 * l);
}

TEST(ArchSpecTest, ConfigRoundTripAndHash) {
  const ArchSpec s = ArchSpec::mini();
  const ArchSpec back = ArchSpec::from_config(KeyValueConfig::parse(s.to_config()));
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.hash(), s.hash());
  EXPECT_NE(ArchSpec::canonical().hash(), s.hash());
  EXPECT_EQ(ArchSpec::from_config(KeyValueConfig::parse("preset = canonical\n")), ArchSpec::canonical());
  EXPECT_THROW(ArchSpec::from_config(KeyValueConfig::parse("growth_rate = 0\n")), ConfigError);
}

TEST(ShapeLadderTest, CanonicalMatchesTableWithDocumentedException) {
  const auto params = build_model<float>(ArchSpec::canonical(), InitRule::Zeros, 0);
  std::vector<StageShape> shapes;
  forward(FeatureMap<float>(18000, 1, 0.1f), params, &shapes);

  // Printed table, except the pool after D6 and D7 where the table shows 72
  // and ceil(141 / 2) = 71.
  const std::vector<std::pair<std::size_t, std::size_t>> expected{
      {18000, 1}, {9000, 24}, {4500, 24}, {4500, 96}, {2250, 96}, {2250, 168}, {1125, 168},
      {1125, 240}, {563, 240}, {563, 312}, {282, 312}, {282, 384}, {141, 384}, {141, 456},
      {71, 456}, {71, 528}, {36, 528}, {36, 600}, {18, 600}, {18, 672}, {9, 672}, {9, 744},
      {1, 744}};
  ASSERT_EQ(shapes.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(shapes[i].length, expected[i].first) << "row " << i << " " << shapes[i].stage;
    EXPECT_EQ(shapes[i].channels, expected[i].second) << "row " << i << " " << shapes[i].stage;
  }
  EXPECT_EQ(shapes, params.spec.ladder());
}

TEST(ShapeLadderTest, MiniSpec) {
  const auto ladder = ArchSpec::mini().ladder();
  ASSERT_FALSE(ladder.empty());
  EXPECT_EQ(ladder[1].length, 2250u);
  EXPECT_EQ(ladder[2].length, 1125u);
  EXPECT_EQ(ladder.back().length, 1u);
  EXPECT_EQ(ladder.back().channels, 264u);
  EXPECT_EQ(ladder[ladder.size() - 2].length, 71u);
}

TEST(ParameterCountTest, CanonicalInPublishedRange) {
  const auto params = build_model<float>(ArchSpec::canonical(), InitRule::He, 1);
  const std::size_t n = count_parameters(params);
  EXPECT_EQ(n, closed_form_count(params.spec));
  EXPECT_EQ(n, 863497u);
  EXPECT_GE(n, 780000u);
  EXPECT_LE(n, 880000u);
}

TEST(ParameterCountTest, StemAndHeadOnly) {
  ArchSpec s = ArchSpec::canonical();
  s.block_count = 0;
  s.final_pool_window = 0;
  EXPECT_EQ(count_parameters(build_model<float>(s, InitRule::He, 1)), 7u * 1 * 24 + 24 + (24 + 1));
}

TEST(ParameterCountTest, ReducedSpecs) {
  ArchSpec s = ArchSpec::mini();
  s.input_length = 2250;
  s.block_count = 4;
  EXPECT_EQ(count_parameters(build_model<float>(s, InitRule::He, 1)), closed_form_count(s));
  EXPECT_EQ(count_parameters(build_model<float>(ArchSpec::mini(), InitRule::He, 1)),
            closed_form_count(ArchSpec::mini()));
}

TEST(BuildModelTest, SeedDeterminesWeights) {
  const ArchSpec s = ArchSpec::mini();
  EXPECT_EQ(build_model<float>(s, InitRule::He, 5), build_model<float>(s, InitRule::He, 5));
  EXPECT_NE(build_model<float>(s, InitRule::He, 5), build_model<float>(s, InitRule::He, 6));
}

TEST(DenseBlockTest, FirstCanonicalBlockWidth) {
  const auto params = build_model<float>(ArchSpec::canonical(), InitRule::Zeros, 0);
  const auto y = dense_block_forward(FeatureMap<float>(4500, 24, 1.0f), params.blocks[0]);
  EXPECT_EQ(y.length(), 4500u);
  EXPECT_EQ(y.channels(), 96u);
}

TEST(DenseBlockTest, OneLayerAddsGrowthRate) {
  DenseBlockParams<float> block{{BatchNormParams<float>(24), ConvParams<float>(3, 24, 12, 1)}};
  block[0].norm.has_running_stats = true;
  std::fill(block[0].norm.running_var.begin(), block[0].norm.running_var.end(), 1.0f);
  EXPECT_EQ(dense_block_forward(FeatureMap<float>(10, 24), block).channels(), 36u);
}

TEST(DenseBlockTest, ChannelMismatchIsAnError) {
  const auto params = build_model<float>(ArchSpec::mini(), InitRule::Zeros, 0);
  EXPECT_THROW(dense_block_forward(FeatureMap<float>(100, 23), params.blocks[0]), ShapeError);
}

TEST(DenseBlockTest, MatchesHandUnrolledComposition) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const std::size_t len = 16, d0 = 4, k = 3;
  DenseBlockParams<double> block;
  for (std::size_t l = 0; l < 2; ++l) {
    const std::size_t c = d0 + k * l;
    DenseLayerParams<double> layer{BatchNormParams<double>(c), ConvParams<double>(3, c, k, 1)};
    for (std::size_t i = 0; i < c; ++i) {
      layer.norm.gamma[i] = 1.0 + 0.3 * g(rng);
      layer.norm.beta[i] = 0.3 * g(rng);
      layer.norm.running_mean[i] = 0.2 * g(rng);
      layer.norm.running_var[i] = 0.5 + std::abs(g(rng));
    }
    layer.norm.has_running_stats = true;
    for (auto& v : layer.conv.kernel) v = 0.4 * g(rng);
    for (auto& v : layer.conv.bias) v = 0.1 * g(rng);
    block.push_back(layer);
  }
  const auto x0 = random_map<double>(len, d0, rng);

  auto bn_relu = [](const FeatureMap<double>& in, const BatchNormParams<double>& p) {
    FeatureMap<double> out(in.length(), in.channels());
    for (std::size_t t = 0; t < in.length(); ++t)
      for (std::size_t c = 0; c < in.channels(); ++c) {
        const double v = p.gamma[c] * (in(t, c) - p.running_mean[c]) /
                             std::sqrt(p.running_var[c] + p.epsilon) + p.beta[c];
        out(t, c) = v > 0.0 ? v : 0.0;
      }
    return out;
  };
  // x1 = H0([x0]), x2 = H1([x0, x1]), output [x0, x1, x2].
  const auto x1 = conv_oracle(bn_relu(x0, block[0].norm), block[0].conv);
  FeatureMap<double> x01(len, d0 + k);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < d0; ++c) x01(t, c) = x0(t, c);
    for (std::size_t c = 0; c < k; ++c) x01(t, d0 + c) = x1(t, c);
  }
  const auto x2 = conv_oracle(bn_relu(x01, block[1].norm), block[1].conv);

  const auto y = dense_block_forward(x0, block);
  ASSERT_EQ(y.channels(), d0 + 2 * k);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t c = 0; c < d0 + 2 * k; ++c) {
      const double want = c < d0 + k ? x01(t, c) : x2(t, c - d0 - k);
      EXPECT_NEAR(y(t, c), want, 1e-12) << t << "," << c;
    }
}

TEST(ForwardTest, ZeroNetworkReturnsHeadBias) {
  auto params = build_model<float>(ArchSpec::mini(), InitRule::Zeros, 0);
  params.head.bias[0] = 0.625f;
  std::mt19937_64 rng(2);
  EXPECT_EQ(forward(random_map<float>(4500, 1, rng), params), 0.625f);
  EXPECT_EQ(forward(FeatureMap<float>(4500, 1, -3.0f), params), 0.625f);
}

TEST(ForwardTest, InferIsDeterministic) {
  auto params = build_model<float>(ArchSpec::mini(), InitRule::He, 4);
  std::mt19937_64 rng(3);
  Batch<float> warm{random_map<float>(4500, 1, rng), random_map<float>(4500, 1, rng)};
  forward_batch(warm, params, Mode::Train);
  const auto x = random_map<float>(4500, 1, rng);
  const float a = forward(x, params);
  const float b = forward(x, params);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_EQ(a, b);
  EXPECT_EQ(forward_batch(Batch<float>{x}, params, Mode::Infer)[0], a);
}

TEST(ForwardTest, WrongLengthNamesExpectedLength) {
  const auto params = build_model<float>(ArchSpec::mini(), InitRule::Zeros, 0);
  try {
    forward(FeatureMap<float>(4000, 1), params);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("4500"), std::string::npos) << e.what();
  }
}

ArchSpec tiny_spec() {
  ArchSpec s;
  s.input_length = 64;
  s.stem_filters = 8;
  s.block_count = 2;
  s.layers_per_block = 2;
  s.growth_rate = 4;
  return s;
}

TEST(BackwardTest, ZeroScoreGradientGivesZeroGradients) {
  auto params = build_model<double>(tiny_spec(), InitRule::He, 1);
  std::mt19937_64 rng(1);
  Batch<double> x{random_map<double>(64, 1, rng), random_map<double>(64, 1, rng)};
  ForwardCache<double> cache;
  forward_batch(x, params, Mode::Train, &cache);
  const std::vector<double> gz{0.0, 0.0};
  const auto grads = backward<double>(gz, cache, params);
  grads.for_each_parameter([](const std::string& name, std::span<const double> v) {
    for (double g : v) ASSERT_EQ(g, 0.0) << name;
  });
}

TEST(BackwardTest, HeadBiasGradientIsScoreGradient) {
  auto params = build_model<double>(tiny_spec(), InitRule::He, 2);
  std::mt19937_64 rng(2);
  Batch<double> x{random_map<double>(64, 1, rng), random_map<double>(64, 1, rng)};
  ForwardCache<double> cache;
  forward_batch(x, params, Mode::Train, &cache);
  const std::vector<double> gz{0.75, -0.25};
  EXPECT_EQ(backward<double>(gz, cache, params).head.bias[0], 0.5);
}

TEST(BackwardTest, MissingCacheIsAnError) {
  const auto params = build_model<double>(tiny_spec(), InitRule::He, 2);
  const std::vector<double> gz{1.0};
  EXPECT_THROW(backward<double>(gz, ForwardCache<double>{}, params), std::logic_error);
}

TEST(BackwardTest, FullModelMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GradCheckReport r = check_model_gradients(tiny_spec(), seed, 1e-3);
    EXPECT_TRUE(r.passed()) << "seed " << seed << "\n" << r.summary();
  }
}

TEST(BackwardTest, DirectionalModelCheck) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GradCheckReport r = check_model_gradients(tiny_spec(), seed, 1e-3, 2, 3);
    EXPECT_TRUE(r.passed()) << "seed " << seed << "\n" << r.summary();
    for (const auto& g : r.groups) EXPECT_EQ(g.checked, 3u) << g.name;
  }
}

TEST(BackwardTest, ThreadCountDoesNotChangeGradients) {
  auto params = build_model<float>(tiny_spec(), InitRule::He, 3);
  auto params2 = params;
  std::mt19937_64 rng(3);
  Batch<float> x;
  for (int i = 0; i < 5; ++i) x.push_back(random_map<float>(64, 1, rng));
  const std::vector<float> gz{0.1f, -0.2f, 0.3f, 0.05f, -0.4f};
  ForwardCache<float> c1, c4;
  forward_batch(x, params, Mode::Train, &c1, 1);
  forward_batch(x, params2, Mode::Train, &c4, 4);
  EXPECT_EQ(backward<float>(gz, c1, params, 1), backward<float>(gz, c4, params2, 4));
}

ModelParams<float> trained_looking_model(std::uint64_t seed) {
  auto params = build_model<float>(ArchSpec::mini(), InitRule::He, seed);
  std::mt19937_64 rng(seed);
  Batch<float> warm{random_map<float>(4500, 1, rng), random_map<float>(4500, 1, rng)};
  forward_batch(warm, params, Mode::Train);
  params.step = 1234;
  return params;
}

TEST(WeightFileTest, RoundTripIsBitIdentical) {
  const auto params = trained_looking_model(8);
  std::stringstream buf;
  save_weights(params, buf);
  const auto back = load_weights(buf);
  EXPECT_EQ(back, params);
  const ArchSpec spec = ArchSpec::mini();
  std::stringstream buf2(buf.str());
  EXPECT_EQ(load_weights(buf2, &spec), params);
}

TEST(WeightFileTest, TruncationIsDetected) {
  std::stringstream buf;
  save_weights(trained_looking_model(9), buf);
  const std::string full = buf.str();
  for (std::size_t cut : {std::size_t{3}, full.size() / 2, full.size() - 1}) {
    std::stringstream in(full.substr(0, cut));
    EXPECT_THROW(load_weights(in), FormatError) << cut;
  }
}

TEST(WeightFileTest, CorruptionIsDetected) {
  std::stringstream buf;
  save_weights(trained_looking_model(10), buf);
  std::string bytes = buf.str();
  bytes[bytes.size() / 2] ^= 0x10;
  std::stringstream in(bytes);
  EXPECT_THROW(load_weights(in), FormatError);
}

TEST(WeightFileTest, MismatchedSpecIsRejected) {
  std::stringstream buf;
  save_weights(build_model<float>(ArchSpec::mini(), InitRule::Zeros, 0), buf);
  const ArchSpec other = ArchSpec::canonical();
  EXPECT_THROW(load_weights(buf, &other), ConfigError);
}

}  // namespace
}  // namespace seisnet
