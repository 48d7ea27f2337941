/**
 * Copyright 2026 The wbed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "wbed/wbed.hpp"

using fixtures::thrown_code;

namespace {

constexpr double kLn2 = 0.6931471805599453094;

wbed::FeatureStack random_features(std::mt19937& rng, int c, int h, int w) {
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  std::vector<double> values(static_cast<std::size_t>(c) * h * w);
  for (double& v : values) v = dist(rng);
  return wbed::FeatureStack(c, h, w, std::move(values));
}

}  // namespace

TEST_CASE("feature stack validates shape and finiteness") {
  CHECK_NOTHROW(wbed::FeatureStack(1, 1, 2, {-1e9, 1e9}));
  CHECK(thrown_code([] {
          wbed::FeatureStack(1, 1, 2,
                             {0.0, std::numeric_limits<double>::quiet_NaN()});
        }) == "NonFinite");
  CHECK(thrown_code([] {
          wbed::FeatureStack(2, 1, 1, {0.0});
        }) == "DimensionMismatch");
}

TEST_CASE("normalization maps an all-nonpositive channel to the zero plane") {
  const wbed::FeatureStack f(1, 2, 2, {-1.0, -2.0, -0.5, 0.0});
  const wbed::ActivationStack a = wbed::normalize_cam(f);
  for (double v : a.plane(0)) CHECK(v == 0.0);
}

TEST_CASE("normalization divides positives by the channel peak") {
  const wbed::FeatureStack f(1, 2, 2, {4.0, 2.0, 0.0, -4.0});
  const wbed::ActivationStack a = wbed::normalize_cam(f);
  CHECK(a.at(0, 0, 0) == 1.0);
  CHECK(a.at(0, 0, 1) == 0.5);
  CHECK(a.at(0, 1, 0) == 0.0);
  CHECK(a.at(0, 1, 1) == 0.0);
}

TEST_CASE("normalization treats channels independently") {
  const wbed::FeatureStack f(2, 1, 2, {2.0, 1.0, -3.0, -1.0});
  const wbed::ActivationStack a = wbed::normalize_cam(f);
  CHECK(a.plane(0)[0] == 1.0);
  CHECK(a.plane(0)[1] == 0.5);
  CHECK(a.plane(1)[0] == 0.0);
  CHECK(a.plane(1)[1] == 0.0);
}

TEST_CASE("every normalized channel peaks at exactly 1 or is all zero") {
  std::mt19937 rng(7);
  for (int iter = 0; iter < 50; ++iter) {
    const wbed::FeatureStack f = random_features(rng, 4, 5, 6);
    const wbed::ActivationStack a = wbed::normalize_cam(f);
    for (int c = 0; c < a.class_count(); ++c) {
      double peak = 0.0;
      for (double v : a.plane(c)) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        peak = std::max(peak, v);
      }
      CHECK((peak == 0.0 || peak == 1.0));
    }
  }
}

TEST_CASE("normalization is exactly invariant under power-of-two scaling") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 20; ++iter) {
    const wbed::FeatureStack f = random_features(rng, 3, 4, 4);
    for (const double scale : {0.125, 0.5, 2.0, 8.0, 1024.0}) {
      std::vector<double> scaled(f.values().size());
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled[i] = f.values()[i] * scale;
      }
      const wbed::ActivationStack a = wbed::normalize_cam(f);
      const wbed::ActivationStack b = wbed::normalize_cam(
          wbed::FeatureStack(f.class_count(), f.height(), f.width(),
                             std::move(scaled)));
      CHECK(a.planes() == b.planes());
    }
  }
}

TEST_CASE("normalization agrees with the reference implementation") {
  std::mt19937 rng(13);
  for (int iter = 0; iter < 50; ++iter) {
    const wbed::FeatureStack f = random_features(rng, 3, 6, 5);
    const wbed::ActivationStack a = wbed::normalize_cam(f);
    const std::vector<double> expected = oracle::normalize(
        f.values(), f.class_count(), static_cast<int>(f.plane_size()));
    CHECK(a.planes() == expected);
  }
}

TEST_CASE("bce at zero logits is ln 2 for either target") {
  const wbed::LogitVector z({0.0, 0.0, 0.0});
  const wbed::ImageLabelVector all =
      wbed::ImageLabelVector::from_class_indices(3, {0, 1, 2});
  const wbed::ImageLabelVector none =
      wbed::ImageLabelVector::from_class_indices(3, {});
  CHECK(std::abs(wbed::bce_loss(z, all) - kLn2) <= 1e-15);
  CHECK(std::abs(wbed::bce_loss(z, none) - kLn2) <= 1e-15);
}

TEST_CASE("bce matches independently derived closed-form values") {
  // softplus(-10) for a confident correct positive.
  const double one_hot = wbed::bce_loss(
      wbed::LogitVector({10.0}),
      wbed::ImageLabelVector::from_class_indices(1, {0}));
  CHECK(std::abs(one_hot - 4.5398899216864646769e-05) <= 1e-15);

  // Both classes contribute softplus(-3).
  const double two = wbed::bce_loss(
      wbed::LogitVector({3.0, -3.0}),
      wbed::ImageLabelVector::from_class_indices(2, {0}));
  CHECK(std::abs(two - 0.0485873515737420587589) <= 1e-15);
}

TEST_CASE("bce agrees with a long-double sigmoid evaluation") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> logit(-30.0, 30.0);
  std::bernoulli_distribution coin(0.5);
  for (int iter = 0; iter < 200; ++iter) {
    const int c = 1 + static_cast<int>(rng() % 8);
    std::vector<double> z(static_cast<std::size_t>(c));
    std::vector<int> targets(static_cast<std::size_t>(c));
    std::vector<int> indices;
    for (int k = 0; k < c; ++k) {
      z[static_cast<std::size_t>(k)] = logit(rng);
      targets[static_cast<std::size_t>(k)] = coin(rng) ? 1 : 0;
      if (targets[static_cast<std::size_t>(k)] == 1) indices.push_back(k);
    }
    const double got = wbed::bce_loss(
        wbed::LogitVector(z),
        wbed::ImageLabelVector::from_class_indices(c, indices));
    const double expected = oracle::bce(z, targets);
    CHECK(std::abs(got - expected) <= 1e-9);
  }
}

TEST_CASE("bce survives extreme logits without overflow") {
  const wbed::ImageLabelVector pos =
      wbed::ImageLabelVector::from_class_indices(1, {0});
  const wbed::ImageLabelVector neg =
      wbed::ImageLabelVector::from_class_indices(1, {});

  const double confident_right = wbed::bce_loss(wbed::LogitVector({1e3}), pos);
  CHECK(std::isfinite(confident_right));
  CHECK(confident_right == 0.0);  // softplus(-1000) underflows to exactly 0

  const double confident_wrong = wbed::bce_loss(wbed::LogitVector({-1e3}), pos);
  CHECK(std::isfinite(confident_wrong));
  CHECK(confident_wrong == 1e3);  // softplus(1000) = 1000 + log1p(exp(-1000))

  CHECK(wbed::bce_loss(wbed::LogitVector({1e3}), neg) == 1e3);
  CHECK(wbed::bce_loss(wbed::LogitVector({-1e3}), neg) == 0.0);
}

TEST_CASE("bce rejects mismatched lengths") {
  CHECK(thrown_code([] {
          wbed::bce_loss(wbed::LogitVector({0.0, 0.0}),
                         wbed::ImageLabelVector::from_class_indices(3, {0}));
        }) == "LengthMismatch");
}

TEST_CASE("global average pooling is the per-channel mean") {
  const wbed::FeatureStack f(2, 2, 2,
                             {1.0, 2.0, 3.0, 4.0, -1.0, -1.0, 1.0, 1.0});
  const wbed::LogitVector z = wbed::global_average_pool(f);
  CHECK(z.size() == 2);
  CHECK(z.at(0) == 2.5);
  CHECK(z.at(1) == 0.0);
}
