#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"

#include "advreal/core/errors.hpp"
#include "advreal/core/rng.hpp"
#include "advreal/detect/gradient.hpp"
#include "advreal/detect/shakedrop.hpp"
#include "advreal/detect/toy_detector.hpp"
#include "advreal/detect/training.hpp"

using namespace advreal;
using namespace advreal::detect;

namespace {

Image random_image(Rng& rng, int size) {
  Image img(size, size, 3);
  for (auto& v : img.data) v = uniform(rng, 0.0, 1.0);
  return img;
}

// Max confidence, the same shape of loss the attack uses.
double max_conf_loss(const std::vector<Detection>& dets, std::vector<double>& dconf) {
  dconf.assign(dets.size(), 0.0);
  if (dets.empty()) return 0.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < dets.size(); ++i) {
    if (dets[i].confidence > dets[best].confidence) best = i;
  }
  dconf[best] = 1.0;
  return dets[best].confidence;
}

double eval_loss(const ToyDetector& model, const Image& img) {
  std::vector<double> d;
  return max_conf_loss(model.detect(img), d);
}

ToyDetector seeded_model(std::uint64_t seed) {
  ToyDetector m;
  m.init(seed);
  // Lift objectness so plenty of cells clear the confidence floor.
  auto p = m.params();
  p.back()->at(0) = 0.0;
  return m;
}

}  // namespace

TEST_CASE("shakedrop coefficient algebra") {
  ShakedropDraw d;
  d.gamma_fwd = true;
  d.omega = 0.7;
  CHECK(d.forward_coefficient() == 1.0);
  d.gamma_fwd = false;
  CHECK(d.forward_coefficient() == 0.7);
  // gamma + omega - gamma * omega over the two gamma values
  for (double g : {0.0, 1.0}) {
    ShakedropDraw e;
    e.gamma_fwd = g == 1.0;
    e.omega = 1.3;
    CHECK(e.forward_coefficient() == doctest::Approx(g + 1.3 - g * 1.3));
  }
}

TEST_CASE("shakedrop Monte Carlo mean of the fusion coefficient") {
  for (double ps : {0.5, 0.9}) {
    for (double k : {0.25, 0.5}) {
      ShakedropCfg cfg{ps, k, true, 123};
      Rng rng(cfg.rng_seed);
      constexpr int kDraws = 100000;
      double sum = 0.0, sum_sq = 0.0;
      for (int i = 0; i < kDraws; ++i) {
        const double c = draw_shakedrop(cfg, rng).forward_coefficient();
        sum += c;
        sum_sq += c * c;
      }
      const double mean = sum / kDraws;
      const double se = std::sqrt((sum_sq / kDraws - mean * mean) / kDraws);
      CHECK(mean >= 0.99);
      CHECK(mean <= 1.01);
      CHECK(std::abs(mean - 1.0) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("shakedrop forward/backward on plain vectors") {
  const std::vector<double> x{1.0, -2.0, 0.5};
  const BlockFn h = [](std::span<const double> in) {
    std::vector<double> out(in.begin(), in.end());
    for (auto& v : out) v *= 3.0;
    return out;
  };
  ShakedropDraw d;
  CHECK(shakedrop_forward(x, h, d) == std::vector<double>{4.0, -8.0, 2.0});
  d.gamma_fwd = false;
  d.omega = 0.5;
  CHECK(shakedrop_forward(x, h, d) == std::vector<double>{2.5, -5.0, 1.25});

  const BlockFn zero = [](std::span<const double> in) { return std::vector<double>(in.size(), 0.0); };
  d.gamma_bwd = false;
  CHECK(shakedrop_backward(x, zero, d) == x);
  d.gamma_bwd = true;
  CHECK(shakedrop_backward(x, h, d) == std::vector<double>{4.0, -8.0, 2.0});

  CHECK_THROWS_AS((ShakedropCfg{1.5, 0.5, true, 0}.validate()), DomainError);
  CHECK_THROWS_AS((ShakedropCfg{0.5, 1.0, true, 0}.validate()), DomainError);
}

TEST_CASE("shakedrop draws consume the rng in a fixed order") {
  ShakedropCfg cfg{0.5, 0.5, true, 9};
  Rng a(9), b(9);
  const auto d = draw_shakedrop(cfg, a);
  // gamma_fwd, omega, gamma_bwd in that order
  const bool g1 = bernoulli(b, 0.5);
  const double w = uniform(b, 0.5, 1.5);
  const bool g2 = bernoulli(b, 0.5);
  CHECK(d.gamma_fwd == g1);
  CHECK(d.omega == w);
  CHECK(d.gamma_bwd == g2);
  CHECK(a() == b());
}

TEST_CASE("forced-identity shakedrop equals plain backprop bit-for-bit") {
  const ToyDetector model = seeded_model(3);
  Rng rng(4);
  const Image img = random_image(rng, ToyDetector::kInputSize);
  Rng r0(1);
  const auto plain = input_gradient(model, img, max_conf_loss, ShakedropCfg{}, r0);
  for (auto cfg : {ShakedropCfg{1.0, 0.5, true, 0}, ShakedropCfg{0.3, 0.0, true, 0}, ShakedropCfg{0.0, 0.0, true, 0}}) {
    Rng r(77);
    const auto g = input_gradient(model, img, max_conf_loss, cfg, r);
    CHECK(g.loss == plain.loss);
    CHECK(g.gradient.data == plain.gradient.data);
  }
}

TEST_CASE("input gradient matches central differences with shakedrop disabled") {
  const ToyDetector model = seeded_model(5);
  Rng rng(6);
  const Image img = random_image(rng, ToyDetector::kInputSize);
  Rng r(0);
  const auto g = input_gradient(model, img, max_conf_loss, ShakedropCfg{}, r);
  REQUIRE(!g.detections.empty());
  const auto& best = *std::max_element(g.detections.begin(), g.detections.end(),
                                       [](const Detection& a, const Detection& b) { return a.confidence < b.confidence; });
  // Sample pixels within the receptive field of the responsible cell.
  const int cx = best.cell % ToyDetector::kGrid, cy = best.cell / ToyDetector::kGrid;
  int checked = 0, attempts = 0;
  while (checked < 20 && attempts < 400) {
    ++attempts;
    const int px = std::clamp(cx * 32 + static_cast<int>(uniform(rng, -40, 72)), 0, 415);
    const int py = std::clamp(cy * 32 + static_cast<int>(uniform(rng, -40, 72)), 0, 415);
    const int c = static_cast<int>(uniform(rng, 0, 2.999));
    const std::size_t i = img.index(px, py, c);
    if (std::abs(g.gradient.data[i]) < 1e-7) continue;
    Image ip = img, im = img;
    ip.data[i] += 1e-3;
    im.data[i] -= 1e-3;
    const double fd = (eval_loss(model, ip) - eval_loss(model, im)) / 2e-3;
    CHECK(std::abs(g.gradient.data[i] - fd) <= 1e-2 * std::abs(fd));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("input gradient: constant loss gives zero, shakedrop is seeded and changes the gradient") {
  const ToyDetector model = seeded_model(7);
  Rng rng(8);
  const Image img = random_image(rng, ToyDetector::kInputSize);
  const DetectionLoss constant = [](const std::vector<Detection>& d, std::vector<double>& dc) {
    dc.assign(d.size(), 0.0);
    return 3.0;
  };
  Rng r(0);
  const auto z = input_gradient(model, img, constant, ShakedropCfg{}, r);
  CHECK(z.loss == 3.0);
  CHECK(std::all_of(z.gradient.data.begin(), z.gradient.data.end(), [](double v) { return v == 0.0; }));

  ShakedropCfg on{0.0, 0.5, true, 0};
  Rng a(42), b(42), c(0);
  const auto ga = input_gradient(model, img, max_conf_loss, on, a);
  const auto gb = input_gradient(model, img, max_conf_loss, on, b);
  const auto off = input_gradient(model, img, max_conf_loss, ShakedropCfg{}, c);
  CHECK(ga.gradient.data == gb.gradient.data);
  CHECK(ga.gradient.data != off.gradient.data);
}

TEST_CASE("detector: determinism, confidence bounds, wrong size") {
  const ToyDetector model = seeded_model(9);
  Rng rng(10);
  const Image img = random_image(rng, ToyDetector::kInputSize);
  const auto a = model.detect(img);
  const auto b = model.detect(img);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].confidence == b[i].confidence);
    CHECK(a[i].box == b[i].box);
    CHECK(a[i].confidence >= kConfidenceFloor);
    CHECK(a[i].confidence <= 1.0);
  }
  CHECK_THROWS_AS(model.detect(Image(100, 100, 3)), DomainError);
  CHECK_THROWS_AS(model.detect(Image(416, 416, 1)), DomainError);
}

TEST_CASE("nms and iou") {
  const BoundingBox a{0, 0, 2, 2}, b{1, 0, 3, 2};
  CHECK(box_iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(box_iou(a, a) == 1.0);
  CHECK(box_iou(a, BoundingBox{5, 5, 6, 6}) == 0.0);
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const double x0 = uniform(rng, 0, 50), y0 = uniform(rng, 0, 50), x1 = uniform(rng, 0, 50), y1 = uniform(rng, 0, 50);
    const BoundingBox p{x0, y0, x0 + uniform(rng, 1, 40), y0 + uniform(rng, 1, 40)};
    const BoundingBox q{x1, y1, x1 + uniform(rng, 1, 40), y1 + uniform(rng, 1, 40)};
    CHECK(box_iou(p, q) == doctest::Approx(oracle::iou(p.x_min, p.y_min, p.x_max, p.y_max, q.x_min, q.y_min,
                                                       q.x_max, q.y_max)));
    CHECK(box_iou(p, q) == box_iou(q, p));
  }

  std::vector<Detection> dets{{{0, 0, 10, 10}, 0.9, 1, 0},
                              {{1, 1, 11, 11}, 0.8, 1, 1},
                              {{20, 20, 30, 30}, 0.7, 1, 2},
                              {{40, 40, 50, 50}, 0.005, 1, 3}};
  const auto kept = non_max_suppression(dets);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].cell == 0);
  CHECK(kept[1].cell == 2);
}

TEST_CASE("weights save/load round trip") {
  ToyDetector m = seeded_model(12);
  const auto path = std::filesystem::temp_directory_path() / "advreal_weights_test.bin";
  m.save(path);
  ToyDetector back = ToyDetector::load(path);
  auto pa = m.params();
  auto pb = back.params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i]->size() == pb[i]->size());
    for (std::size_t j = 0; j < pa[i]->size(); ++j) CHECK(static_cast<float>((*pa[i])[j]) == (*pb[i])[j]);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ToyDetector::load(path), IoError);
}

TEST_CASE("detector training loss: parameter gradients match finite differences") {
  ToyDetector m = seeded_model(13);
  Rng rng(14);
  DetectorSample s;
  s.image = random_image(rng, ToyDetector::kInputSize);
  s.boxes = {{150, 80, 250, 330}};
  auto grads = m.zero_gradients();
  detector_loss(m, s, {}, grads);
  auto params = m.params();
  for (int t = 0; t < 12; ++t) {
    const std::size_t ti = static_cast<std::size_t>(uniform(rng, 0, static_cast<double>(params.size()) - 0.001));
    auto& p = *params[ti];
    const std::size_t j = static_cast<std::size_t>(uniform(rng, 0, static_cast<double>(p.size()) - 0.001));
    const double orig = p[j];
    auto scratch = m.zero_gradients();
    p[j] = orig + 1e-5;
    const double lp = detector_loss(m, s, {}, scratch);
    p[j] = orig - 1e-5;
    const double lm = detector_loss(m, s, {}, scratch);
    p[j] = orig;
    const double fd = (lp - lm) / 2e-5;
    CHECK(grads.tensors[ti][j] == doctest::Approx(fd).epsilon(1e-3).scale(1e-6));
  }
}
