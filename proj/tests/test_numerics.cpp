#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "emdlot/grad_check.hpp"
#include "emdlot/kmeans.hpp"
#include "emdlot/rng.hpp"
#include "emdlot/tape.hpp"
#include "emdlot/tensor.hpp"

using namespace emdlot;

TEST_CASE("sigmoid fixed points") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(std::abs(sigmoid(1e6) - 1.0) < 1e-15);
  CHECK(sigmoid(-1e6) >= 0.0);
  CHECK(std::isfinite(sigmoid(-745.0)));
  CHECK(std::isfinite(sigmoid(745.0)));
}

TEST_CASE("softmax_t basics") {
  std::vector<double> equal = {2.5, 2.5, 2.5, 2.5};
  for (double tau : {0.1, 1.0, 7.0}) {
    auto p = softmax_t(equal, tau);
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  }
  std::vector<double> single = {42.0};
  CHECK(softmax_t(single, 1.0)[0] == 1.0);

  std::vector<double> two = {1.0, 0.0};
  auto p = softmax_t(two, 1.0);
  CHECK(p[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));

  CHECK_THROWS_AS(softmax_t(two, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax_t(two, -1.0), std::invalid_argument);
}

TEST_CASE("softmax_t simplex and shift invariance over random draws") {
  SeededRng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + rng.uniform_int(8);
    std::vector<double> logits(n);
    for (auto& l : logits) l = rng.uniform(-30.0, 30.0);
    const double tau = rng.uniform(0.05, 5.0);
    auto p = softmax_t(logits, tau);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);

    const double c = rng.uniform(-50.0, 50.0);
    std::vector<double> shifted = logits;
    for (auto& l : shifted) l += c;
    auto q = softmax_t(shifted, tau);
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-12);
  }
}

TEST_CASE("softmax_t concentrates as tau -> 0") {
  std::vector<double> logits = {2.0, 1.0, 0.0};
  auto p = softmax_t(logits, 0.01);
  CHECK(*std::max_element(p.begin(), p.end()) >= 0.99);
}

TEST_CASE("SeededRng: identical seeds reproduce, distinct seeds differ") {
  SeededRng a(1234), b(1234), c(4321);
  bool all_equal_c = true;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    if (x != c.next_u64()) all_equal_c = false;
  }
  CHECK_FALSE(all_equal_c);

  SeededRng d(99), e(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(d.uniform() == e.uniform());
    CHECK(d.normal() == e.normal());
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(d.uniform_int(7) < 7);
  }
}

TEST_CASE("tape: values and gradients of the primitive ops") {
  // f(a, b) = sigmoid(a . b) with a, b 3-vectors
  Param a("a", {3}), b("b", {3});
  a.value.v = {0.5, -1.0, 2.0};
  b.value.v = {1.5, 0.25, -0.5};

  Tape tape;
  const int an = tape.param(a);
  const int bn = tape.param(b);
  const int f = tape.sigmoid(tape.dot(an, bn));
  const double dotv = 0.5 * 1.5 - 1.0 * 0.25 + 2.0 * -0.5;
  CHECK(tape.value(f) == doctest::Approx(sigmoid(dotv)).epsilon(1e-15));

  a.zero_grad();
  b.zero_grad();
  tape.backward(f);
  const double s = sigmoid(dotv);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.grad.v[i] == doctest::Approx(s * (1 - s) * b.value.v[i]).epsilon(1e-12));
    CHECK(b.grad.v[i] == doctest::Approx(s * (1 - s) * a.value.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("grad_check: sum of squares is exact to first order") {
  Param p("p", {5});
  p.value.v = {1.0, -2.0, 0.5, 3.0, -0.25};
  std::vector<Param*> params = {&p};
  auto f = [&](bool with_grad) {
    Tape tape;
    const int pn = tape.param(p);
    const int sq = tape.dot(pn, pn);
    if (with_grad) tape.backward(sq);
    return tape.value(sq);
  };
  auto res = grad_check(f, params, 1e-5);
  CHECK(res.max_rel_err < 1e-7);
}

TEST_CASE("grad_check: constant function has zero error") {
  Param p("p", {3});
  p.value.v = {1.0, 2.0, 3.0};
  std::vector<Param*> params = {&p};
  auto f = [&](bool) { return 4.25; };
  auto res = grad_check(f, params, 1e-5);
  CHECK(res.max_rel_err == 0.0);
}

TEST_CASE("grad_check: composite tape function") {
  // f = -log(softmax(W x + b)[1]) + 0.5 * (w . tanh(u))
  Param W("W", {3, 2}), bp("b", {3}), w("w", {4}), u("u", {4});
  SeededRng rng(5);
  for (Param* p : {&W, &bp, &w, &u})
    for (auto& v : p->value.v) v = rng.uniform(-1.0, 1.0);
  std::vector<double> x = {0.7, -0.3};

  std::vector<Param*> params = {&W, &bp, &w, &u};
  auto f = [&](bool with_grad) {
    Tape tape;
    const int Wn = tape.param(W);
    const int bn = tape.param(bp);
    const int wn = tape.param(w);
    const int un = tape.param(u);
    const int xn = tape.constant(x, 2);
    const int logits = tape.affine(Wn, xn, bn);
    const int ce = tape.neg_log_pick(tape.softmax_t(logits, 0.8), 1);
    const int aux = tape.dot(wn, tape.tanh(un));
    const std::array<int, 2> parts = {ce, aux};
    const std::array<double, 2> cw = {1.0, 0.5};
    const int loss = tape.lin_comb(parts, cw);
    if (with_grad) tape.backward(loss);
    return tape.value(loss);
  };
  auto res = grad_check(f, params, 1e-5);
  CHECK(res.max_rel_err < 1e-7);
}

TEST_CASE("kmeans: k=1 gives the mean") {
  std::vector<std::vector<double>> pts = {{1, 2}, {3, 4}, {5, 0}};
  auto res = kmeans(pts, 1, 42, 50);
  CHECK(res.centroids[0][0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(res.centroids[0][1] == doctest::Approx(2.0).epsilon(1e-12));
  for (int l : res.labels) CHECK(l == 0);
}

TEST_CASE("kmeans: two well-separated blobs vs brute force over 2-partitions") {
  // 8 points: two blobs of radius <= 0.1 at (0,0) and (10,10).
  SeededRng rng(11);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 4; ++i)
    pts.push_back({rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)});
  for (int i = 0; i < 4; ++i)
    pts.push_back({10 + rng.uniform(-0.1, 0.1), 10 + rng.uniform(-0.1, 0.1)});

  // Brute-force optimum over all 2-partitions of n=8 points.
  double best_wcss = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_centroids;
  for (unsigned mask = 1; mask < 255; ++mask) {
    std::vector<std::vector<double>> groups[2];
    for (int i = 0; i < 8; ++i) groups[(mask >> i) & 1].push_back(pts[i]);
    if (groups[0].empty() || groups[1].empty()) continue;
    std::vector<std::vector<double>> cents;
    double wcss = 0.0;
    for (auto& g : groups) {
      std::vector<double> c(2, 0.0);
      for (auto& p : g) {
        c[0] += p[0];
        c[1] += p[1];
      }
      c[0] /= g.size();
      c[1] /= g.size();
      for (auto& p : g)
        wcss += (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]);
      cents.push_back(c);
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_centroids = cents;
    }
  }

  auto res = kmeans(pts, 2, 7, 100);
  // Match each returned centroid to the nearest brute-force centroid.
  for (const auto& c : res.centroids) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& bc : best_centroids) {
      const double d = std::hypot(c[0] - bc[0], c[1] - bc[1]);
      best = std::min(best, d);
    }
    CHECK(best < 0.2);
  }
}

TEST_CASE("kmeans: identical points, k=2") {
  std::vector<std::vector<double>> pts(5, {3.0, -1.0});
  auto res = kmeans(pts, 2, 3, 10);
  for (const auto& c : res.centroids) {
    CHECK(c[0] == doctest::Approx(3.0));
    CHECK(c[1] == doctest::Approx(-1.0));
  }
}

TEST_CASE("kmeans: objective monotone non-increasing") {
  SeededRng rng(17);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 60; ++i)
    pts.push_back({rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)});
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto res = kmeans(pts, 4, seed, 50);
    for (size_t i = 1; i < res.wcss_history.size(); ++i)
      CHECK(res.wcss_history[i] <= res.wcss_history[i - 1] + 1e-9);
  }
}

TEST_CASE("kmeans: argument validation") {
  std::vector<std::vector<double>> pts = {{0.0}, {1.0}};
  CHECK_THROWS_AS(kmeans(pts, 0, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(pts, 3, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(pts, 1, 1, 0), std::invalid_argument);
}
