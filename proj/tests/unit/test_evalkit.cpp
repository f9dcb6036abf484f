#include <doctest.h>

#include <cmath>

#include "f2p/evalkit/evalkit.hpp"
#include "f2p/renderer/render.hpp"

using namespace f2p;

namespace {

std::vector<evalkit::Embedding> gaussian_cloud(std::size_t n, std::size_t d, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<evalkit::Embedding> out(n, evalkit::Embedding(d));
  for (auto& e : out)
    for (std::size_t k = 0; k < d; ++k) e[k] = normal(rng) * (1.0 + 0.1 * k) + shift;
  return out;
}

}  // namespace

TEST_CASE("Fréchet distance of a set with itself is zero") {
  const auto a = gaussian_cloud(60, 8, 0.0, 1);
  CHECK(evalkit::frechet_distance(a, a) <= 1e-6);
}

TEST_CASE("Fréchet distance is symmetric and order invariant") {
  const auto a = gaussian_cloud(60, 8, 0.0, 1), b = gaussian_cloud(50, 8, 0.5, 2);
  const double ab = evalkit::frechet_distance(a, b);
  CHECK(ab > 0.5);
  CHECK(ab == evalkit::frechet_distance(b, a));
  auto shuffled = a;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(ab == evalkit::frechet_distance(shuffled, b));
}

TEST_CASE("Fréchet distance of equal-covariance clouds reduces to the mean gap") {
  const auto a = gaussian_cloud(80, 4, 0.0, 3);
  auto b = a;
  for (auto& e : b)
    for (auto& v : e) v += 2.0;
  CHECK(evalkit::frechet_distance(a, b) == doctest::Approx(16.0).epsilon(1e-4));
}

TEST_CASE("Fréchet distance rejects mismatched dimensions and tiny sets") {
  CHECK_THROWS_AS(evalkit::frechet_distance(gaussian_cloud(10, 3, 0, 1), gaussian_cloud(10, 4, 0, 1)), Error);
  CHECK_THROWS_AS(evalkit::frechet_distance(gaussian_cloud(1, 3, 0, 1), gaussian_cloud(10, 3, 0, 1)), Error);
}

TEST_CASE("targets are reproducible and shifted only when asked") {
  const auto a = evalkit::make_target(5, 2, 0.0f), b = evalkit::make_target(5, 2, 0.0f);
  CHECK(a.truth == b.truth);
  CHECK(a.image.pixels == b.image.pixels);
  CHECK(a.image.pixels == render::render(a.truth).image.pixels);
  CHECK(evalkit::make_target(5, 2, 0.8f).image.pixels != a.image.pixels);
  CHECK(evalkit::make_target(5, 3, 0.0f).truth != a.truth);
}

TEST_CASE("aggregates of an empty report are zero") {
  const evalkit::RecoveryReport report;
  CHECK(report.mae().mean == 0.0);
  CHECK(report.coordinates() == 0);
  CHECK(report.json()["n"] == 0);
  const auto agg = evalkit::aggregate({1.0, 3.0});
  CHECK(agg.mean == 2.0);
  CHECK(agg.stddev == doctest::Approx(1.0));
}

TEST_CASE("contact sheet lays images side by side") {
  const auto face = render::render(render::ParamVector::average_face()).image;
  const auto sheet = evalkit::contact_sheet({{face, face, face}, {face, face, face}});
  CHECK(sheet.width == 3 * face.width);
  CHECK(sheet.height == 2 * face.height);
  CHECK(sheet.at(face.height + 5, 2 * face.width + 7, 1) == face.at(5, 7, 1));
  const auto ragged = evalkit::contact_sheet({{face}, {face, face}});
  CHECK(ragged.width == 2 * face.width);
  CHECK(ragged.at(3, face.width + 3, 0) == 1.0f);
  CHECK_THROWS_AS(evalkit::contact_sheet({{face, render::center_crop_resize(face, 32)}}), Error);
}
