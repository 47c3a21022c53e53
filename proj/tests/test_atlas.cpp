#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kcplan;
using kcplan::problems::vec;
using kcplan::fixtures::max_abs;

TEST(Chart, NewChartProjectors) {
  const auto circle = fixtures::unit_circle();
  Matrix vertical(2, 2);
  vertical << 0, 0, 0, 1;
  EXPECT_LE(max_abs(new_chart(circle, vec({1, 0})).tangent().projector() - vertical), 1e-12);

  const auto sphere = fixtures::unit_sphere();
  const Matrix flat = Vector(vec({1, 1, 0})).asDiagonal();
  EXPECT_LE(max_abs(new_chart(sphere, vec({0, 0, 1})).tangent().projector() - flat), 1e-12);

  const auto torus = fixtures::torus();
  const Vector x = vec({2.5, 0, 0});
  EXPECT_LE(max_abs(new_chart(torus, x).tangent().projector() -
                    fixtures::nullspace_projector(torus.jacobian(x))),
            1e-12);
}

TEST(Chart, CenterMustBeOnManifold) {
  EXPECT_THROW(new_chart(fixtures::unit_circle(), vec({1.1, 0})), std::invalid_argument);
  EXPECT_THROW(new_chart(fixtures::unit_circle(), vec({0, 0})), std::invalid_argument);
}

TEST(Chart, ZeroCoordinateIsCenter) {
  std::mt19937_64 rng(2);
  const auto sys = fixtures::torus();
  for (const Vector& c : fixtures::manifold_points(sys, 50, rng)) {
    const Chart chart = new_chart(sys, c);
    const ProjectionResult pr = chart_point_to_manifold(sys, chart, Vector::Zero(2));
    ASSERT_TRUE(pr.ok());
    EXPECT_EQ(pr.point, c);
  }
}

TEST(Chart, ClosedFormLifts) {
  const auto circle = fixtures::unit_circle();
  const Chart c1 = new_chart(circle, vec({1, 0}));
  // Basis sign is free; express the displacement in chart coordinates.
  const Vector u1 = c1.coordinates(vec({1, 0.1}));
  const ProjectionResult p1 = chart_point_to_manifold(circle, c1, u1);
  ASSERT_TRUE(p1.ok());
  EXPECT_LE(max_abs(p1.point - vec({std::sqrt(0.99), 0.1})), 1e-9);

  const auto sphere = fixtures::unit_sphere();
  const Chart c2 = new_chart(sphere, vec({0, 0, 1}));
  const Vector u2 = c2.coordinates(vec({0.3, 0, 1}));
  EXPECT_NEAR(u2.norm(), 0.3, 1e-15);
  const ProjectionResult p2 = chart_point_to_manifold(sphere, c2, u2);
  ASSERT_TRUE(p2.ok());
  EXPECT_LE(max_abs(p2.point - vec({0.3, 0, std::sqrt(0.91)})), 1e-9);
}

TEST(Chart, NonFiniteCoordinatesRejected) {
  const auto circle = fixtures::unit_circle();
  const Chart c = new_chart(circle, vec({1, 0}));
  EXPECT_THROW(chart_point_to_manifold(circle, c, vec({NAN})), std::invalid_argument);
  EXPECT_THROW(chart_point_to_manifold(circle, c, vec({0, 0})), std::invalid_argument);
}

TEST(Chart, CropMustContainOrigin) {
  Chart c = new_chart(fixtures::unit_sphere(), vec({0, 0, 1}));
  EXPECT_THROW(c.add_crop(vec({1, 0}), 0.0), std::invalid_argument);
  EXPECT_THROW(c.add_crop(vec({1, 0, 0}), 1.0), std::invalid_argument);
  c.add_crop(vec({1, 0}), 0.5);
  EXPECT_TRUE(c.inside_crops(vec({0.5, 3})));
  EXPECT_FALSE(c.inside_crops(vec({0.51, 0})));
}

TEST(NeedNewChart, FlatRegion) {
  const auto sphere = fixtures::unit_sphere();
  const Chart c = new_chart(sphere, vec({0, 0, 1}));
  const Vector x = vec({0.01, 0, 1});
  EXPECT_FALSE(need_new_chart(c, x, x, 0.1, 0.86, 1.0));
}

TEST(NeedNewChart, SpanTest) {
  const auto sphere = fixtures::unit_sphere();
  const Chart c = new_chart(sphere, vec({0, 0, 1}));
  const Vector x = vec({0.12, 0, 1});
  EXPECT_TRUE(need_new_chart(c, x, x, 10.0, 0.0, 0.1));
  EXPECT_FALSE(need_new_chart(c, x, x, 10.0, 0.0, 0.13));
}

TEST(NeedNewChart, CircleChordThreshold) {
  // Chord error of the orthogonal lift on the unit circle is 1 - sqrt(1 - u^2),
  // which reaches 0.1 at u = sqrt(0.19).
  const auto circle = fixtures::unit_circle();
  const Chart c = new_chart(circle, vec({1, 0}));
  const double threshold = std::sqrt(0.19);
  EXPECT_NEAR(threshold, 0.43589, 1e-5);
  auto fires = [&](double u) {
    const Vector x_prime = vec({1, u});
    const ProjectionResult pr = project_orthogonal(circle, c.tangent(), x_prime);
    EXPECT_TRUE(pr.ok());
    return need_new_chart(c, pr.point, x_prime, 0.1, 0.0, 10.0);
  };
  EXPECT_FALSE(fires(0.43));
  EXPECT_TRUE(fires(0.44));
}

TEST(NeedNewChart, CurvatureProxy) {
  const auto circle = fixtures::unit_circle();
  const Chart c = new_chart(circle, vec({1, 0}));
  // At angle t the tangential fraction of the displacement is cos(t / 2).
  const double t = 1.2;
  const Vector x = vec({std::cos(t), std::sin(t)});
  EXPECT_TRUE(need_new_chart(c, x, x, 10.0, std::cos(t / 2) + 1e-9, 10.0));
  EXPECT_FALSE(need_new_chart(c, x, x, 10.0, std::cos(t / 2) - 1e-9, 10.0));
}

TEST(Atlas, ParameterValidation) {
  const auto sys = fixtures::unit_circle();
  EXPECT_THROW(Atlas(sys, AtlasParams::with_defaults(1.0, 0.5, 0.1)), std::invalid_argument);
  EXPECT_THROW(Atlas(sys, AtlasParams::with_defaults(0.0, 1.0, 0.1)), std::invalid_argument);
  EXPECT_THROW(Atlas(sys, AtlasParams::with_defaults(0.5, 1.0, 1.0)), std::invalid_argument);
  EXPECT_NO_THROW(Atlas(sys, AtlasParams::with_defaults(0.5, 0.5, 0.0)));
}

TEST(Atlas, CircleCoordination) {
  const auto sys = fixtures::unit_circle();
  constexpr double rho = 0.5;
  Atlas atlas(sys, AtlasParams::with_defaults(rho, rho, 0.1));
  const std::size_t a = atlas.add_chart(vec({1, 0}));
  const std::size_t b = atlas.add_chart(vec({std::cos(rho), std::sin(rho)}));
  const Chart& ca = atlas.chart(a);
  const Chart& cb = atlas.chart(b);
  ASSERT_EQ(ca.crops().size(), 1u);
  ASSERT_EQ(cb.crops().size(), 1u);
  EXPECT_NEAR(ca.crops()[0].offset, std::sin(rho) / 2, 1e-12);
  EXPECT_NEAR(cb.crops()[0].offset, std::sin(rho) / 2, 1e-12);
  EXPECT_EQ(ca.neighbors(), std::vector<std::size_t>{b});
  EXPECT_EQ(cb.neighbors(), std::vector<std::size_t>{a});

  // Lift each crop boundary to the circle and read off its angle.
  auto boundary_angle = [&](const Chart& c) {
    const Vector u = c.crops()[0].normal * c.crops()[0].offset;
    const ProjectionResult pr = chart_point_to_manifold(sys, c, u);
    EXPECT_TRUE(pr.ok());
    return std::atan2(pr.point[1], pr.point[0]);
  };
  const double end_a = boundary_angle(ca);
  const double start_b = boundary_angle(cb);
  EXPECT_NEAR(end_a, std::asin(std::sin(rho) / 2), 1e-12);
  EXPECT_NEAR(start_b, rho - std::asin(std::sin(rho) / 2), 1e-12);
  // The cropped regions do not overlap; the sliver between them is third order in rho.
  EXPECT_LE(end_a, start_b);
  EXPECT_LE(start_b - end_a, rho * rho * rho / 4);
}

TEST(Atlas, FarChartsAreNotCoordinated) {
  const auto sys = fixtures::unit_sphere();
  Atlas atlas(sys, AtlasParams::with_defaults(0.25, 0.5, 0.1));
  atlas.add_chart(vec({0, 0, 1}));
  atlas.add_chart(vec({0, 0, -1}));
  EXPECT_TRUE(atlas.chart(0).crops().empty());
  EXPECT_TRUE(atlas.chart(1).crops().empty());
  EXPECT_THROW(atlas.coordinate_charts(0, 0), std::invalid_argument);
}

TEST(Atlas, SingleChartAcceptsEverything) {
  const auto sys = fixtures::unit_sphere();
  Atlas atlas(sys, AtlasParams::with_defaults(0.25, 0.5, 0.1));
  atlas.add_chart(vec({0, 0, 1}));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) ASSERT_TRUE(atlas.sample(rng));
  EXPECT_EQ(atlas.draws(), 1000u);
  EXPECT_EQ(atlas.rejections(), 0u);
}

TEST(Atlas, HalfPlaneHalvesAcceptance) {
  const auto sys = fixtures::unit_sphere();
  Atlas atlas(sys, AtlasParams::with_defaults(0.25, 0.5, 0.1));
  atlas.add_chart(vec({0, 0, 1}));
  atlas.chart(0).add_crop(vec({0.6, 0.8}), 1e-12);
  std::mt19937_64 rng(4);
  while (atlas.draws() < 100000) {
    const auto s = atlas.sample(rng);
    ASSERT_TRUE(s);
    EXPECT_LE(s->u.norm(), atlas.effective_radius());
    EXPECT_TRUE(atlas.chart(0).inside_crops(s->u));
    EXPECT_EQ(s->point, atlas.chart(0).lift(s->u));
  }
  const double n = static_cast<double>(atlas.draws());
  const double accept = 1.0 - static_cast<double>(atlas.rejections()) / n;
  EXPECT_NEAR(accept, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(Atlas, ExhaustionReturnsNothing) {
  const auto sys = fixtures::unit_circle();
  AtlasParams p = AtlasParams::with_defaults(0.25, 0.5, 0.1);
  p.max_sampling_attempts = 10;
  Atlas atlas(sys, p);
  atlas.add_chart(vec({1, 0}));
  atlas.chart(0).add_crop(vec({1}), 1e-300);
  atlas.chart(0).add_crop(vec({-1}), 1e-300);
  std::mt19937_64 rng(5);
  EXPECT_FALSE(atlas.sample(rng));
  EXPECT_EQ(atlas.exhausted(), 1u);
  EXPECT_EQ(atlas.rejections(), 10u);
}

TEST(Atlas, ScalingArithmetic) {
  const auto sys = fixtures::unit_circle();
  Atlas up(sys, AtlasParams::with_defaults(1.0, 10.0, 0.1));
  up.update_scaling(BranchOutcome::Succeeded);
  EXPECT_EQ(up.scaling(), 1.0 * (1.0 + 0.1));
  EXPECT_EQ(up.scaling(), 1.1);
  Atlas down(sys, AtlasParams::with_defaults(1.0, 10.0, 0.1));
  down.update_scaling(BranchOutcome::Collided);
  EXPECT_EQ(down.scaling(), 0.9);
  EXPECT_EQ(down.effective_radius(), 9.0);
}

TEST(Atlas, RadiusFloor) {
  const auto sys = fixtures::unit_circle();
  Atlas atlas(sys, AtlasParams::with_defaults(1.0, 10.0, 0.95));
  atlas.update_scaling(BranchOutcome::Collided);
  EXPECT_NEAR(atlas.scaling(), 0.05, 1e-15);
  EXPECT_EQ(atlas.effective_radius(), 1.0);
  for (int i = 0; i < 100; ++i) atlas.update_scaling(BranchOutcome::Collided);
  EXPECT_GT(atlas.scaling(), 0.0);
  EXPECT_EQ(atlas.effective_radius(), 1.0);
  EXPECT_EQ(atlas.floor_violations(), 0u);
}

TEST(Atlas, ZeroAlphaFreezesScaling) {
  const auto sys = fixtures::unit_circle();
  Atlas atlas(sys, AtlasParams::with_defaults(0.5, 2.0, 0.0));
  atlas.update_scaling(BranchOutcome::Collided);
  atlas.update_scaling(BranchOutcome::Succeeded);
  EXPECT_EQ(atlas.scaling(), 1.0);
}
