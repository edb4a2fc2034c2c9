#include "foldopt/error.hpp"
#include "foldopt/fixtures.hpp"
#include "foldopt/image.hpp"
#include "foldopt/registration.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

using namespace foldopt;

namespace {

Mask disk_mask(int n, double radius_cells) {
  Mask m(n, n, 1e-3, Vec2::Zero());
  const Vec2 c = m.cell_center(n / 2, n / 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m.set(i, j, (m.cell_center(i, j) - c).norm() <= radius_cells * m.resolution);
  return m;
}

// All-pairs nearest opposite-class cell center, minus half a cell.
double brute_distance(const Mask& m, int i, int j) {
  double best = std::numeric_limits<double>::infinity();
  for (int b = 0; b < m.height; ++b)
    for (int a = 0; a < m.width; ++a)
      if (m.at(a, b) != m.at(i, j)) best = std::min(best, std::hypot(double(a - i), double(b - j)));
  const double d = (best - 0.5) * m.resolution;
  return m.at(i, j) ? -d : d;
}

std::vector<Vec2> random_loop(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::vector<Vec2> p;
  for (int k = 0; k < n; ++k) {
    const double a = 2 * kPi * k / n;
    p.emplace_back(jitter(rng) * std::cos(a), jitter(rng) * std::sin(a));
  }
  return p;
}

double angle_oracle_bend(const std::vector<Vec2>& s, const std::vector<Vec2>& ref, std::size_t probe, double* term) {
  const std::size_t n = s.size();
  double e = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t p = (j + n - 1) % n, q = (j + 1) % n;
    auto angle = [](const Vec2& a, const Vec2& b, const Vec2& c) {
      // Interior angle of a counterclockwise loop: turn from (b - a) to (c - b).
      const double turn = std::atan2(cross2(b - a, c - b), (b - a).dot(c - b));
      return kPi - turn;
    };
    const double t = angle(s[p], s[j], s[q]), tr = angle(ref[p], ref[j], ref[q]);
    const double L = 0.5 * ((ref[j] - ref[p]).norm() + (ref[q] - ref[j]).norm());
    const double v = 0.5 * (t / tr - 1.0) * (t / tr - 1.0) * L;
    if (j == probe && term) *term = v;
    e += v;
  }
  return e;
}

using Energy = double (*)(std::span<const Vec2>, std::span<const Vec2>);
using Grad = std::vector<Vec2> (*)(std::span<const Vec2>, std::span<const Vec2>);

void check_gradient(Energy e, Grad g, const std::vector<Vec2>& s, const std::vector<Vec2>& ref) {
  const auto grad = g(s, ref);
  const double h = 1e-6;
  double scale = 0.0;
  for (const Vec2& v : grad) scale = std::max(scale, v.norm());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int c = 0; c < 2; ++c) {
      auto a = s, b = s;
      a[i][c] += h;
      b[i][c] -= h;
      const double fd = (e(a, ref) - e(b, ref)) / (2 * h);
      EXPECT_NEAR(grad[i][c], fd, 1e-5 * std::max(std::abs(fd), scale)) << "vertex " << i << " axis " << c;
    }
}

double feature_error_cells(const FittedContour& fit, const std::map<std::string, Vec2>& truth, double res) {
  double worst = 0.0;
  for (const auto& [id, p] : truth) worst = std::max(worst, (fit.features.at(id) - p).norm() / res);
  return worst;
}

}  // namespace

TEST(DistanceField, DiskCenterIsMinusRadius) {
  const Mask m = disk_mask(101, 30.0);
  const DistanceField f = distance_field(m);
  EXPECT_NEAR(f.at(50, 50), -30.0 * m.resolution, m.resolution);
}

TEST(DistanceField, BoundaryCellsNearZero) {
  const Mask m = disk_mask(81, 25.0);
  const DistanceField f = distance_field(m);
  for (int j = 1; j + 1 < m.height; ++j)
    for (int i = 1; i + 1 < m.width; ++i) {
      const bool edge = m.at(i, j) != m.at(i + 1, j) || m.at(i, j) != m.at(i, j + 1);
      if (edge) EXPECT_LE(std::abs(f.at(i, j)), m.resolution);
    }
}

TEST(DistanceField, MatchesBruteForceOnRandomBlob) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mask m(64, 64, 2e-3, Vec2(-0.1, 0.3));
  double coef[6];
  for (double& c : coef) c = u(rng);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      const double x = (i - 32) / 20.0, y = (j - 32) / 20.0;
      const double r = 1.0 + 0.3 * (coef[0] * std::cos(std::atan2(y, x) * 2 + coef[1]) +
                                    coef[2] * std::sin(std::atan2(y, x) * 3 + coef[3]));
      m.set(i, j, std::hypot(x, y) < r);
    }
  ASSERT_EQ(connected_components(m), 1);
  const DistanceField f = distance_field(m);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) ASSERT_NEAR(f.at(i, j), brute_distance(m, i, j), 1e-12) << i << "," << j;
}

TEST(DistanceField, RejectsEmptyAndFullMasks) {
  Mask empty(40, 40, 1e-3, Vec2::Zero());
  EXPECT_THROW(distance_field(empty), InputError);
  Mask full = empty;
  std::fill(full.cells.begin(), full.cells.end(), 1);
  EXPECT_THROW(distance_field(full), InputError);
}

TEST(DistanceField, BilinearSampleAndGradient) {
  const DistanceField f = distance_field(disk_mask(81, 25.0));
  const Vec2 p = f.origin + Vec2(30.3, 41.7) * f.resolution;
  Vec2 g;
  const double v = f.sample(p, g);
  EXPECT_DOUBLE_EQ(v, f.sample(p));
  const double h = 1e-7;
  EXPECT_NEAR(g.x(), (f.sample(p + Vec2(h, 0)) - f.sample(p - Vec2(h, 0))) / (2 * h), 1e-6);
  EXPECT_NEAR(g.y(), (f.sample(p + Vec2(0, h)) - f.sample(p - Vec2(0, h))) / (2 * h), 1e-6);
  EXPECT_ANY_THROW(f.sample(f.origin - Vec2(1, 1)));
}

TEST(Pgm, RoundTripAndCorruptHeader) {
  const Mask m = disk_mask(40, 12.0);
  std::stringstream ss;
  write_pgm(ss, m);
  const Mask back = read_pgm(ss);
  EXPECT_EQ(back.cells, m.cells);
  EXPECT_EQ(back.resolution, m.resolution);
  std::stringstream bad("P2\n3 3\n255\n");
  EXPECT_THROW(read_pgm(bad), InputError);
}

TEST(FitEnergy, ZeroOnTheZeroLevelSet) {
  // Half-plane mask: foreground for x < 0.02 (cell boundary at 20 cells).
  Mask m(40, 40, 1e-3, Vec2::Zero());
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 20; ++i) m.set(i, j, true);
  const DistanceField f = distance_field(m);
  const std::vector<Vec2> line{{0.020, 0.010}, {0.020, 0.020}, {0.020, 0.030}};
  EXPECT_NEAR(fit_energy(line, f), 0.0, 1e-6);
}

TEST(FitEnergy, ConstantOffsetInHalfPlane) {
  Mask m(60, 40, 1e-3, Vec2::Zero());
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 20; ++i) m.set(i, j, true);
  const DistanceField f = distance_field(m);
  const double d = 0.007;
  const std::vector<Vec2> s{{0.02 + d, 0.010}, {0.02 + d, 0.020}, {0.02 + d, 0.035}};
  // Closed loop: the closing segment also lies at offset d.
  const double expected = d * d * (0.010 + 0.015 + 0.025);
  EXPECT_NEAR(fit_energy(s, f), expected, 1e-12);
}

TEST(FitEnergy, MatchesPerSegmentLoop) {
  const DistanceField f = distance_field(disk_mask(101, 30.0));
  std::mt19937_64 rng(42);
  auto loop = random_loop(rng, 17);
  for (Vec2& p : loop) p = f.origin + Vec2(50.5, 50.5) * f.resolution + 0.03 * p;
  double oracle = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2 &a = loop[i], &b = loop[(i + 1) % loop.size()];
    const double d = f.sample(0.5 * (a + b));
    oracle += d * d * (b - a).norm();
  }
  EXPECT_NEAR(fit_energy(loop, f), oracle, 1e-12);
}

TEST(FitEnergy, RejectsContourOutsideField) {
  const DistanceField f = distance_field(disk_mask(41, 10.0));
  const std::vector<Vec2> s{{-1, -1}, {0.01, 0.0}, {0.0, 0.01}};
  EXPECT_THROW(fit_energy(s, f), InputError);
}

TEST(StretchEnergy, Examples) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(stretch_energy(sq, sq), 0.0);
  for (double s : {0.5, 1.3, 2.0}) {
    std::vector<Vec2> big;
    for (const Vec2& p : sq) big.push_back(s * p);
    EXPECT_NEAR(stretch_energy(big, sq), 0.5 * (s - 1) * (s - 1) * 4.0, 1e-12);
  }
  const Eigen::Rotation2Dd r(0.8);
  std::vector<Vec2> rot;
  for (const Vec2& p : sq) rot.push_back(r * p + Vec2(3, -2));
  EXPECT_NEAR(stretch_energy(rot, sq), 0.0, 1e-12);
  const std::vector<Vec2> tri{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(stretch_energy(tri, sq), InputError);
}

TEST(BendEnergy, Examples) {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(bend_energy(sq, sq), 0.0);
  const Eigen::Rotation2Dd r(-1.1);
  std::vector<Vec2> moved;
  for (const Vec2& p : sq) moved.push_back(r * p + Vec2(0.4, 7.0));
  EXPECT_NEAR(bend_energy(moved, sq), 0.0, 1e-12);
}

TEST(BendEnergy, RightAngleOpenedTo135) {
  // Moving (0, 1) to (-1, 1) opens the corner at the origin from 90 to 135
  // degrees; the opposite corner at (1, 1) closes to compensate.
  const std::vector<Vec2> ref{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Vec2> s{{0, 0}, {1, 0}, {1, 1}, {-1, 1}};
  EXPECT_NEAR(interior_angle(s[3], s[0], s[1]), 0.75 * kPi, 1e-15);
  double term = 0.0;
  const double oracle = angle_oracle_bend(s, ref, 0, &term);
  EXPECT_NEAR(term, 0.125, 1e-15);
  EXPECT_NEAR(bend_energy(s, ref), oracle, 1e-12);
}

TEST(BendEnergy, RejectsDegenerateReference) {
  const std::vector<Vec2> ref{{0, 0}, {1, 0}, {0, 0}, {0, 1}};
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_THROW(bend_energy(sq, ref), InputError);
}

TEST(Gradients, StretchMatchesCentralDifferences) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 5; ++k) check_gradient(stretch_energy, stretch_gradient, random_loop(rng, 12), random_loop(rng, 12));
}

TEST(Gradients, BendMatchesCentralDifferences) {
  std::mt19937_64 rng(44);
  for (int k = 0; k < 5; ++k) check_gradient(bend_energy, bend_gradient, random_loop(rng, 12), random_loop(rng, 12));
}

TEST(Gradients, FitMatchesCentralDifferencesInsideCells) {
  const DistanceField f = distance_field(disk_mask(101, 30.0));
  std::mt19937_64 rng(45);
  auto loop = random_loop(rng, 9);
  for (Vec2& p : loop) p = f.origin + Vec2(50.5, 50.5) * f.resolution + 0.028 * p;
  const auto g = fit_gradient(loop, f);
  const double h = 1e-9;
  for (std::size_t i = 0; i < loop.size(); ++i)
    for (int c = 0; c < 2; ++c) {
      auto a = loop, b = loop;
      a[i][c] += h;
      b[i][c] -= h;
      EXPECT_NEAR(g[i][c], (fit_energy(a, f) - fit_energy(b, f)) / (2 * h), 1e-5 * g[i].norm() + 1e-12);
    }
}

TEST(Resample, WithinBandIsIdentity) {
  const Contour c = make_template({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {"a", "b", "c", "d"});
  Contour plain = c;
  plain.feature_ids = {"a", "", "", "d"};
  const Contour r = resample(plain, 1.5, 0.5);
  EXPECT_EQ(r.points, plain.points);
  EXPECT_EQ(r.feature_ids, plain.feature_ids);
}

TEST(Resample, LongSegmentSplitOnce) {
  Contour c;
  c.points = {{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  c.feature_ids = {"a", "b", "c", "d"};
  const Contour r = resample(c, 1.0, 0.3);
  ASSERT_EQ(r.size(), 6u);
  EXPECT_EQ(r.points[1], Vec2(1, 0));
  EXPECT_FALSE(r.is_feature(1));
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE((r.points[(i + 1) % r.size()] - r.points[i]).norm(), 1.0 + 1e-12);
}

TEST(Resample, FeatureBetweenTinySegmentsKept) {
  Contour c;
  c.points = {{0, 0}, {1, 0}, {1.01, 0}, {1.02, 0}, {1.02, 1}, {0, 1}};
  c.feature_ids = {"a", "", "mid", "", "e", "f"};
  const Contour r = resample(c, 2.0, 0.1);
  const auto feats = r.features();
  EXPECT_EQ(feats.count("mid"), 1u);
  std::vector<std::string> order;
  for (const auto& id : r.feature_ids)
    if (!id.empty()) order.push_back(id);
  EXPECT_EQ(order, (std::vector<std::string>{"a", "mid", "e", "f"}));
}

TEST(Resample, RejectsBadThresholds) {
  const Contour c = make_template({{0, 0}, {1, 0}, {0, 1}}, {"a", "b", "c"});
  EXPECT_THROW(resample(c, 1.0, 0.5), InputError);
}

class SelfRegistration : public ::testing::TestWithParam<GarmentCategory> {};

TEST_P(SelfRegistration, FeaturesWithinTwoCells) {
  const ContourTemplate t = garment_template(GetParam());
  const Mask m = render_mask(garment_contour(GetParam()), kDeskMaskResolution);
  const FittedContour fit = register_contour(t, m);
  EXPECT_LE(feature_error_cells(fit, t.features(), m.resolution), 2.0);
  EXPECT_EQ(fit.features.size(), t.features().size());
}

TEST_P(SelfRegistration, ScaledMaskWithinThreeCells) {
  const ContourTemplate t = garment_template(GetParam());
  Polygon2D scaled = garment_contour(GetParam());
  for (Vec2& p : scaled.points) p *= 1.1;
  const Mask m = render_mask(scaled, kDeskMaskResolution);
  auto truth = t.features();
  for (auto& [id, p] : truth) p *= 1.1;
  EXPECT_LE(feature_error_cells(register_contour(t, m), truth, m.resolution), 3.0);
}

INSTANTIATE_TEST_SUITE_P(Garments, SelfRegistration,
                         ::testing::Values(GarmentCategory::Towel, GarmentCategory::Shirt, GarmentCategory::Pants),
                         [](const auto& info) { return to_string(info.param); });

TEST(Registration, RotatedPantsLandOnTheirLimbs) {
  const ContourTemplate t = garment_template(GarmentCategory::Pants);
  const Contour rotated = perturb_contour(t, deg_to_rad(10.0), 1.0, 0.0, 7);
  const Mask m = render_mask(Polygon2D{rotated.points}, kDeskMaskResolution);
  const FittedContour fit = register_contour(t, m);
  const auto truth = rotated.features();
  std::set<std::string> claimed;
  for (const auto& [id, p] : fit.features) {
    std::string nearest;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [tid, q] : truth)
      if ((p - q).norm() < best) {
        best = (p - q).norm();
        nearest = tid;
      }
    EXPECT_EQ(nearest, id);
    claimed.insert(nearest);
  }
  EXPECT_EQ(claimed.size(), truth.size());
}

TEST(Registration, OptionsValidated) {
  RegistrationOptions o;
  o.split_cells = 2.0;
  o.merge_cells = 1.5;
  EXPECT_THROW(o.validate(), InputError);
  o = RegistrationOptions{};
  o.kappa = -1.0;
  EXPECT_THROW(o.validate(), InputError);
}
