#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "loracell/deployment.hpp"
#include "loracell/quadrature.hpp"
#include "support/oracles.hpp"

using namespace loracell;

namespace {

const PhyConfig kPhy;  // stock EU868 setup, alpha = 4
const CaptureThresholds kThresholds = CaptureThresholds::lora_defaults();

}  // namespace

TEST_SUITE("deployment") {

TEST_CASE("cell pdf") {
  const double R = 3.0;
  CHECK(cell_pdf(R, R) == doctest::Approx(2.0 / R));
  CHECK(cell_pdf(1.5 * R, R) == 0.0);
  CHECK(cell_pdf(-0.1, R) == 0.0);
  const auto res = integrate([&](double r) { return cell_pdf(r, R); }, 0.0, R);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform allocation") {
  const auto alloc = uniform_allocation(10.0);
  double total = 0.0;
  for (const auto sf : SpreadingFactor::all()) {
    CHECK(alloc.fraction[sf.index()] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    total += alloc.fraction[sf.index()];
    CHECK(alloc.support[sf.index()] == Annulus{0.0, 10.0});
    for (double r : {0.5, 5.0, 10.0}) {
      CHECK(alloc.pdf(sf, r) == doctest::Approx(cell_pdf(r, 10.0)).epsilon(1e-12));
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance allocation matches the sensitivity gaps") {
  const auto alloc = distance_allocation(kPhy, kThresholds);
  const double R = alloc.cell_radius;

  // Borders follow 10^(gap_dB / (10 alpha)) of the sensitivity gap to SF12;
  // with alpha = 4 the SF7 border sits at 10^(-14/40) = 0.447 R.
  const std::array<double, 6> expected_border = {0.446684, 0.530884, 0.630957,
                                                 0.749894, 0.865964, 1.0};
  const std::array<double, 6> expected_fraction = {0.199526, 0.082312, 0.116269,
                                                   0.164234, 0.187553, 0.250106};
  // Published two-decimal figures for the same scheme.
  const std::array<double, 6> table_border = {0.45, 0.54, 0.64, 0.76, 0.88, 1.0};
  const std::array<double, 6> table_fraction = {0.2, 0.08, 0.11, 0.17, 0.25, 0.25};

  double total = 0.0;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    CHECK(alloc.border[i] / R == doctest::Approx(expected_border[i]).epsilon(1e-5));
    CHECK(alloc.fraction[i] == doctest::Approx(expected_fraction[i]).epsilon(1e-4));
    CHECK(std::abs(alloc.border[i] / R - table_border[i]) < 0.015);
    total += alloc.fraction[i];
  }
  CHECK(std::abs(alloc.fraction[0] - table_fraction[0]) < 0.015);
  CHECK(std::abs(alloc.fraction[5] - table_fraction[5]) < 0.015);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // Annuli partition the disc.
  CHECK(alloc.support[0].inner == 0.0);
  for (int i = 1; i < kSpreadingFactorCount; ++i) {
    CHECK(alloc.support[i].inner == alloc.border[i - 1]);
    CHECK(alloc.border[i] >= alloc.border[i - 1]);
  }
  CHECK(alloc.border[5] == doctest::Approx(R));
}

TEST_CASE("default cell radius is the raw SF12 sensitivity range") {
  CHECK(resolved_cell_radius(kPhy, kThresholds) ==
        doctest::Approx(1107.2861).epsilon(1e-6));
  PhyConfig phy = kPhy;
  phy.cell_radius = 500.0;
  const auto alloc = distance_allocation(phy, kThresholds);
  CHECK(alloc.cell_radius == 500.0);
  CHECK(alloc.border[5] == doctest::Approx(500.0));
  // Rescaling preserves the ratios.
  CHECK(alloc.border[0] / 500.0 == doctest::Approx(0.446684).epsilon(1e-5));
}

TEST_CASE("eqload allocation balances per-SF load") {
  const auto alloc = eqload_allocation(kPhy, kThresholds);
  // Hand evaluation of the six airtimes gives sum(1/T_f) = 22.0449 and
  // delta_7 = (1/0.09728)/22.0449 = 0.4663.
  const std::array<double, 6> expected = {0.466303, 0.260581, 0.138434,
                                          0.073831, 0.039553, 0.021298};
  const std::array<double, 6> table = {0.47, 0.25, 0.14, 0.08, 0.04, 0.02};
  const auto timings = frame_airtimes(kPhy);
  double total = 0.0;
  double load = alloc.fraction[0] * timings[0].airtime_s;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    CHECK(alloc.fraction[i] == doctest::Approx(expected[i]).epsilon(2e-4));
    CHECK(std::abs(alloc.fraction[i] - table[i]) < 0.015);
    CHECK(alloc.fraction[i] * timings[i].airtime_s == doctest::Approx(load).epsilon(1e-9));
    total += alloc.fraction[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // Same annuli as the distance scheme.
  const auto dist = distance_allocation(kPhy, kThresholds);
  CHECK(alloc.border == dist.border);
}

TEST_CASE("mixture density integrates to one") {
  for (const Scheme scheme : {Scheme::uniform, Scheme::distance, Scheme::eqload}) {
    const auto alloc = make_allocation(scheme, kPhy, kThresholds);
    double mass = 0.0;
    for (const auto sf : SpreadingFactor::all()) {
      const Annulus& a = alloc.support[sf.index()];
      const auto res =
          integrate([&](double r) { return alloc.pdf(sf, r); }, a.inner, a.outer, 1e-11);
      CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
      mass += alloc.fraction[sf.index()] * res.value;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sample_device draws SFs multinomially") {
  const auto alloc = uniform_allocation(1.0);
  Rng rng(20240601);
  constexpr int kDraws = 600000;
  std::array<int, 6> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const auto device = sample_device(alloc, i, 1.0 / 600, rng);
    ++counts[device.sf.index()];
    CHECK(alloc.support[device.sf.index()].contains(device.distance));
  }
  const double expected = kDraws / 6.0;
  const double sigma = std::sqrt(kDraws * (1.0 / 6) * (5.0 / 6));
  for (int c : counts) {
    CHECK(std::abs(c - expected) < 3.0 * sigma);
  }
}

TEST_CASE("sample_device respects the distance scheme geometry") {
  const auto alloc = distance_allocation(kPhy, kThresholds);
  Rng rng(77);
  constexpr int kDraws = 200000;
  int inside_l7 = 0;
  std::array<int, 6> annulus_counts{};
  for (int i = 0; i < kDraws; ++i) {
    const auto device = sample_device(alloc, i, 1.0 / 600, rng);
    if (device.distance <= alloc.border[0]) ++inside_l7;
    ++annulus_counts[device.sf.index()];
    CHECK(alloc.support[device.sf.index()].contains(device.distance));
  }
  // P(r <= l_7) equals delta_7 by construction: positions inside the first
  // annulus are exactly the SF7 population.
  const double p7 = alloc.fraction[0];
  const double sigma7 = std::sqrt(kDraws * p7 * (1 - p7));
  CHECK(std::abs(inside_l7 - kDraws * p7) < 3.0 * sigma7);
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    const double p = alloc.fraction[i];
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    CHECK(std::abs(annulus_counts[i] - kDraws * p) < 3.0 * sigma);
  }
}

TEST_CASE("eqload occupancy matches its fractions") {
  const auto alloc = eqload_allocation(kPhy, kThresholds);
  Rng rng(4242);
  constexpr int kDraws = 200000;
  std::array<int, 6> counts{};
  for (int i = 0; i < kDraws; ++i) {
    ++counts[sample_device(alloc, i, 1.0 / 600, rng).sf.index()];
  }
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    const double p = alloc.fraction[i];
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    CHECK(std::abs(counts[i] - kDraws * p) < 3.0 * sigma);
  }
}

TEST_CASE("inverse-CDF sampling passes a KS test") {
  const auto alloc = distance_allocation(kPhy, kThresholds);
  constexpr int kSamples = 100000;
  // 1% critical value of the KS statistic.
  const double critical = 1.6276 / std::sqrt(static_cast<double>(kSamples));
  for (const int sf_value : {7, 12}) {
    const SpreadingFactor sf(sf_value);
    Rng rng(900 + sf_value);
    std::vector<double> radii;
    radii.reserve(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      radii.push_back(alloc.radius_from_cdf(sf, rng.uniform()));
    }
    const double d = testing::ks_statistic(
        radii, [&](double r) { return alloc.cdf(sf, r); });
    CHECK(d < critical);
  }
}

TEST_CASE("single-SF degenerate cell") {
  const auto alloc = single_sf_allocation(SpreadingFactor(9), 2.0);
  CHECK(alloc.fraction[SpreadingFactor(9).index()] == 1.0);
  CHECK(alloc.fraction[0] == 0.0);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_device(alloc, i, 0.001, rng).sf == SpreadingFactor(9));
  }
}

}  // TEST_SUITE
