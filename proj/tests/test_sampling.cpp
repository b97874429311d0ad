#include <doctest.h>

#include <cmath>
#include <set>

#include "sparkmri/rng.hpp"
#include "sparkmri/sampling.hpp"

using namespace sparkmri;

TEST_SUITE("sampling") {

TEST_CASE("uniform_1d: R=1 samples everything") {
  const SamplingMask m = uniform_1d(8, 1, 0);
  CHECK(m.count() == 8);
  CHECK(m.net_acceleration() == doctest::Approx(1.0));
}

TEST_CASE("uniform_1d: lattice anchored at zero") {
  const SamplingMask m = uniform_1d(12, 4, 0);
  std::set<std::int64_t> expect{0, 4, 8};
  for (std::int64_t pe = 0; pe < 12; ++pe) CHECK(m.sampled(pe, 0) == (expect.count(pe) == 1));
  CHECK(m.net_acceleration() == doctest::Approx(4.0));
}

TEST_CASE("uniform_1d: lattice union centered ACS, enumerated") {
  const SamplingMask m = uniform_1d(188, 5, 30);
  // independent enumeration of the definition
  std::set<std::int64_t> expect;
  for (std::int64_t pe = 0; pe < 188; pe += 5) expect.insert(pe);
  const std::int64_t lo = 94 - 15;  // floor(188/2) - floor(30/2)
  for (std::int64_t pe = lo; pe < lo + 30; ++pe) expect.insert(pe);
  std::int64_t count = 0;
  for (std::int64_t pe = 0; pe < 188; ++pe) {
    CHECK(m.sampled(pe, 0) == (expect.count(pe) == 1));
    count += m.sampled(pe, 0);
  }
  CHECK(count == static_cast<std::int64_t>(expect.size()));
  CHECK(m.net_acceleration() == doctest::Approx(188.0 / static_cast<double>(expect.size())));
  REQUIRE(m.acs.has_value());
  CHECK(m.acs->pe_lo == lo);
  CHECK(m.acs->pe_hi == lo + 29);
}

TEST_CASE("acs bounds index fully sampled entries at the declared rate") {
  for (const SamplingMask& m :
       {uniform_1d(128, 4, 24), uniform_2d(48, 36, 4, 3, 12, 12),
        hybrid_mask(48, 48, 24, 24, {3, 2}, {4, 3}, true)}) {
    REQUIRE(m.acs.has_value());
    for (std::int64_t pe = m.acs->pe_lo; pe <= m.acs->pe_hi; ++pe)
      for (std::int64_t pa = m.acs->pa_lo; pa <= m.acs->pa_hi; ++pa)
        if (pe % m.acs->r_pe == 0 && pa % m.acs->r_pa == 0) CHECK(m.sampled(pe, pa));
  }
}

TEST_CASE("uniform_2d lattice and ACS block") {
  CHECK(uniform_2d(6, 6, 1, 1, 0, 0).count() == 36);
  const SamplingMask m = uniform_2d(6, 6, 2, 3, 0, 0);
  CHECK(m.count() == 6);
  CHECK(m.net_acceleration() == doctest::Approx(6.0));
  const SamplingMask with_acs = uniform_2d(40, 40, 4, 3, 12, 12);
  for (std::int64_t pe = with_acs.acs->pe_lo; pe <= with_acs.acs->pe_hi; ++pe)
    for (std::int64_t pa = with_acs.acs->pa_lo; pa <= with_acs.acs->pa_hi; ++pa)
      CHECK(with_acs.sampled(pe, pa));
  CHECK(with_acs.sampled(0, 0));
  CHECK_FALSE(with_acs.sampled(1, 0));
}

TEST_CASE("caipi: zero shift reduces to the plain lattice") {
  const SamplingMask a = caipi_2d(8, 6, 2, 3, 0);
  const SamplingMask b = uniform_2d(8, 6, 2, 3, 0, 0);
  CHECK(a.grid == b.grid);
}

TEST_CASE("caipi: partition-dependent phase offsets") {
  const SamplingMask m = caipi_2d(8, 6, 2, 3, 1);
  for (std::int64_t pe = 0; pe < 8; ++pe)
    for (std::int64_t pa = 0; pa < 6; ++pa) {
      const bool expect = (pa % 3 == 0) && (pe % 2 == static_cast<std::int64_t>((pa / 3) % 2));
      CHECK(m.sampled(pe, pa) == expect);
    }
  CHECK(m.count() == 8 * 6 / (2 * 3));
  // adjacent sampled partitions differ by `shift` in their phase offset
  const SamplingMask s = caipi_2d(15, 12, 5, 3, 2);
  std::vector<std::int64_t> offsets;
  for (std::int64_t pa = 0; pa < 12; pa += 3)
    for (std::int64_t pe = 0; pe < 15; ++pe)
      if (s.sampled(pe, pa)) {
        offsets.push_back(pe % 5);
        break;
      }
  for (std::size_t i = 1; i < offsets.size(); ++i)
    CHECK((offsets[i] - offsets[i - 1] + 5) % 5 == 2);
}

TEST_CASE("elliptical filter clears corners, keeps the center, area ~ pi/4") {
  SamplingMask full = uniform_2d(256, 256, 1, 1, 0, 0);
  const SamplingMask f = elliptical_filter(full);
  CHECK_FALSE(f.sampled(0, 0));
  CHECK(f.sampled(128, 128));
  const double frac = static_cast<double>(f.count()) / (256.0 * 256.0);
  CHECK(std::abs(frac - M_PI / 4.0) < 0.02);
}

TEST_CASE("elliptical filter leaves a declared ACS block alone") {
  SamplingMask m = uniform_2d(32, 32, 1, 1, 0, 0);
  m.acs = AcsRegion{0, 3, 0, 3, 1, 1};  // corner block, outside the ellipse
  const SamplingMask f = elliptical_filter(m);
  CHECK(f.sampled(0, 0));
  CHECK_FALSE(f.sampled(0, 31));
}

TEST_CASE("hybrid: unit rates cover the grid") {
  CHECK(hybrid_mask(16, 16, 8, 8, {1, 1}, {1, 1}, false).count() == 256);
}

TEST_CASE("hybrid: ACS covering the grid degenerates to the ACS lattice") {
  const SamplingMask m = hybrid_mask(48, 48, 48, 48, {3, 2}, {4, 3}, false);
  CHECK(m.count() == 48 * 48 / 6);
}

TEST_CASE("hybrid: paper-shaped mask lands at net acceleration ~12") {
  const SamplingMask m = hybrid_mask(112, 96, 48, 48, {3, 2}, {4, 3}, true);
  CHECK(m.net_acceleration() > 11.0);
  CHECK(m.net_acceleration() < 13.0);
}

TEST_CASE("apply_mask basics") {
  ComplexTensor t({2, 4, 4, 2});
  CounterRng rng{1};
  for (std::int64_t i = 0; i < t.size(); ++i) t.v[i] = rng.cgauss(static_cast<std::uint64_t>(i));
  const KspaceData ksp(t);
  const SamplingMask all = uniform_2d(4, 4, 1, 1, 0, 0);
  CHECK(apply_mask(ksp, all).t.v == ksp.t.v);

  SamplingMask none = all;
  none.grid.assign(none.grid.size(), 0);
  for (const auto& z : apply_mask(ksp, none).t.v) CHECK(z == cplx{0.0, 0.0});

  const SamplingMask lattice = uniform_2d(4, 4, 2, 2, 0, 0);
  const KspaceData once = apply_mask(ksp, lattice);
  CHECK(apply_mask(once, lattice).t.v == once.t.v);
}

TEST_CASE("strip_acs keeps only the lattice") {
  const SamplingMask m = uniform_1d(24, 4, 8);
  const SamplingMask lat = strip_acs(m);
  for (std::int64_t pe = 0; pe < 24; ++pe) CHECK(lat.sampled(pe, 0) == (pe % 4 == 0));
  CHECK_FALSE(lat.acs.has_value());
}

}  // TEST_SUITE
