#include <doctest.h>

#include <cmath>

#include "sparkmri/coil.hpp"
#include "sparkmri/fft.hpp"
#include "sparkmri/grappa.hpp"
#include "sparkmri/phantom.hpp"
#include "sparkmri/rng.hpp"

using namespace sparkmri;

namespace {

// Hand-rolled complex Gaussian elimination with partial pivoting; the
// independent solve route for the calibration oracle.
std::vector<std::vector<cplx>> solve_ge(std::vector<std::vector<cplx>> a,
                                        std::vector<std::vector<cplx>> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      for (std::size_t c = 0; c < b[r].size(); ++c) b[r][c] -= f * b[col][c];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t c = 0; c < b[col].size(); ++c) {
      cplx acc = b[col][c];
      for (std::size_t k = col + 1; k < n; ++k) acc -= a[col][k] * b[k][c];
      b[col][c] = acc / a[col][col];
    }
  }
  return b;
}

// Planted-kernel fixture built from unit-modulus exponential modes: the
// separable modes make the lattice interpolation relation hold exactly at
// every anchor, and with n_src modes the generating weights are the unique
// solution, so calibration must recover them.
struct Planted {
  KspaceData full;                      // mode data over the whole grid
  std::vector<Eigen::MatrixXcd> w;      // [offset](coil x n_src)
  int r_pe, r_pa;
  GrappaTaps taps;
};

Planted plant(std::int64_t ro, std::int64_t pe, std::int64_t pa, int r_pe, int r_pa,
              const GrappaTaps& taps, std::uint64_t seed) {
  const int nc = 2;
  const int n_src = nc * taps.read * taps.pe * taps.pa;
  const int n_off = r_pe * r_pa - 1;
  CounterRng rng{seed};
  std::uint64_t draw = 0;

  std::vector<cplx> u, z, v;
  std::vector<std::vector<cplx>> amp(static_cast<std::size_t>(nc));
  for (int m = 0; m < n_src; ++m) {
    u.push_back(std::polar(1.0, 2.0 * M_PI * rng.uniform(draw++)));
    z.push_back(std::polar(1.0, 2.0 * M_PI * rng.uniform(draw++)));
    v.push_back(std::polar(1.0, 2.0 * M_PI * rng.uniform(draw++)));
    for (int c = 0; c < nc; ++c) amp[static_cast<std::size_t>(c)].push_back(rng.cgauss(draw++));
  }

  // Solve the per-mode constraints for the generating weights.
  std::vector<std::vector<cplx>> phi(static_cast<std::size_t>(n_src),
                                     std::vector<cplx>(static_cast<std::size_t>(n_src)));
  std::vector<std::vector<cplx>> rhs(static_cast<std::size_t>(n_src),
                                     std::vector<cplx>(static_cast<std::size_t>(nc * n_off)));
  const int rlo = -(taps.read - 1) / 2;
  const int plo = -(taps.pe - 1) / 2;
  const int qlo = -(taps.pa - 1) / 2;
  for (int m = 0; m < n_src; ++m) {
    int s = 0;
    for (int cs = 0; cs < nc; ++cs)
      for (int dr = rlo; dr < rlo + taps.read; ++dr)
        for (int j = plo; j < plo + taps.pe; ++j)
          for (int k = qlo; k < qlo + taps.pa; ++k, ++s)
            phi[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] =
                amp[static_cast<std::size_t>(cs)][static_cast<std::size_t>(m)] *
                std::pow(u[static_cast<std::size_t>(m)], dr) *
                std::pow(z[static_cast<std::size_t>(m)], j * r_pe) *
                std::pow(v[static_cast<std::size_t>(m)], k * r_pa);
    for (int dpe = 0; dpe < r_pe; ++dpe)
      for (int dpa = 0; dpa < r_pa; ++dpa) {
        if (dpe == 0 && dpa == 0) continue;
        const int o = dpe * r_pa + dpa - 1;
        for (int c = 0; c < nc; ++c)
          rhs[static_cast<std::size_t>(m)][static_cast<std::size_t>(c * n_off + o)] =
              amp[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)] *
              std::pow(z[static_cast<std::size_t>(m)], dpe) *
              std::pow(v[static_cast<std::size_t>(m)], dpa);
      }
  }
  const auto w_cols = solve_ge(phi, rhs);

  Planted out;
  out.r_pe = r_pe;
  out.r_pa = r_pa;
  out.taps = taps;
  out.w.assign(static_cast<std::size_t>(n_off), Eigen::MatrixXcd(nc, n_src));
  for (int o = 0; o < n_off; ++o)
    for (int c = 0; c < nc; ++c)
      for (int s = 0; s < n_src; ++s)
        out.w[static_cast<std::size_t>(o)](c, s) =
            w_cols[static_cast<std::size_t>(s)][static_cast<std::size_t>(c * n_off + o)];

  ComplexTensor t({ro, pe, pa, nc});
  for (std::int64_t r = 0; r < ro; ++r)
    for (std::int64_t p = 0; p < pe; ++p)
      for (std::int64_t q = 0; q < pa; ++q)
        for (int c = 0; c < nc; ++c) {
          cplx acc{0.0, 0.0};
          for (int m = 0; m < n_src; ++m)
            acc += amp[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)] *
                   std::pow(u[static_cast<std::size_t>(m)], static_cast<int>(r)) *
                   std::pow(z[static_cast<std::size_t>(m)], static_cast<int>(p)) *
                   std::pow(v[static_cast<std::size_t>(m)], static_cast<int>(q));
          t.at({r, p, q, c}) = acc;
        }
  out.full = KspaceData(std::move(t));
  return out;
}

KspaceData center_block(const KspaceData& k, std::int64_t ro, std::int64_t pe,
                        std::int64_t pa = 0) {
  return KspaceData(crop_center(k.t, {ro, pe, pa == 0 ? k.n_pa() : pa, k.n_coil()}),
                    k.readout_os);
}

KspaceData random_ksp(std::vector<std::int64_t> dims, std::uint64_t seed) {
  ComplexTensor t(std::move(dims));
  CounterRng rng{seed};
  for (std::int64_t i = 0; i < t.size(); ++i) t.v[i] = rng.cgauss(static_cast<std::uint64_t>(i));
  return KspaceData(std::move(t));
}

}  // namespace

TEST_SUITE("grappa") {

TEST_CASE("planted kernel recovered exactly at lambda = 0, 2D") {
  const Planted planted = plant(32, 32, 1, 2, 1, GrappaTaps{3, 2, 1}, 5);
  const KspaceData acs = center_block(planted.full, 16, 16);
  const GrappaKernel kernel = calibrate(acs, 2, 1, planted.taps, 0.0);
  REQUIRE(kernel.n_offsets() == 1);
  for (int c = 0; c < 2; ++c)
    for (std::int64_t s = 0; s < kernel.n_sources(); ++s)
      CHECK(std::abs(kernel.w_by_offset[0](c, s) - planted.w[0](c, s)) < 1e-9);

  SUBCASE("interpolation is exact away from the zero-padded border") {
    const SamplingMask mask = uniform_1d(32, 2, 0);
    const KspaceData filled = interpolate(apply_mask(planted.full, mask), mask, kernel);
    for (std::int64_t r = 1; r < 31; ++r)
      for (std::int64_t p = 1; p < 31; p += 2)
        for (std::int64_t c = 0; c < 2; ++c)
          CHECK(std::abs(filled.t.at({r, p, 0, c}) - planted.full.t.at({r, p, 0, c})) < 1e-8);
  }
}

TEST_CASE("planted kernel round trip, 3D with three offsets") {
  const GrappaTaps taps{3, 2, 2};
  const Planted planted = plant(12, 16, 12, 2, 2, taps, 13);
  const KspaceData acs = center_block(planted.full, 10, 12, 10);
  const GrappaKernel kernel = calibrate(acs, 2, 2, taps, 0.0);
  REQUIRE(kernel.n_offsets() == 3);
  for (int o = 0; o < 3; ++o)
    for (int c = 0; c < 2; ++c)
      for (std::int64_t s = 0; s < kernel.n_sources(); ++s)
        CHECK(std::abs(kernel.w_by_offset[static_cast<std::size_t>(o)](c, s) -
                       planted.w[static_cast<std::size_t>(o)](c, s)) < 1e-9);
  const SamplingMask mask = uniform_2d(16, 12, 2, 2, 0, 0);
  const KspaceData filled = interpolate(apply_mask(planted.full, mask), mask, kernel);
  for (std::int64_t r = 1; r < 11; ++r)
    for (std::int64_t p = 0; p < 14; ++p)
      for (std::int64_t q = 0; q < 10; ++q)
        for (std::int64_t c = 0; c < 2; ++c)
          CHECK(std::abs(filled.t.at({r, p, q, c}) - planted.full.t.at({r, p, q, c})) < 1e-8);
}

TEST_CASE("calibration matches an explicit dense normal-equation solve") {
  // random ACS so the least-squares problem has a genuine residual
  const KspaceData acs = random_ksp({16, 16, 1, 2}, 77);
  const auto& t = acs.t;
  const GrappaTaps taps{3, 2, 1};
  const double lambda = 0.05;
  const GrappaKernel kernel = calibrate(acs, 2, 1, taps, lambda);

  std::vector<std::vector<cplx>> rows;
  std::vector<std::vector<cplx>> rhs;
  for (std::int64_t rdx = 1; rdx <= 14; ++rdx)
    for (std::int64_t p0 = 0; p0 <= 13; ++p0) {
      std::vector<cplx> row;
      for (std::int64_t cs = 0; cs < 2; ++cs)
        for (int dr = -1; dr <= 1; ++dr)
          for (int j = 0; j <= 1; ++j) row.push_back(t.at({rdx + dr, p0 + 2 * j, 0, cs}));
      rows.push_back(std::move(row));
      rhs.push_back({t.at({rdx, p0 + 1, 0, 0}), t.at({rdx, p0 + 1, 0, 1})});
    }
  const std::size_t n = rows[0].size();
  std::vector<std::vector<cplx>> g(n, std::vector<cplx>(n, cplx{0, 0}));
  std::vector<std::vector<cplx>> atb(n, std::vector<cplx>(2, cplx{0, 0}));
  for (std::size_t e = 0; e < rows.size(); ++e)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) g[i][j] += std::conj(rows[e][i]) * rows[e][j];
      for (std::size_t c = 0; c < 2; ++c) atb[i][c] += std::conj(rows[e][i]) * rhs[e][c];
    }
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += g[i][i].real();
  for (std::size_t i = 0; i < n; ++i) g[i][i] += lambda * trace / static_cast<double>(n);
  const auto w_oracle = solve_ge(g, atb);

  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t s = 0; s < n; ++s)
      CHECK(std::abs(kernel.w_by_offset[0](static_cast<Eigen::Index>(c),
                                           static_cast<Eigen::Index>(s)) -
                     w_oracle[s][c]) < 1e-10);
}

TEST_CASE("ridge limit drives the weights to zero") {
  const Planted planted = plant(32, 32, 1, 2, 1, GrappaTaps{3, 2, 1}, 9);
  const GrappaKernel kernel =
      calibrate(center_block(planted.full, 16, 16), 2, 1, planted.taps, 1e12);
  double norm = 0.0;
  for (std::int64_t s = 0; s < kernel.n_sources(); ++s)
    for (int c = 0; c < 2; ++c) norm += std::norm(kernel.w_by_offset[0](c, s));
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("interpolation is linear and preserves acquired samples") {
  const Planted pa = plant(24, 24, 1, 2, 1, GrappaTaps{3, 2, 1}, 21);
  const KspaceData xb = random_ksp({24, 24, 1, 2}, 22);
  const GrappaKernel kernel =
      calibrate(center_block(pa.full, 16, 16), 2, 1, pa.taps, 0.01);
  const SamplingMask mask = uniform_1d(24, 2, 0);
  const KspaceData ua = apply_mask(pa.full, mask), ub = apply_mask(xb, mask);
  const cplx alpha{1.3, -0.2}, beta{0.5, 0.9};
  KspaceData mix = ua;
  for (std::int64_t i = 0; i < mix.t.size(); ++i)
    mix.t.v[i] = alpha * ua.t.v[i] + beta * ub.t.v[i];
  const KspaceData fa = interpolate(ua, mask, kernel);
  const KspaceData fb = interpolate(ub, mask, kernel);
  const KspaceData fmix = interpolate(mix, mask, kernel);
  for (std::int64_t i = 0; i < fmix.t.size(); ++i)
    CHECK(std::abs(fmix.t.v[i] - (alpha * fa.t.v[i] + beta * fb.t.v[i])) < 1e-10);
  for (std::int64_t p = 0; p < 24; p += 2)
    for (std::int64_t rdx = 0; rdx < 24; ++rdx)
      for (std::int64_t c = 0; c < 2; ++c)
        CHECK(fa.t.at({rdx, p, 0, c}) == ua.t.at({rdx, p, 0, c}));
}

TEST_CASE("unit acceleration passes data through") {
  const KspaceData data = random_ksp({16, 16, 1, 2}, 31);
  const SamplingMask mask = uniform_1d(16, 1, 0);
  const GrappaKernel kernel = calibrate(center_block(data, 12, 12), 1, 1, GrappaTaps{3, 2, 1}, 0.0);
  CHECK(interpolate(data, mask, kernel).t.v == data.t.v);
}

TEST_CASE("acs_replace") {
  const KspaceData a = random_ksp({16, 16, 1, 2}, 41), b = random_ksp({16, 16, 1, 2}, 42);
  SUBCASE("empty bounds do nothing") {
    const AcsRegion empty{4, 3, 0, 0, 1, 1};
    CHECK(acs_replace(a, b, empty).t.v == a.t.v);
  }
  SUBCASE("full-grid bounds copy everything, twice equals once") {
    const AcsRegion all{0, 15, 0, 0, 1, 1};
    const KspaceData once = acs_replace(a, b, all);
    CHECK(once.t.v == b.t.v);
    CHECK(acs_replace(once, b, all).t.v == once.t.v);
  }
}

TEST_CASE("calibration error cases") {
  ComplexTensor tiny({3, 3, 1, 2});
  CHECK_THROWS_WITH_AS(calibrate(KspaceData(tiny), 4, 1, GrappaTaps{3, 4, 1}, 0.0),
                       doctest::Contains("footprint"), std::runtime_error);
  ComplexTensor zeros({16, 16, 1, 2});
  CHECK_THROWS_WITH_AS(calibrate(KspaceData(zeros), 2, 1, GrappaTaps{3, 2, 1}, 0.0),
                       doctest::Contains("singular"), std::runtime_error);
}

TEST_CASE("virtual coils of a real image equal the physical coils") {
  const ImageData img = generate_phantom(shepp_logan_2d(), {32, 32});
  ComplexTensor maps({32, 32, 1, 1});
  for (auto& z : maps.v) z = 1.0;
  const KspaceData ksp = synthesize_kspace(img, ImageData(maps, true));
  const KspaceData aug = make_virtual_coils(ksp);
  CHECK(aug.n_coil() == 2);
  for (std::int64_t r = 0; r < 32; ++r)
    for (std::int64_t p = 0; p < 32; ++p)
      CHECK(std::abs(aug.t.at({r, p, 0, 1}) - aug.t.at({r, p, 0, 0})) < 1e-10);
}

TEST_CASE("doubling virtual coils keeps the physical block") {
  const KspaceData data = random_ksp({16, 16, 1, 2}, 51);
  const KspaceData twice = make_virtual_coils(make_virtual_coils(data));
  for (std::int64_t r = 0; r < 16; ++r)
    for (std::int64_t p = 0; p < 16; ++p)
      for (std::int64_t c = 0; c < 2; ++c)
        CHECK(twice.t.at({r, p, 0, c}) == data.t.at({r, p, 0, c}));
}

TEST_CASE("virtual-coil sampling is the index-reversed mask") {
  SamplingMask m = uniform_2d(8, 8, 1, 1, 0, 0);
  CounterRng rng{3};
  for (std::int64_t i = 0; i < 64; ++i)
    m.grid[static_cast<std::size_t>(i)] = rng.bits(static_cast<std::uint64_t>(i)) & 1;
  const SamplingMask mm = mirror_mask(m);
  for (std::int64_t p = 0; p < 8; ++p)
    for (std::int64_t q = 0; q < 8; ++q)
      CHECK(mm.sampled(p, q) == m.sampled((8 - p) % 8, (8 - q) % 8));
}

TEST_CASE("vc_grappa basics") {
  const ImageData img = generate_phantom(shepp_logan_2d(), {32, 32});
  const ImageData maps = generate_sensitivities(CoilGeometry{4, 1.1, 0.85, 1.5}, {32, 32});
  const KspaceData full = synthesize_kspace(img, maps);
  SUBCASE("unit rate is the identity") {
    const SamplingMask mask = uniform_1d(32, 1, 0);
    CHECK(vc_grappa(full, mask, center_block(full, 17, 17), 1, 1, GrappaTaps{3, 2, 1}, 0.0).t.v ==
          full.t.v);
  }
  SUBCASE("virtual block is discarded and acquired data kept") {
    const SamplingMask mask = uniform_1d(32, 2, 0);
    const KspaceData under = apply_mask(full, mask);
    const KspaceData out =
        vc_grappa(under, mask, center_block(full, 17, 17), 2, 1, GrappaTaps{3, 2, 1}, 0.01);
    CHECK(out.n_coil() == 4);
    for (std::int64_t r = 0; r < 32; ++r)
      for (std::int64_t p = 0; p < 32; p += 2)
        for (std::int64_t c = 0; c < 4; ++c)
          CHECK(out.t.at({r, p, 0, c}) == under.t.at({r, p, 0, c}));
    double fill = 0.0;
    for (std::int64_t r = 0; r < 32; ++r) fill += std::abs(out.t.at({r, 1, 0, 0}));
    CHECK(fill > 0.0);
  }
  SUBCASE("incompatible lattice is reported") {
    const SamplingMask mask = uniform_1d(32, 5, 0);  // mirrored lattice lands off-grid
    CHECK_THROWS_AS(vc_grappa(apply_mask(full, mask), mask, center_block(full, 17, 17), 5, 1,
                              GrappaTaps{3, 2, 1}, 0.0),
                    std::runtime_error);
  }
}

}  // TEST_SUITE
