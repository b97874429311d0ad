#include <doctest.h>

#include <cmath>

#include "sparkmri/coil.hpp"
#include "sparkmri/fft.hpp"
#include "sparkmri/phantom.hpp"
#include "sparkmri/rng.hpp"

using namespace sparkmri;

TEST_SUITE("phantom") {

TEST_CASE("single covering ellipse gives a constant interior") {
  PhantomSpec spec{{Ellipse{{0.0, 0.0}, {2.0, 2.0}, 0.0, 1.0}}};
  const ImageData img = generate_phantom(spec, {16, 16});
  CHECK(img.t.at({8, 8, 0}).real() == doctest::Approx(1.0));
  CHECK(img.t.at({2, 2, 0}).real() == doctest::Approx(1.0));  // still inside radius 2
}

TEST_CASE("outside all ellipses the phantom is zero") {
  PhantomSpec spec{{Ellipse{{0.0, 0.0}, {0.1, 0.1}, 0.0, 1.0}}};
  const ImageData img = generate_phantom(spec, {32, 32});
  CHECK(img.t.at({0, 0, 0}) == cplx{0.0, 0.0});
  CHECK(img.t.at({31, 31, 0}) == cplx{0.0, 0.0});
}

TEST_CASE("overlapping ellipses add") {
  PhantomSpec spec{{Ellipse{{0.0, 0.0}, {0.5, 0.5}, 0.0, 0.5},
                    Ellipse{{0.0, 0.0}, {0.3, 0.3}, 0.0, 0.3}}};
  const ImageData img = generate_phantom(spec, {32, 32});
  CHECK(img.t.at({16, 16, 0}).real() == doctest::Approx(0.8));
}

TEST_CASE("default head phantom is deterministic and non-trivial") {
  const ImageData a = generate_phantom(shepp_logan_2d(), {64, 64});
  const ImageData b = generate_phantom(shepp_logan_2d(), {64, 64});
  CHECK(a.t.v == b.t.v);
  double maxv = 0.0;
  for (const auto& z : a.t.v) maxv = std::max(maxv, z.real());
  CHECK(maxv == doctest::Approx(1.0));
}

TEST_CASE("sensitivities are sos-normalized") {
  const ImageData maps = generate_sensitivities(CoilGeometry{}, {32, 32});
  const RealTensor sos = sos_combine(maps);
  CounterRng rng{3};
  for (int k = 0; k < 100; ++k) {
    const auto i = static_cast<std::int64_t>(rng.bits(static_cast<std::uint64_t>(k)) %
                                             static_cast<std::uint64_t>(sos.size()));
    CHECK(sos.v[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single coil normalizes to unit magnitude") {
  CoilGeometry geom;
  geom.n_coils = 1;
  const ImageData maps = generate_sensitivities(geom, {16, 16});
  for (const auto& z : maps.t.v) CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("maps differ across coils") {
  const ImageData maps = generate_sensitivities(CoilGeometry{}, {32, 32});
  const std::int64_t nc = maps.t.dims[3];
  const std::int64_t nvox = maps.t.size() / nc;
  for (std::int64_t a = 0; a < nc; ++a)
    for (std::int64_t b = a + 1; b < nc; ++b) {
      double num = 0.0, den = 0.0;
      for (std::int64_t p = 0; p < nvox; ++p) {
        num += std::norm(maps.t.v[p * nc + a] - maps.t.v[p * nc + b]);
        den += std::norm(maps.t.v[p * nc + b]);
      }
      CHECK(std::sqrt(num / den) > 0.1);
    }
}

TEST_CASE("synthesized k-space inverts to coil images") {
  const ImageData img = generate_phantom(shepp_logan_2d(), {24, 24});
  const ImageData maps = generate_sensitivities(CoilGeometry{}, {24, 24});
  const KspaceData ksp = synthesize_kspace(img, maps);
  const ImageData coil = ifftc_spatial(ksp);
  const std::int64_t nc = maps.t.dims[3];
  for (std::int64_t p = 0; p < img.t.size(); ++p)
    for (std::int64_t c = 0; c < nc; ++c)
      CHECK(std::abs(coil.t.v[p * nc + c] - img.t.v[p] * maps.t.v[p * nc + c]) < 1e-12);
}

TEST_CASE("full pipeline consistency: sos of coil images equals |m|") {
  const ImageData img = generate_phantom(shepp_logan_2d(), {32, 32});
  const ImageData maps = generate_sensitivities(CoilGeometry{}, {32, 32});
  const RealTensor sos = sos_combine(ifftc_spatial(synthesize_kspace(img, maps)));
  for (std::int64_t p = 0; p < img.t.size(); ++p)
    CHECK(std::abs(sos.v[p] - std::abs(img.t.v[p])) < 1e-10);
}

TEST_CASE("sigma zero keeps the data bit-for-bit") {
  const ImageData img = generate_phantom(shepp_logan_2d(), {16, 16});
  const ImageData maps = generate_sensitivities(CoilGeometry{}, {16, 16});
  const KspaceData ksp = synthesize_kspace(img, maps);
  const KspaceData out = add_correlated_noise(ksp, identity_noise(8, 42), 0.0);
  CHECK(out.t.v == ksp.t.v);
}

TEST_CASE("noise is reproducible and seed-sensitive") {
  ComplexTensor z({8, 8, 1, 4});
  const KspaceData ksp(z);
  const KspaceData a = add_correlated_noise(ksp, identity_noise(4, 42), 0.5);
  const KspaceData b = add_correlated_noise(ksp, identity_noise(4, 42), 0.5);
  const KspaceData c = add_correlated_noise(ksp, identity_noise(4, 43), 0.5);
  CHECK(a.t.v == b.t.v);
  CHECK(a.t.v != c.t.v);
}

TEST_CASE("identity covariance gives empirically uncorrelated coils") {
  const std::int64_t n = 10000;
  ComplexTensor z({n, 1, 1, 4});
  const KspaceData noisy = add_correlated_noise(KspaceData(z), identity_noise(4, 7), 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx acc{0.0, 0.0};
      for (std::int64_t p = 0; p < n; ++p)
        acc += noisy.t.v[p * 4 + i] * std::conj(noisy.t.v[p * 4 + j]);
      const double c = std::abs(acc) / static_cast<double>(n);
      if (i == j) CHECK(c == doctest::Approx(1.0).epsilon(0.05));
      else CHECK(c < 0.05);
    }
}

TEST_CASE("off-diagonal covariance shows up in sample statistics") {
  const std::int64_t n = 100000;
  const double sigma = 0.7;
  ComplexTensor z({n, 1, 1, 3});
  const KspaceData noisy =
      add_correlated_noise(KspaceData(z), uniform_correlation_noise(3, 0.5, 11), sigma);
  cplx acc{0.0, 0.0};
  for (std::int64_t p = 0; p < n; ++p) acc += noisy.t.v[p * 3 + 0] * std::conj(noisy.t.v[p * 3 + 1]);
  const double measured = acc.real() / static_cast<double>(n);
  CHECK(measured == doctest::Approx(0.5 * sigma * sigma).epsilon(0.10));
}

TEST_CASE("non-PSD covariance is rejected") {
  NoiseModel bad = identity_noise(2, 0);
  bad.covariance[0] = -1.0;
  ComplexTensor z({4, 4, 1, 2});
  CHECK_THROWS(add_correlated_noise(KspaceData(z), bad, 1.0));
}

TEST_CASE("covariance estimation recovers the generator") {
  const std::int64_t k = 100000;
  const int nc = 3;
  NoiseModel model = uniform_correlation_noise(nc, 0.4, 19);
  ComplexTensor z({k, 1, 1, nc});
  const KspaceData noisy = add_correlated_noise(KspaceData(z), model, 1.0);
  std::vector<cplx> samples(static_cast<std::size_t>(nc * k));
  for (std::int64_t p = 0; p < k; ++p)
    for (int c = 0; c < nc; ++c)
      samples[static_cast<std::size_t>(c) * k + p] = noisy.t.v[p * nc + c];
  const auto est = estimate_noise_covariance(samples, nc, k);
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < nc * nc; ++i) {
    err += std::norm(est[static_cast<std::size_t>(i)] - model.covariance[static_cast<std::size_t>(i)]);
    ref += std::norm(model.covariance[static_cast<std::size_t>(i)]);
  }
  CHECK(std::sqrt(err / ref) < 0.05);
}

TEST_CASE("covariance estimation degenerate cases") {
  // single unit-variance coil
  const std::int64_t k = 50000;
  ComplexTensor z({k, 1, 1, 1});
  const KspaceData noisy = add_correlated_noise(KspaceData(z), identity_noise(1, 23), 1.0);
  std::vector<cplx> samples(noisy.t.v.begin(), noisy.t.v.end());
  const auto est = estimate_noise_covariance(samples, 1, k);
  CHECK(est[0].real() == doctest::Approx(1.0).epsilon(0.05));
  // zero samples
  const auto zero = estimate_noise_covariance({}, 2, 0);
  for (const auto& v : zero) CHECK(v == cplx{0.0, 0.0});
}

}  // TEST_SUITE
