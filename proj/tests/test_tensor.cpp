#include <doctest.h>

#include <cmath>

#include "sparkmri/coil.hpp"
#include "sparkmri/fft.hpp"
#include "sparkmri/rng.hpp"
#include "sparkmri/tensor.hpp"

using namespace sparkmri;

namespace {

ComplexTensor random_tensor(std::vector<std::int64_t> dims, std::uint64_t seed) {
  ComplexTensor t(std::move(dims));
  CounterRng rng{seed};
  for (std::int64_t i = 0; i < t.size(); ++i) t.v[i] = rng.cgauss(static_cast<std::uint64_t>(i));
  return t;
}

double rel_dist(const ComplexTensor& a, const ComplexTensor& b) {
  double num = 0.0, den = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.v[i] - b.v[i]);
    den += std::norm(b.v[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("centered impulse transforms to a flat spectrum") {
  ComplexTensor t({8});
  t.v[4] = 1.0;  // center_index(8)
  const ComplexTensor f = fftc(t, {0});
  for (std::int64_t i = 0; i < 8; ++i) {
    CHECK(f.v[i].real() == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-14));
    CHECK(std::abs(f.v[i].imag()) < 1e-14);
  }
}

TEST_CASE("fftc/ifftc round trip and Parseval") {
  for (auto dims : std::vector<std::vector<std::int64_t>>{{16}, {16, 16}, {5, 6, 7}, {4, 6, 3, 2}}) {
    std::vector<int> axes;
    for (int a = 0; a < static_cast<int>(dims.size()); ++a) axes.push_back(a);
    const ComplexTensor x = random_tensor(dims, 7 + dims.size());
    const ComplexTensor f = fftc(x, axes);
    CHECK(norm2(f) == doctest::Approx(norm2(x)).epsilon(1e-12));
    CHECK(rel_dist(ifftc(f, axes), x) < 1e-12);
  }
}

TEST_CASE("fftc is linear") {
  const ComplexTensor x = random_tensor({12, 9}, 1);
  const ComplexTensor y = random_tensor({12, 9}, 2);
  const cplx a{0.7, -1.3}, b{-0.2, 0.4};
  ComplexTensor mix({12, 9});
  for (std::int64_t i = 0; i < mix.size(); ++i) mix.v[i] = a * x.v[i] + b * y.v[i];
  const ComplexTensor lhs = fftc(mix, {0, 1});
  const ComplexTensor fx = fftc(x, {0, 1}), fy = fftc(y, {0, 1});
  ComplexTensor rhs({12, 9});
  for (std::int64_t i = 0; i < rhs.size(); ++i) rhs.v[i] = a * fx.v[i] + b * fy.v[i];
  CHECK(rel_dist(lhs, rhs) < 1e-12);
}

TEST_CASE("fftc rejects unknown axes") {
  const ComplexTensor x = random_tensor({4, 4}, 3);
  CHECK_THROWS(fftc(x, {2}));
}

TEST_CASE("crop window follows the center convention") {
  // center c = floor(8/2) = 4, window [c-2, c+2) = indices 2..5
  ComplexTensor t({8});
  for (std::int64_t i = 0; i < 8; ++i) t.v[i] = static_cast<double>(i);
  const ComplexTensor c = crop_center(t, {4});
  for (std::int64_t i = 0; i < 4; ++i) CHECK(c.v[i].real() == doctest::Approx(2.0 + i));
}

TEST_CASE("crop of pad is the identity") {
  const ComplexTensor x = random_tensor({4, 5}, 11);
  CHECK(rel_dist(crop_center(pad_center(x, {8, 9}), {4, 5}), x) == 0.0);
  CHECK(rel_dist(crop_center(x, {4, 5}), x) == 0.0);  // same dims: identity
}

TEST_CASE("sos_combine basics") {
  ComplexTensor one({2, 2, 1, 1});
  one.at({0, 0, 0, 0}) = cplx{3.0, -4.0};
  CHECK(sos_combine(ImageData(one, true)).at({0, 0, 0}) == doctest::Approx(5.0));

  ComplexTensor two({1, 1, 1, 2});
  two.at({0, 0, 0, 0}) = cplx{1.0, 2.0};
  two.at({0, 0, 0, 1}) = cplx{1.0, 2.0};
  CHECK(sos_combine(ImageData(two, true)).v[0] ==
        doctest::Approx(std::sqrt(2.0) * std::abs(cplx{1.0, 2.0})));
}

TEST_CASE("sos is invariant under per-coil global phase") {
  ComplexTensor t = random_tensor({3, 4, 1, 5}, 9);
  ComplexTensor rotated = t;
  for (std::int64_t p = 0; p < t.size() / 5; ++p)
    for (std::int64_t c = 0; c < 5; ++c)
      rotated.v[p * 5 + c] *= std::polar(1.0, 0.3 + 0.7 * static_cast<double>(c));
  const RealTensor a = sos_combine(ImageData(t, true));
  const RealTensor b = sos_combine(ImageData(rotated, true));
  for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-12));
}

TEST_CASE("complex_combine recovers the image from maps times image") {
  // maps with sos = 1: two coils at (3/5, 4/5) magnitude with phases
  ComplexTensor maps({2, 2, 1, 2});
  ComplexTensor imgs({2, 2, 1, 2});
  ComplexTensor m({2, 2, 1});
  CounterRng rng{5};
  for (std::int64_t p = 0; p < 4; ++p) {
    const cplx s0 = std::polar(0.6, 0.3 * static_cast<double>(p));
    const cplx s1 = std::polar(0.8, -0.5 * static_cast<double>(p));
    const cplx v = rng.cgauss(static_cast<std::uint64_t>(p));
    maps.v[2 * p] = s0;
    maps.v[2 * p + 1] = s1;
    m.v[p] = v;
    imgs.v[2 * p] = s0 * v;
    imgs.v[2 * p + 1] = s1 * v;
  }
  const ImageData out = complex_combine(ImageData(imgs, true), ImageData(maps, true));
  for (std::int64_t p = 0; p < 4; ++p) CHECK(std::abs(out.t.v[p] - m.v[p]) < 1e-14);
}

TEST_CASE("complex_combine: identity map and zero-map voxels") {
  ComplexTensor maps({1, 2, 1, 1});
  ComplexTensor imgs({1, 2, 1, 1});
  maps.v[0] = 1.0;
  imgs.v[0] = cplx{2.0, 1.0};
  maps.v[1] = 0.0;  // zero sensitivity here
  imgs.v[1] = cplx{9.0, 9.0};
  const ImageData out = complex_combine(ImageData(imgs, true), ImageData(maps, true));
  CHECK(out.t.v[0] == cplx{2.0, 1.0});
  CHECK(out.t.v[1] == cplx{0.0, 0.0});
}

}  // TEST_SUITE
