#include "sparkmri/coil.hpp"

#include <cmath>

namespace sparkmri {

RealTensor sos_combine(const ImageData& coil_images) {
  if (!coil_images.has_coil)
    throw std::invalid_argument("sos_combine: coil axis required");
  const auto& t = coil_images.t;
  const std::int64_t nc = t.dims[3];
  const std::int64_t nvox = t.size() / nc;
  RealTensor out({t.dims[0], t.dims[1], t.dims[2]});
  for (std::int64_t p = 0; p < nvox; ++p) {
    double s = 0.0;
    for (std::int64_t c = 0; c < nc; ++c) s += std::norm(t.v[p * nc + c]);
    out.v[p] = std::sqrt(s);
  }
  return out;
}

ImageData complex_combine(const ImageData& coil_images, const ImageData& maps) {
  if (!coil_images.has_coil || !maps.has_coil)
    throw std::invalid_argument("complex_combine: coil axis required on images and maps");
  if (coil_images.t.dims != maps.t.dims)
    throw std::invalid_argument("complex_combine: images and maps must share dims");
  const auto& t = coil_images.t;
  const std::int64_t nc = t.dims[3];
  const std::int64_t nvox = t.size() / nc;
  ComplexTensor out({t.dims[0], t.dims[1], t.dims[2]});
  for (std::int64_t p = 0; p < nvox; ++p) {
    cplx num{0.0, 0.0};
    double den = 0.0;
    for (std::int64_t c = 0; c < nc; ++c) {
      const cplx s = maps.t.v[p * nc + c];
      num += std::conj(s) * t.v[p * nc + c];
      den += std::norm(s);
    }
    out.v[p] = den > 0.0 ? num / den : cplx{0.0, 0.0};
  }
  return ImageData(std::move(out), false);
}

RealTensor magnitude(const ImageData& img) {
  if (img.has_coil) return sos_combine(img);
  RealTensor out(img.t.dims);
  for (std::int64_t i = 0; i < img.t.size(); ++i) out.v[i] = std::abs(img.t.v[i]);
  return out;
}

}  // namespace sparkmri
