#include "sparkmri/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace sparkmri {

namespace {

std::mutex planner_mutex;  // FFTW's planner is not thread-safe

fftw_plan plan_for(std::int64_t n, int sign) {
  // Plans are cached per thread; execution via fftw_execute_dft on the
  // caller's buffer (FFTW_UNALIGNED lifts the alignment requirement).
  thread_local std::map<std::pair<std::int64_t, int>, fftw_plan> cache;
  auto it = cache.find({n, sign});
  if (it != cache.end()) return it->second;
  std::lock_guard<std::mutex> lock(planner_mutex);
  std::vector<cplx> scratch(static_cast<std::size_t>(n));
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(std::make_pair(n, sign), plan);
  return plan;
}

// One centered 1D transform along `axis` for every line of the tensor.
// The centering (ifftshift before, fftshift after) is folded into the
// gather/scatter index maps; scale is 1/sqrt(n).
void transform_axis(ComplexTensor& t, int axis, int sign) {
  const std::int64_t n = t.dims[axis];
  if (n == 1) return;
  const std::int64_t c = center_index(n);
  const std::int64_t stride = t.stride(axis);
  const std::int64_t total = t.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  fftw_plan plan = plan_for(n, sign);

  std::vector<cplx> line(static_cast<std::size_t>(n));
  auto* lp = reinterpret_cast<fftw_complex*>(line.data());

  const std::int64_t block = stride * n;
  for (std::int64_t base = 0; base < total; base += block) {
    for (std::int64_t inner = 0; inner < stride; ++inner) {
      cplx* p = t.v.data() + base + inner;
      for (std::int64_t i = 0; i < n; ++i) line[i] = p[((i + c) % n) * stride];
      fftw_execute_dft(plan, lp, lp);
      for (std::int64_t k = 0; k < n; ++k) p[((k + c) % n) * stride] = line[k] * scale;
    }
  }
}

ComplexTensor transform(const ComplexTensor& t, const std::vector<int>& axes, int sign) {
  for (int a : axes)
    if (a < 0 || a >= t.rank())
      throw std::invalid_argument("fftc: unknown axis " + std::to_string(a));
  ComplexTensor out = t;
  for (int a : axes) transform_axis(out, a, sign);
  return out;
}

}  // namespace

ComplexTensor fftc(const ComplexTensor& t, const std::vector<int>& axes) {
  return transform(t, axes, FFTW_FORWARD);
}

ComplexTensor ifftc(const ComplexTensor& t, const std::vector<int>& axes) {
  return transform(t, axes, FFTW_BACKWARD);
}

KspaceData fftc_spatial(const ImageData& coil_images, int readout_os) {
  if (!coil_images.has_coil)
    throw std::invalid_argument("fftc_spatial: coil axis required");
  return KspaceData(fftc(coil_images.t, {0, 1, 2}), readout_os);
}

ImageData ifftc_spatial(const KspaceData& ksp) {
  return ImageData(ifftc(ksp.t, {0, 1, 2}), true);
}

}  // namespace sparkmri
