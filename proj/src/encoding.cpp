#include "sparkmri/encoding.hpp"

#include <cmath>

#include "sparkmri/fft.hpp"

namespace sparkmri {

namespace {

cplx cdot(const ComplexTensor& a, const ComplexTensor& b) {
  cplx s{0.0, 0.0};
  for (std::int64_t i = 0; i < a.size(); ++i) s += std::conj(a.v[i]) * b.v[i];
  return s;
}

// CAIPI modulation for slice s: a linear phase ramp in ky that advances by
// 2*pi*shift/S per sampled lattice line, i.e. a per-slice image shift.
cplx caipi_ramp(int shift, std::int64_t slice, std::int64_t n_slices, std::int64_t pe,
                std::int64_t n_pe, int r_pe) {
  const double arg = 2.0 * M_PI * static_cast<double>(shift) * static_cast<double>(slice) *
                     static_cast<double>(pe - center_index(n_pe)) /
                     (static_cast<double>(r_pe) * static_cast<double>(n_slices));
  return std::polar(1.0, arg);
}

// Single-coil, single-slice encode: image (M,N,1 view) -> hybrid k-space
// (os*M, N, 1) with optional per-slice psf plane.
ComplexTensor encode_plane(const ComplexTensor& img, const EncodingModel& e, std::int64_t slice) {
  const std::int64_t ro = e.readout_os * e.n_x();
  ComplexTensor t = pad_center(img, {ro, e.n_y(), 1});
  t = fftc(t, {0});
  if (e.psf)
    for (std::int64_t r = 0; r < ro; ++r)
      for (std::int64_t y = 0; y < e.n_y(); ++y) t.at({r, y, 0}) *= e.psf->phase.at({r, y, slice});
  return fftc(t, {1});
}

ComplexTensor decode_plane(ComplexTensor t, const EncodingModel& e, std::int64_t slice) {
  t = ifftc(t, {1});
  if (e.psf)
    for (std::int64_t r = 0; r < t.dims[0]; ++r)
      for (std::int64_t y = 0; y < e.n_y(); ++y)
        t.at({r, y, 0}) *= std::conj(e.psf->phase.at({r, y, slice}));
  t = ifftc(t, {0});
  return crop_center(t, {e.n_x(), e.n_y(), 1});
}

}  // namespace

WavePsf make_wave_psf(std::int64_t m, std::int64_t n, std::int64_t p, double cycles,
                      double amplitude_rad, int oversample) {
  if (oversample < 1) throw std::invalid_argument("make_wave_psf: oversample must be >= 1");
  const std::int64_t ro = oversample * m;
  WavePsf psf;
  psf.oversample = oversample;
  psf.phase = ComplexTensor({ro, n, p});
  for (std::int64_t kx = 0; kx < ro; ++kx) {
    const double t = 2.0 * M_PI * cycles * static_cast<double>(kx) / static_cast<double>(ro);
    const double gy = amplitude_rad * std::sin(t);
    const double gz = amplitude_rad * std::cos(t);
    for (std::int64_t iy = 0; iy < n; ++iy) {
      const double yhat = static_cast<double>(iy - center_index(n)) / static_cast<double>(n);
      for (std::int64_t iz = 0; iz < p; ++iz) {
        const double zhat =
            p == 1 ? 0.0 : static_cast<double>(iz - center_index(p)) / static_cast<double>(p);
        psf.phase.at({kx, iy, iz}) = std::polar(1.0, gy * yhat + (p == 1 ? 0.0 : gz * zhat));
      }
    }
  }
  return psf;
}

std::vector<std::int64_t> EncodingModel::kspace_dims() const {
  const std::int64_t pa = slice_group ? 1 : n_z();
  return {readout_os * n_x(), n_y(), pa, n_coil()};
}

EncodingModel EncodingModel::with_full_mask() const {
  EncodingModel e = *this;
  e.mask.grid.assign(e.mask.grid.size(), 1);
  e.mask.acs.reset();
  return e;
}

EncodingModel make_encoding_model(ImageData maps, SamplingMask mask, std::optional<WavePsf> psf) {
  if (!maps.has_coil) throw std::invalid_argument("encoding model: maps need a coil axis");
  EncodingModel e;
  e.readout_os = psf ? psf->oversample : 1;
  if (psf) {
    const auto& d = psf->phase.dims;
    if (d[0] != e.readout_os * maps.t.dims[0] || d[1] != maps.t.dims[1] || d[2] != maps.t.dims[2])
      throw std::invalid_argument("encoding model: psf dims do not match maps");
  }
  if (mask.n_pe != maps.t.dims[1] || mask.n_pa != maps.t.dims[2])
    throw std::invalid_argument("encoding model: mask grid does not match maps");
  e.maps = std::move(maps);
  e.mask = std::move(mask);
  e.psf = std::move(psf);
  return e;
}

EncodingModel slice_group_model(ImageData maps_slices, const WavePsf& psf_slices,
                                SamplingMask mask_2d, int caipi_shift) {
  if (!maps_slices.has_coil) throw std::invalid_argument("slice_group_model: maps need a coil axis");
  if (mask_2d.n_pa != 1) throw std::invalid_argument("slice_group_model: mask must be 2D");
  if (mask_2d.n_pe != maps_slices.t.dims[1])
    throw std::invalid_argument("slice_group_model: mask grid does not match maps");
  const auto& d = psf_slices.phase.dims;
  if (d[0] != psf_slices.oversample * maps_slices.t.dims[0] || d[1] != maps_slices.t.dims[1] ||
      d[2] != maps_slices.t.dims[2])
    throw std::invalid_argument("slice_group_model: psf planes do not match maps slices");
  EncodingModel e;
  e.maps = std::move(maps_slices);
  e.mask = std::move(mask_2d);
  e.psf = psf_slices;
  e.readout_os = psf_slices.oversample;
  e.slice_group = true;
  e.caipi_shift = caipi_shift;
  return e;
}

KspaceData forward(const EncodingModel& e, const ImageData& x) {
  if (x.has_coil) throw std::invalid_argument("forward: x must be coil-free");
  if (x.t.dims != e.image_dims()) throw std::invalid_argument("forward: x dims mismatch");
  const std::int64_t nc = e.n_coil();
  const auto kd = e.kspace_dims();
  ComplexTensor out({kd[0], kd[1], kd[2], kd[3]});

  const std::int64_t n_slices = e.slice_group ? e.n_z() : 1;
  const std::int64_t n_planes = e.slice_group ? 1 : e.n_z();
  for (std::int64_t c = 0; c < nc; ++c) {
    if (e.slice_group) {
      ComplexTensor acc({kd[0], kd[1], 1});
      for (std::int64_t s = 0; s < n_slices; ++s) {
        ComplexTensor img({e.n_x(), e.n_y(), 1});
        for (std::int64_t ix = 0; ix < e.n_x(); ++ix)
          for (std::int64_t iy = 0; iy < e.n_y(); ++iy)
            img.at({ix, iy, 0}) = x.t.at({ix, iy, s}) * e.maps.t.at({ix, iy, s, c});
        ComplexTensor k = encode_plane(img, e, s);
        for (std::int64_t r = 0; r < kd[0]; ++r)
          for (std::int64_t pe = 0; pe < kd[1]; ++pe)
            acc.at({r, pe, 0}) +=
                k.at({r, pe, 0}) *
                caipi_ramp(e.caipi_shift, s, n_slices, pe, kd[1], e.mask.r_pe);
      }
      for (std::int64_t r = 0; r < kd[0]; ++r)
        for (std::int64_t pe = 0; pe < kd[1]; ++pe)
          out.at({r, pe, 0, c}) = e.mask.sampled(pe, 0) ? acc.at({r, pe, 0}) : cplx{0.0, 0.0};
    } else {
      ComplexTensor img({e.n_x(), e.n_y(), n_planes});
      for (std::int64_t i = 0; i < img.size(); ++i)
        img.v[i] = x.t.v[i] * e.maps.t.v[i * nc + c];
      ComplexTensor k = pad_center(img, {kd[0], kd[1], kd[2]});
      k = fftc(k, {0});
      if (e.psf)
        for (std::int64_t i = 0; i < k.size(); ++i) k.v[i] *= e.psf->phase.v[i];
      k = fftc(k, {1, 2});
      for (std::int64_t r = 0; r < kd[0]; ++r)
        for (std::int64_t pe = 0; pe < kd[1]; ++pe)
          for (std::int64_t pa = 0; pa < kd[2]; ++pa)
            out.at({r, pe, pa, c}) =
                e.mask.sampled(pe, pa) ? k.at({r, pe, pa}) : cplx{0.0, 0.0};
    }
  }
  return KspaceData(std::move(out), e.readout_os);
}

ImageData adjoint(const EncodingModel& e, const KspaceData& y) {
  const auto kd = e.kspace_dims();
  if (y.t.dims != std::vector<std::int64_t>{kd[0], kd[1], kd[2], kd[3]})
    throw std::invalid_argument("adjoint: y dims mismatch");
  const std::int64_t nc = e.n_coil();
  ComplexTensor x(e.image_dims());

  const std::int64_t n_slices = e.slice_group ? e.n_z() : 1;
  for (std::int64_t c = 0; c < nc; ++c) {
    ComplexTensor k({kd[0], kd[1], kd[2]});
    for (std::int64_t r = 0; r < kd[0]; ++r)
      for (std::int64_t pe = 0; pe < kd[1]; ++pe)
        for (std::int64_t pa = 0; pa < kd[2]; ++pa)
          k.at({r, pe, pa}) = e.mask.sampled(pe, pa) ? y.t.at({r, pe, pa, c}) : cplx{0.0, 0.0};
    if (e.slice_group) {
      for (std::int64_t s = 0; s < n_slices; ++s) {
        ComplexTensor ks = k;
        for (std::int64_t r = 0; r < kd[0]; ++r)
          for (std::int64_t pe = 0; pe < kd[1]; ++pe)
            ks.at({r, pe, 0}) *=
                std::conj(caipi_ramp(e.caipi_shift, s, n_slices, pe, kd[1], e.mask.r_pe));
        ComplexTensor img = decode_plane(std::move(ks), e, s);
        for (std::int64_t ix = 0; ix < e.n_x(); ++ix)
          for (std::int64_t iy = 0; iy < e.n_y(); ++iy)
            x.at({ix, iy, s}) +=
                img.at({ix, iy, 0}) * std::conj(e.maps.t.at({ix, iy, s, c}));
      }
    } else {
      k = ifftc(k, {1, 2});
      if (e.psf)
        for (std::int64_t i = 0; i < k.size(); ++i) k.v[i] *= std::conj(e.psf->phase.v[i]);
      k = ifftc(k, {0});
      ComplexTensor img = crop_center(k, e.image_dims());
      for (std::int64_t i = 0; i < x.size(); ++i)
        x.v[i] += img.v[i] * std::conj(e.maps.t.v[i * nc + c]);
    }
  }
  return ImageData(std::move(x), false);
}

CgResult cg_solve(const EncodingModel& e, const KspaceData& y, int max_iter, double tol) {
  if (max_iter < 1) throw std::invalid_argument("cg_solve: max_iter must be >= 1");
  if (tol <= 0.0) throw std::invalid_argument("cg_solve: tol must be > 0");

  // CGLS form of CG on the normal equations: keeps the data residual
  // s = y - E x explicitly, which is monotonically non-increasing.
  CgResult res;
  res.x = ImageData(ComplexTensor(e.image_dims()), false);
  const double ynorm = norm2(y.t);
  if (ynorm == 0.0) return res;

  KspaceData s = y;
  ImageData r = adjoint(e, s);
  ComplexTensor p = r.t;
  double gamma = std::real(cdot(r.t, r.t));
  if (gamma == 0.0) return res;

  for (int it = 0; it < max_iter; ++it) {
    KspaceData q = forward(e, ImageData(p, false));
    const double qn = std::real(cdot(q.t, q.t));
    if (qn == 0.0) break;
    const double alpha = gamma / qn;
    for (std::int64_t i = 0; i < res.x.t.size(); ++i) res.x.t.v[i] += alpha * p.v[i];
    for (std::int64_t i = 0; i < s.t.size(); ++i) s.t.v[i] -= alpha * q.t.v[i];
    res.rel_residual.push_back(norm2(s.t) / ynorm);
    r = adjoint(e, s);
    const double gamma_new = std::real(cdot(r.t, r.t));
    if (res.rel_residual.back() <= tol) break;
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    for (std::int64_t i = 0; i < p.size(); ++i) p.v[i] = r.t.v[i] + beta * p.v[i];
  }
  return res;
}

KspaceData recon_to_kspace(const ImageData& x_est, const EncodingModel& e_full) {
  return forward(e_full.with_full_mask(), x_est);
}

}  // namespace sparkmri
