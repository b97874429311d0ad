#pragma once

#include <optional>

#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Pure-phase wave modulation in hybrid (kx, y[, z]) space over the
/// oversampled readout axis; |phase| = 1 everywhere.
struct WavePsf {
  ComplexTensor phase;  // (oversample * M, N, P), P = 1 for 2D
  int oversample = 1;
};

/// Synthetic corkscrew PSF: phase(kx, y, z) =
/// exp(i * amp * (sin(2*pi*cycles*kx/K) * yhat + cos(...) * zhat)), with the
/// z-term dropped for single-slice data.
WavePsf make_wave_psf(std::int64_t m, std::int64_t n, std::int64_t p, double cycles,
                      double amplitude_rad, int oversample);

/// The generalized SENSE forward operator: coil maps, Fourier encoding,
/// optional wave PSF, sampling mask. In slice-group mode the image partition
/// axis enumerates the collapsed slices and the k-space partition extent is
/// 1; each slice contributes with its CAIPI phase ramp.
struct EncodingModel {
  ImageData maps;  // (M, N, P, C)
  SamplingMask mask;
  std::optional<WavePsf> psf;
  int readout_os = 1;
  bool slice_group = false;
  int caipi_shift = 0;

  std::int64_t n_x() const { return maps.t.dims[0]; }
  std::int64_t n_y() const { return maps.t.dims[1]; }
  std::int64_t n_z() const { return maps.t.dims[2]; }
  std::int64_t n_coil() const { return maps.t.dims[3]; }
  std::vector<std::int64_t> image_dims() const { return {n_x(), n_y(), n_z()}; }
  std::vector<std::int64_t> kspace_dims() const;

  /// Same operator with the full (all-True) sampling pattern.
  EncodingModel with_full_mask() const;
};

EncodingModel make_encoding_model(ImageData maps, SamplingMask mask,
                                  std::optional<WavePsf> psf = std::nullopt);

/// Joint model for the slices collapsed by uniform partition undersampling;
/// maps/psf carry one slice per partition index of their third axis.
EncodingModel slice_group_model(ImageData maps_slices, const WavePsf& psf_slices,
                                SamplingMask mask_2d, int caipi_shift);

KspaceData forward(const EncodingModel& e, const ImageData& x);
ImageData adjoint(const EncodingModel& e, const KspaceData& y);

struct CgResult {
  ImageData x;
  std::vector<double> rel_residual;  // per iteration, relative to ||E^H y||
};

/// Conjugate gradient on the normal equations E^H E x = E^H y, zero init.
CgResult cg_solve(const EncodingModel& e, const KspaceData& y, int max_iter, double tol);

/// Model-based estimate of complete k-space: forward through the unmasked
/// operator.
KspaceData recon_to_kspace(const ImageData& x_est, const EncodingModel& e_full);

}  // namespace sparkmri
