#pragma once

#include <Eigen/Dense>

#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Kernel extents in acquired-sample units: `read` spans readout samples
/// (odd), `pe`/`pa` count acquired lattice neighbors along phase/partition.
struct GrappaTaps {
  int read = 5;
  int pe = 4;
  int pa = 1;
};

/// Calibrated interpolation weights for one undersampling geometry.
/// w_by_offset[o] maps the gathered source vector (coil-major, then read,
/// pe, pa taps) to all target coils at lattice offset o, where offsets
/// enumerate (dpe, dpa) != (0, 0) as dpe * r_pa + dpa - 1.
struct GrappaKernel {
  int r_pe = 1, r_pa = 1;
  GrappaTaps taps;
  double lambda = 0.0;
  int coils = 0;
  std::vector<Eigen::MatrixXcd> w_by_offset;  // each (coils x n_src)

  int n_offsets() const { return r_pe * r_pa - 1; }
  std::int64_t n_sources() const {
    return static_cast<std::int64_t>(coils) * taps.read * taps.pe * taps.pa;
  }
  /// Flat copy of the weight tensor, offset-major then target coil then source.
  std::vector<cplx> flat() const;
};

/// Solve (A^H A + lambda * (tr(A^H A)/n_src) * I) w = A^H b over neighborhoods
/// slid across a fully sampled ACS block.
GrappaKernel calibrate(const KspaceData& acs, int r_pe, int r_pa, const GrappaTaps& taps,
                       double lambda);

/// Fill every missing lattice target from its acquired neighbors; acquired
/// entries pass through untouched, out-of-range sources read as zero.
KspaceData interpolate(const KspaceData& under, const SamplingMask& mask,
                       const GrappaKernel& kernel);

/// Copy entries inside the ACS bounds from `acq` into `recon`.
KspaceData acs_replace(const KspaceData& recon, const KspaceData& acq, const AcsRegion& bounds);

/// Append conjugate-symmetric virtual coils: coil C+c holds
/// conj(y_c(-k)) with index reversal about floor(n/2) on every k-space axis.
KspaceData make_virtual_coils(const KspaceData& ksp);

/// Sampling pattern seen by the virtual coils (index-reversed grid).
SamplingMask mirror_mask(const SamplingMask& mask);

/// VC-GRAPPA: augment to 2C coils, calibrate on the mirror-valid ACS,
/// interpolate, drop the virtual block.
KspaceData vc_grappa(const KspaceData& under, const SamplingMask& mask, const KspaceData& acs,
                     int r_pe, int r_pa, const GrappaTaps& taps, double lambda);

}  // namespace sparkmri
