#pragma once

#include <functional>

#include "sparkmri/phantom.hpp"
#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// 100 * ||recon - ref||_2 / ||ref||_2 over real-valued magnitude images.
double rmse_percent(const RealTensor& recon, const RealTensor& reference);

struct EvalReport {
  std::vector<double> replica_rmse;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  RealTensor proxy;          // retained-SNR proxy map
  std::int64_t flagged_zero_std = 0;
};

/// Reconstructs the given k-space (typically with calibration fixed from the
/// original data) and returns the full-grid coil k-space estimate.
using ReconFn = std::function<KspaceData(const KspaceData& undersampled)>;

/// Pseudo-replica evaluation: re-noise the full k-space, undersample,
/// reconstruct each replica with the fixed recon_fn, complex coil-combine,
/// and take the std of the real part across replicas. The proxy map is the
/// original reconstruction divided by that std (0 where std is 0, counted).
EvalReport pseudo_replica(const ReconFn& recon_fn, const KspaceData& ksp_full,
                          const SamplingMask& mask, const NoiseModel& noise, double sigma,
                          int n_replicas, const ImageData& maps, const RealTensor& reference);

/// Mean of a map over the voxels where the support image is positive.
double support_mean(const RealTensor& map, const RealTensor& support);

}  // namespace sparkmri
