#pragma once

#include "sparkmri/encoding.hpp"
#include "sparkmri/grappa.hpp"
#include "sparkmri/nn.hpp"
#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

enum class SparkArch { net2d, net3d };

struct SparkConfig {
  SparkArch arch = SparkArch::net2d;
  int epochs = 200;
  double lr = 2e-3;
  int hidden_channels = 64;
  std::uint64_t seed = 0;
  bool final_acs_replace = true;
};

/// Projection onto the ACS region: inclusive index ranges per k-space axis.
struct AcsProjector {
  std::int64_t ro_lo = 0, ro_hi = -1;
  std::int64_t pe_lo = 0, pe_hi = -1;
  std::int64_t pa_lo = 0, pa_hi = -1;

  static AcsProjector from_mask(const SamplingMask& mask, std::int64_t n_ro);
  bool empty() const { return ro_hi < ro_lo || pe_hi < pe_lo || pa_hi < pa_lo; }
  std::int64_t count() const {
    return empty() ? 0 : (ro_hi - ro_lo + 1) * (pe_hi - pe_lo + 1) * (pa_hi - pa_lo + 1);
  }
  bool contains(std::int64_t r, std::int64_t p, std::int64_t q) const {
    return r >= ro_lo && r <= ro_hi && p >= pe_lo && p <= pe_hi && q >= pa_lo && q <= pa_hi;
  }
};

/// Per-coil correction f_theta_c: 2C input channels (real/imag of every
/// coil), 2 output channels (real/imag of the residual for this coil).
struct CorrectionModel {
  int coil = 0;
  Network net;
  double scale = 1.0;
};

/// Real/imag channel packing: channel 2c = Re(y_c)/scale, 2c+1 = Im(y_c)/scale.
/// Partition axis is dropped when its extent is 1.
RealTensor pack_input(const KspaceData& y_est, double scale);

/// Fig-2 style architectures; `in_ch` is 2C. Both route the input through a
/// skip onto the third layer output; the 9-layer variant adds a second skip
/// (third to sixth layer output) and the band nonlinearity.
Network build_spark_network(SparkArch arch, int in_ch, int hidden);

struct CoilTrainResult {
  CorrectionModel model;
  std::vector<double> loss_history;  // per epoch, plus the post-update loss
};

/// Minimize the ACS-restricted MSE between the network output and the
/// scaled residual (y_acq_c - y_est_c)/scale with ADAM; single training pair.
CoilTrainResult train_coil_model(const KspaceData& y_acq, const KspaceData& y_est,
                                 const AcsProjector& acs, int coil, const SparkConfig& cfg,
                                 double scale);

/// y_corrected_c = y_est_c + scale * f(y_est), over the entire grid.
ComplexTensor apply_correction(const CorrectionModel& model, const KspaceData& y_est);

struct SparkCorrectResult {
  KspaceData corrected;
  std::vector<std::vector<double>> loss_histories;
  double scale = 1.0;
};

/// Train + apply over all coils with one shared scale = max |y_est|;
/// optionally overwrite the ACS region with acquired data at the end.
SparkCorrectResult spark_correct(const KspaceData& y_acq, const KspaceData& y_est,
                                 const AcsProjector& acs, const SparkConfig& cfg);

enum class ReconMethod { grappa, vc_grappa, sense, wave, wave_slice_group, grappa3d_hybrid };

struct PipelineParams {
  ReconMethod method = ReconMethod::grappa;
  GrappaTaps taps{};
  double lambda = 0.01;
  int cg_max_iter = 50;
  double cg_tol = 1e-6;
  double wave_cycles = 15.0;
  double wave_amplitude_rad = 8.0;
  int readout_os = 3;
  int caipi_shift = 1;
  std::int64_t ref_pe = 24, ref_pa = 24;  // low-res reference extent (hybrid)
  SparkConfig spark{};
};

struct PipelineResult {
  RealTensor base_image;   // baseline reconstruction magnitude
  RealTensor spark_image;  // SPARK-corrected magnitude
  KspaceData y_est;
  KspaceData y_corrected;
  std::vector<std::vector<double>> loss_histories;
  double base_rmse = -1.0, spark_rmse = -1.0;
};

/// Build y_est by the chosen method, derive the effective acquired data and
/// ACS projector, run spark_correct, and produce coil-combined images.
PipelineResult spark_pipeline(const KspaceData& full_ksp, const ImageData& maps,
                              const SamplingMask& mask, const PipelineParams& params,
                              const RealTensor* reference = nullptr);

}  // namespace sparkmri
