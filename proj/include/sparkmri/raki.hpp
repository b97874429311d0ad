#pragma once

#include "sparkmri/nn.hpp"
#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Minimal scan-specific k-space interpolation baseline: a small
/// valid-convolution network per coil predicts the missing offsets between
/// acquired lattice lines, trained on the ACS only. 1D acceleration.
struct RakiConfig {
  int ch1 = 32, ch2 = 8;
  int k1_ro = 5, k1_pe = 2;
  int k2_ro = 1, k2_pe = 1;
  int k3_ro = 3, k3_pe = 2;
  int epochs = 500;
  double lr = 2e-3;
  std::uint64_t seed = 0;
};

KspaceData raki_reconstruct(const KspaceData& under, const SamplingMask& mask,
                            const KspaceData& acs, const RakiConfig& cfg);

}  // namespace sparkmri
