#pragma once

#include <vector>

#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Centered orthonormal DFT along the named axes: DC lands at
/// floor(extent/2) on every transformed axis; scaling is 1/sqrt(n) per axis
/// so fftc/ifftc are unitary and exact inverses.
ComplexTensor fftc(const ComplexTensor& t, const std::vector<int>& axes);
ComplexTensor ifftc(const ComplexTensor& t, const std::vector<int>& axes);

/// All-spatial transforms for rank-4 k-space/coil-image stacks
/// (axes 0..2, coil axis untouched).
KspaceData fftc_spatial(const ImageData& coil_images, int readout_os = 1);
ImageData ifftc_spatial(const KspaceData& ksp);

}  // namespace sparkmri
