#pragma once

#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Root-sum-of-squares magnitude over the (last) coil axis.
RealTensor sos_combine(const ImageData& coil_images);

/// Matched-filter combine with known sensitivities:
/// sum_c conj(S_c) * img_c / sum_c |S_c|^2, zero where the denominator is 0.
ImageData complex_combine(const ImageData& coil_images, const ImageData& maps);

RealTensor magnitude(const ImageData& img);

}  // namespace sparkmri
