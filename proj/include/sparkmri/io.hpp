#pragma once

#include <string>

#include "sparkmri/sampling.hpp"
#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Binary container, all integers little-endian:
///   magic "KSPC" | version u32 (1) | kind u32 | rank u32 | dims rank*u64 |
///   dtype u32 | payload (row-major)
/// kind: 0 tensor, 1 mask, 2 psf, 3 model, 4 maps
/// dtype: 0 complex128 interleaved, 1 float64, 2 uint8
struct Container {
  enum Kind : std::uint32_t { kTensor = 0, kMask = 1, kPsf = 2, kModel = 3, kMaps = 4 };
  enum Dtype : std::uint32_t { kComplex128 = 0, kFloat64 = 1, kUint8 = 2 };

  std::uint32_t kind = kTensor;
  std::uint32_t dtype = kComplex128;
  std::vector<std::uint64_t> dims;
  std::vector<cplx> cvalues;          // dtype 0
  std::vector<double> rvalues;        // dtype 1
  std::vector<std::uint8_t> bvalues;  // dtype 2

  std::uint64_t element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  static Container from_tensor(const ComplexTensor& t, Kind kind = kTensor);
  static Container from_real(const RealTensor& t, Kind kind = kTensor);
  static Container from_mask(const SamplingMask& m);
  ComplexTensor to_tensor() const;
  RealTensor to_real() const;
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

/// 8-bit binary PGM with linear windowing to [0, 255]; window (0, max) when
/// lo/hi are left equal to auto (lo = hi = 0 means auto).
void export_pgm(const RealTensor& image, const std::string& path, double lo = 0.0,
                double hi = 0.0);

}  // namespace sparkmri
