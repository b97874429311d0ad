#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparkmri {

using cplx = std::complex<double>;

/// Center index convention used everywhere: DC/crop/pad center sits at
/// floor(extent / 2).
inline std::int64_t center_index(std::int64_t extent) { return extent / 2; }

/// Dense n-dimensional complex array, row-major (last axis fastest).
struct ComplexTensor {
  std::vector<std::int64_t> dims;
  std::vector<cplx> v;

  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<std::int64_t> d) : dims(std::move(d)) {
    v.assign(static_cast<std::size_t>(count(dims)), cplx{0.0, 0.0});
  }

  static std::int64_t count(const std::vector<std::int64_t>& d) {
    if (d.empty()) throw std::invalid_argument("tensor dims must be non-empty");
    std::int64_t n = 1;
    for (auto e : d) {
      if (e < 1) throw std::invalid_argument("tensor extent must be >= 1");
      n *= e;
    }
    return n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int rank() const { return static_cast<int>(dims.size()); }

  std::int64_t stride(int axis) const {
    std::int64_t s = 1;
    for (int a = rank() - 1; a > axis; --a) s *= dims[a];
    return s;
  }

  std::int64_t offset(const std::vector<std::int64_t>& idx) const {
    std::int64_t o = 0;
    for (int a = 0; a < rank(); ++a) o = o * dims[a] + idx[a];
    return o;
  }

  cplx& at(const std::vector<std::int64_t>& idx) { return v[offset(idx)]; }
  const cplx& at(const std::vector<std::int64_t>& idx) const { return v[offset(idx)]; }
};

/// Dense n-dimensional real array, same layout rules as ComplexTensor.
struct RealTensor {
  std::vector<std::int64_t> dims;
  std::vector<double> v;

  RealTensor() = default;
  explicit RealTensor(std::vector<std::int64_t> d) : dims(std::move(d)) {
    v.assign(static_cast<std::size_t>(ComplexTensor::count(dims)), 0.0);
  }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int rank() const { return static_cast<int>(dims.size()); }

  std::int64_t offset(const std::vector<std::int64_t>& idx) const {
    std::int64_t o = 0;
    for (int a = 0; a < rank(); ++a) o = o * dims[a] + idx[a];
    return o;
  }
  double& at(const std::vector<std::int64_t>& idx) { return v[offset(idx)]; }
  double at(const std::vector<std::int64_t>& idx) const { return v[offset(idx)]; }
};

/// Multi-coil k-space. Axis order is fixed: (readout, phase, partition, coil),
/// partition extent 1 for 2D data. readout_os is the readout oversampling
/// factor (1 cartesian, 3 wave).
struct KspaceData {
  ComplexTensor t;
  int readout_os = 1;

  KspaceData() = default;
  explicit KspaceData(ComplexTensor tensor, int os = 1) : t(std::move(tensor)), readout_os(os) {
    if (t.rank() != 4) throw std::invalid_argument("k-space tensor must have rank 4 (ro, pe, pa, coil)");
  }

  std::int64_t n_ro() const { return t.dims[0]; }
  std::int64_t n_pe() const { return t.dims[1]; }
  std::int64_t n_pa() const { return t.dims[2]; }
  std::int64_t n_coil() const { return t.dims[3]; }
};

/// Image-domain data, (M, N, P) or (M, N, P, coil).
struct ImageData {
  ComplexTensor t;
  bool has_coil = false;

  ImageData() = default;
  ImageData(ComplexTensor tensor, bool coil_axis) : t(std::move(tensor)), has_coil(coil_axis) {
    const int want = coil_axis ? 4 : 3;
    if (t.rank() != want) throw std::invalid_argument("image tensor rank does not match coil-axis flag");
  }

  std::int64_t n_x() const { return t.dims[0]; }
  std::int64_t n_y() const { return t.dims[1]; }
  std::int64_t n_z() const { return t.dims[2]; }
  std::int64_t n_coil() const { return has_coil ? t.dims[3] : 1; }
};

/// Center crop to target dims; keeps indices [c - floor(m/2), c - floor(m/2) + m)
/// per axis with c = floor(n/2).
ComplexTensor crop_center(const ComplexTensor& t, const std::vector<std::int64_t>& target);

/// Center zero-pad to target dims; inverse of crop_center for matching dims.
ComplexTensor pad_center(const ComplexTensor& t, const std::vector<std::int64_t>& target);

double norm2(const ComplexTensor& t);
double max_abs(const ComplexTensor& t);

}  // namespace sparkmri
