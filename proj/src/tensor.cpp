#include "sparkmri/tensor.hpp"

#include <cmath>

namespace sparkmri {

namespace {

// Shared walker for crop/pad: copies the overlap window between source and
// destination, both centered at floor(extent/2).
void copy_centered(const ComplexTensor& src, ComplexTensor& dst) {
  const int rank = src.rank();
  std::vector<std::int64_t> span(rank), src_lo(rank), dst_lo(rank);
  for (int a = 0; a < rank; ++a) {
    const std::int64_t ns = src.dims[a], nd = dst.dims[a];
    const std::int64_t m = std::min(ns, nd);
    span[a] = m;
    src_lo[a] = center_index(ns) - center_index(m);
    dst_lo[a] = center_index(nd) - center_index(m);
  }
  std::vector<std::int64_t> idx(rank, 0);
  std::vector<std::int64_t> si(rank), di(rank);
  for (;;) {
    for (int a = 0; a < rank; ++a) {
      si[a] = src_lo[a] + idx[a];
      di[a] = dst_lo[a] + idx[a];
    }
    dst.at(di) = src.at(si);
    int a = rank - 1;
    for (; a >= 0; --a) {
      if (++idx[a] < span[a]) break;
      idx[a] = 0;
    }
    if (a < 0) break;
  }
}

}  // namespace

ComplexTensor crop_center(const ComplexTensor& t, const std::vector<std::int64_t>& target) {
  if (static_cast<int>(target.size()) != t.rank())
    throw std::invalid_argument("crop_center: target rank mismatch");
  for (int a = 0; a < t.rank(); ++a)
    if (target[a] > t.dims[a])
      throw std::invalid_argument("crop_center: target extent exceeds source on axis " + std::to_string(a));
  ComplexTensor out(target);
  copy_centered(t, out);
  return out;
}

ComplexTensor pad_center(const ComplexTensor& t, const std::vector<std::int64_t>& target) {
  if (static_cast<int>(target.size()) != t.rank())
    throw std::invalid_argument("pad_center: target rank mismatch");
  for (int a = 0; a < t.rank(); ++a)
    if (target[a] < t.dims[a])
      throw std::invalid_argument("pad_center: target extent smaller than source on axis " + std::to_string(a));
  ComplexTensor out(target);
  copy_centered(t, out);
  return out;
}

double norm2(const ComplexTensor& t) {
  double s = 0.0;
  for (const auto& z : t.v) s += std::norm(z);
  return std::sqrt(s);
}

double max_abs(const ComplexTensor& t) {
  double m = 0.0;
  for (const auto& z : t.v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace sparkmri
