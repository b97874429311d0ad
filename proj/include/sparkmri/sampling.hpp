#pragma once

#include <optional>

#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Inclusive ACS index ranges over (phase, partition) plus the rate the
/// region is sampled at ((1,1) = fully sampled).
struct AcsRegion {
  std::int64_t pe_lo = 0, pe_hi = -1;
  std::int64_t pa_lo = 0, pa_hi = -1;
  int r_pe = 1, r_pa = 1;

  std::int64_t pe_count() const { return pe_hi - pe_lo + 1; }
  std::int64_t pa_count() const { return pa_hi - pa_lo + 1; }
  bool contains(std::int64_t pe, std::int64_t pa) const {
    return pe >= pe_lo && pe <= pe_hi && pa >= pa_lo && pa <= pa_hi;
  }
};

/// Boolean sampling pattern over (phase, partition); partition extent 1 for
/// 2D. Readout is always fully sampled.
struct SamplingMask {
  std::int64_t n_pe = 0, n_pa = 1;
  std::vector<std::uint8_t> grid;  // row-major (pe, pa)
  std::optional<AcsRegion> acs;
  int r_pe = 1, r_pa = 1;  // nominal acceleration

  bool sampled(std::int64_t pe, std::int64_t pa) const {
    return grid[static_cast<std::size_t>(pe * n_pa + pa)] != 0;
  }
  void set(std::int64_t pe, std::int64_t pa, bool v) {
    grid[static_cast<std::size_t>(pe * n_pa + pa)] = v ? 1 : 0;
  }
  std::int64_t count() const;
  double net_acceleration() const;
};

/// Every R-th phase line from index 0 plus a centered block of n_acs
/// contiguous, fully sampled lines.
SamplingMask uniform_1d(std::int64_t n_pe, int r, std::int64_t n_acs);

/// 2D lattice anchored at (0, 0) plus a centered fully sampled ACS block.
SamplingMask uniform_2d(std::int64_t n_pe, std::int64_t n_pa, int r_pe, int r_pa,
                        std::int64_t acs_pe, std::int64_t acs_pa);

/// CAIPI lattice: pa = 0 (mod r_pa) and pe = shift*(pa/r_pa) (mod r_pe).
SamplingMask caipi_2d(std::int64_t n_pe, std::int64_t n_pa, int r_pe, int r_pa, int shift);

/// Removes samples outside the inscribed ellipse; a declared ACS block is
/// exempt from the filter.
SamplingMask elliptical_filter(const SamplingMask& mask);

/// Centered ACS block on an r_acs lattice, exterior on an r_ext lattice,
/// elliptical filter optionally applied to the exterior only.
SamplingMask hybrid_mask(std::int64_t n_pe, std::int64_t n_pa, std::int64_t acs_pe,
                         std::int64_t acs_pa, std::pair<int, int> r_acs,
                         std::pair<int, int> r_ext, bool elliptical);

/// Zeroes unsampled (pe, pa) entries across readout and coil.
KspaceData apply_mask(const KspaceData& ksp, const SamplingMask& mask);

/// Lattice-only variant of a mask: drops ACS lines that are not on the
/// acceleration lattice (the acquisition pattern a reconstruction sees when
/// the ACS is excluded from the data).
SamplingMask strip_acs(const SamplingMask& mask);

}  // namespace sparkmri
