#include "sparkmri/sampling.hpp"

namespace sparkmri {

namespace {

SamplingMask blank(std::int64_t n_pe, std::int64_t n_pa, int r_pe, int r_pa) {
  if (n_pe < 1 || n_pa < 1) throw std::invalid_argument("mask: grid extents must be >= 1");
  if (r_pe < 1 || r_pa < 1) throw std::invalid_argument("mask: acceleration must be >= 1");
  SamplingMask m;
  m.n_pe = n_pe;
  m.n_pa = n_pa;
  m.r_pe = r_pe;
  m.r_pa = r_pa;
  m.grid.assign(static_cast<std::size_t>(n_pe * n_pa), 0);
  return m;
}

std::int64_t centered_lo(std::int64_t n, std::int64_t m) { return center_index(n) - center_index(m); }

bool inside_ellipse(std::int64_t pe, std::int64_t pa, std::int64_t n_pe, std::int64_t n_pa) {
  const double u = (static_cast<double>(pe - center_index(n_pe))) / (static_cast<double>(n_pe) / 2.0);
  const double w = (static_cast<double>(pa - center_index(n_pa))) / (static_cast<double>(n_pa) / 2.0);
  return u * u + w * w <= 1.0;
}

}  // namespace

std::int64_t SamplingMask::count() const {
  std::int64_t c = 0;
  for (auto g : grid) c += g != 0;
  return c;
}

double SamplingMask::net_acceleration() const {
  const std::int64_t c = count();
  if (c == 0) throw std::runtime_error("mask: no sampled entries, net acceleration undefined");
  return static_cast<double>(n_pe * n_pa) / static_cast<double>(c);
}

SamplingMask uniform_1d(std::int64_t n_pe, int r, std::int64_t n_acs) {
  if (r < 1 || r > n_pe) throw std::invalid_argument("uniform_1d: need 1 <= R <= n_pe");
  if (n_acs < 0 || n_acs > n_pe) throw std::invalid_argument("uniform_1d: need 0 <= n_acs <= n_pe");
  SamplingMask m = blank(n_pe, 1, r, 1);
  for (std::int64_t pe = 0; pe < n_pe; pe += r) m.set(pe, 0, true);
  if (n_acs > 0) {
    const std::int64_t lo = centered_lo(n_pe, n_acs);
    for (std::int64_t pe = lo; pe < lo + n_acs; ++pe) m.set(pe, 0, true);
    m.acs = AcsRegion{lo, lo + n_acs - 1, 0, 0, 1, 1};
  }
  return m;
}

SamplingMask uniform_2d(std::int64_t n_pe, std::int64_t n_pa, int r_pe, int r_pa,
                        std::int64_t acs_pe, std::int64_t acs_pa) {
  SamplingMask m = blank(n_pe, n_pa, r_pe, r_pa);
  for (std::int64_t pe = 0; pe < n_pe; pe += r_pe)
    for (std::int64_t pa = 0; pa < n_pa; pa += r_pa) m.set(pe, pa, true);
  if (acs_pe > 0 && acs_pa > 0) {
    const std::int64_t pe_lo = centered_lo(n_pe, acs_pe);
    const std::int64_t pa_lo = centered_lo(n_pa, acs_pa);
    for (std::int64_t pe = pe_lo; pe < pe_lo + acs_pe; ++pe)
      for (std::int64_t pa = pa_lo; pa < pa_lo + acs_pa; ++pa) m.set(pe, pa, true);
    m.acs = AcsRegion{pe_lo, pe_lo + acs_pe - 1, pa_lo, pa_lo + acs_pa - 1, 1, 1};
  }
  return m;
}

SamplingMask caipi_2d(std::int64_t n_pe, std::int64_t n_pa, int r_pe, int r_pa, int shift) {
  SamplingMask m = blank(n_pe, n_pa, r_pe, r_pa);
  for (std::int64_t pa = 0; pa < n_pa; pa += r_pa) {
    const std::int64_t off = (static_cast<std::int64_t>(shift) * (pa / r_pa)) % r_pe;
    for (std::int64_t pe = off; pe < n_pe; pe += r_pe) m.set(pe, pa, true);
  }
  return m;
}

SamplingMask elliptical_filter(const SamplingMask& mask) {
  SamplingMask m = mask;
  for (std::int64_t pe = 0; pe < m.n_pe; ++pe)
    for (std::int64_t pa = 0; pa < m.n_pa; ++pa) {
      if (m.acs && m.acs->contains(pe, pa)) continue;
      if (!inside_ellipse(pe, pa, m.n_pe, m.n_pa)) m.set(pe, pa, false);
    }
  return m;
}

SamplingMask hybrid_mask(std::int64_t n_pe, std::int64_t n_pa, std::int64_t acs_pe,
                         std::int64_t acs_pa, std::pair<int, int> r_acs,
                         std::pair<int, int> r_ext, bool elliptical) {
  SamplingMask m = blank(n_pe, n_pa, r_ext.first, r_ext.second);
  const std::int64_t pe_lo = centered_lo(n_pe, acs_pe);
  const std::int64_t pa_lo = centered_lo(n_pa, acs_pa);
  AcsRegion acs{pe_lo, pe_lo + acs_pe - 1, pa_lo, pa_lo + acs_pa - 1, r_acs.first, r_acs.second};
  for (std::int64_t pe = 0; pe < n_pe; ++pe)
    for (std::int64_t pa = 0; pa < n_pa; ++pa) {
      const bool in_acs = acs.contains(pe, pa);
      const int rp = in_acs ? r_acs.first : r_ext.first;
      const int rq = in_acs ? r_acs.second : r_ext.second;
      bool s = (pe % rp == 0) && (pa % rq == 0);
      if (s && !in_acs && elliptical && !inside_ellipse(pe, pa, n_pe, n_pa)) s = false;
      m.set(pe, pa, s);
    }
  m.acs = acs;
  return m;
}

KspaceData apply_mask(const KspaceData& ksp, const SamplingMask& mask) {
  if (ksp.n_pe() != mask.n_pe || ksp.n_pa() != mask.n_pa)
    throw std::invalid_argument("apply_mask: mask grid does not match k-space");
  KspaceData out = ksp;
  const std::int64_t nc = ksp.n_coil();
  for (std::int64_t r = 0; r < ksp.n_ro(); ++r)
    for (std::int64_t pe = 0; pe < ksp.n_pe(); ++pe)
      for (std::int64_t pa = 0; pa < ksp.n_pa(); ++pa) {
        if (mask.sampled(pe, pa)) continue;
        cplx* p = out.t.v.data() + ((r * ksp.n_pe() + pe) * ksp.n_pa() + pa) * nc;
        for (std::int64_t c = 0; c < nc; ++c) p[c] = cplx{0.0, 0.0};
      }
  return out;
}

SamplingMask strip_acs(const SamplingMask& mask) {
  SamplingMask m = mask;
  m.acs.reset();
  for (std::int64_t pe = 0; pe < m.n_pe; ++pe)
    for (std::int64_t pa = 0; pa < m.n_pa; ++pa) {
      if (!m.sampled(pe, pa)) continue;
      const bool on_lattice = (pe % m.r_pe == 0) && (pa % m.r_pa == 0);
      bool keep = on_lattice;
      if (on_lattice && mask.acs && !mask.acs->contains(pe, pa)) {
        // exterior of a hybrid/elliptical mask: stay faithful to what was acquired
        keep = mask.sampled(pe, pa);
      }
      m.set(pe, pa, keep);
    }
  return m;
}

}  // namespace sparkmri
