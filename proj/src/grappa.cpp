#include "sparkmri/grappa.hpp"

#include <Eigen/Cholesky>

namespace sparkmri {

namespace {

// Tap offset sets. Readout taps are symmetric around the target; phase and
// partition taps are acquired lattice neighbors bracketing the cell,
// e.g. 4 taps -> lattice steps {-1, 0, 1, 2}.
std::vector<int> read_offsets(int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("grappa: readout taps must be odd and >= 1");
  std::vector<int> off;
  for (int d = -(k - 1) / 2; d <= (k - 1) / 2; ++d) off.push_back(d);
  return off;
}

std::vector<int> lattice_offsets(int k) {
  if (k < 1) throw std::invalid_argument("grappa: lattice taps must be >= 1");
  std::vector<int> off;
  const int lo = -(k - 1) / 2;
  for (int j = lo; j < lo + k; ++j) off.push_back(j);
  return off;
}

std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
  const std::int64_t m = (2 * center_index(n) - i) % n;
  return m < 0 ? m + n : m;
}

}  // namespace

std::vector<cplx> GrappaKernel::flat() const {
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(n_offsets()) * coils * n_sources());
  for (const auto& w : w_by_offset)
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
  return out;
}

GrappaKernel calibrate(const KspaceData& acs, int r_pe, int r_pa, const GrappaTaps& taps,
                       double lambda) {
  if (r_pe < 1 || r_pa < 1) throw std::invalid_argument("calibrate: acceleration must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("calibrate: lambda must be >= 0");
  const std::int64_t ro = acs.n_ro(), pe = acs.n_pe(), pa = acs.n_pa(), nc = acs.n_coil();

  GrappaKernel kernel;
  kernel.r_pe = r_pe;
  kernel.r_pa = r_pa;
  kernel.taps = taps;
  kernel.lambda = lambda;
  kernel.coils = static_cast<int>(nc);
  const int n_off = kernel.n_offsets();
  if (n_off == 0) return kernel;

  const auto dr = read_offsets(taps.read);
  const auto jp = lattice_offsets(taps.pe);
  const auto jq = lattice_offsets(taps.pa);
  const std::int64_t n_src = kernel.n_sources();

  // Anchor ranges such that every source and every target lies in the block.
  const std::int64_t r_lo = -dr.front(), r_hi = ro - 1 - dr.back();
  const std::int64_t p_lo = std::max<std::int64_t>(0, -static_cast<std::int64_t>(jp.front()) * r_pe);
  const std::int64_t p_hi =
      pe - 1 - std::max<std::int64_t>(static_cast<std::int64_t>(jp.back()) * r_pe, r_pe - 1);
  const std::int64_t q_lo = std::max<std::int64_t>(0, -static_cast<std::int64_t>(jq.front()) * r_pa);
  const std::int64_t q_hi =
      pa - 1 - std::max<std::int64_t>(static_cast<std::int64_t>(jq.back()) * r_pa, r_pa - 1);
  if (r_lo > r_hi || p_lo > p_hi || q_lo > q_hi)
    throw std::runtime_error("calibrate: ACS smaller than the kernel footprint");
  const std::int64_t n_eq = (r_hi - r_lo + 1) * (p_hi - p_lo + 1) * (q_hi - q_lo + 1);

  Eigen::MatrixXcd A(n_eq, n_src);
  Eigen::MatrixXcd B(n_eq, static_cast<std::int64_t>(nc) * n_off);
  std::int64_t row = 0;
  for (std::int64_t r = r_lo; r <= r_hi; ++r)
    for (std::int64_t p0 = p_lo; p0 <= p_hi; ++p0)
      for (std::int64_t q0 = q_lo; q0 <= q_hi; ++q0, ++row) {
        std::int64_t s = 0;
        for (std::int64_t c = 0; c < nc; ++c)
          for (int ir : dr)
            for (int ij : jp)
              for (int im : jq)
                A(row, s++) = acs.t.at({r + ir, p0 + ij * r_pe, q0 + im * r_pa, c});
        for (int dpe = 0; dpe < r_pe; ++dpe)
          for (int dpa = 0; dpa < r_pa; ++dpa) {
            if (dpe == 0 && dpa == 0) continue;
            const int o = dpe * r_pa + dpa - 1;
            for (std::int64_t c = 0; c < nc; ++c)
              B(row, c * n_off + o) = acs.t.at({r, p0 + dpe, q0 + dpa, c});
          }
      }

  Eigen::MatrixXcd G = A.adjoint() * A;
  const double reg = lambda * (G.trace().real() / static_cast<double>(n_src));
  for (std::int64_t i = 0; i < n_src; ++i) G(i, i) += reg;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(G);
  if (lambda == 0.0) {
    const auto d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax <= 0.0 || d.cwiseAbs().minCoeff() < 1e-13 * dmax)
      throw std::runtime_error(
          "calibrate: singular normal matrix with lambda = 0 (increase ACS or set lambda > 0)");
  }
  Eigen::MatrixXcd W = ldlt.solve(A.adjoint() * B);  // n_src x (nc * n_off)

  kernel.w_by_offset.assign(static_cast<std::size_t>(n_off), Eigen::MatrixXcd(nc, n_src));
  for (int o = 0; o < n_off; ++o)
    for (std::int64_t c = 0; c < nc; ++c)
      kernel.w_by_offset[static_cast<std::size_t>(o)].row(c) = W.col(c * n_off + o).transpose();
  return kernel;
}

KspaceData interpolate(const KspaceData& under, const SamplingMask& mask,
                       const GrappaKernel& kernel) {
  if (under.n_pe() != mask.n_pe || under.n_pa() != mask.n_pa)
    throw std::invalid_argument("interpolate: mask grid does not match k-space");
  if (mask.r_pe != kernel.r_pe || mask.r_pa != kernel.r_pa)
    throw std::invalid_argument("interpolate: mask lattice does not match kernel acceleration");
  if (under.n_coil() != kernel.coils)
    throw std::invalid_argument("interpolate: coil count does not match kernel");

  KspaceData out = under;
  if (kernel.n_offsets() == 0) return out;

  const auto dr = read_offsets(kernel.taps.read);
  const auto jp = lattice_offsets(kernel.taps.pe);
  const auto jq = lattice_offsets(kernel.taps.pa);
  const std::int64_t ro = under.n_ro(), pe = under.n_pe(), pa = under.n_pa(), nc = under.n_coil();

  Eigen::VectorXcd src(kernel.n_sources());
  Eigen::VectorXcd tgt(nc);
  for (std::int64_t p = 0; p < pe; ++p) {
    const int dpe = static_cast<int>(p % kernel.r_pe);
    for (std::int64_t q = 0; q < pa; ++q) {
      const int dpa = static_cast<int>(q % kernel.r_pa);
      if (dpe == 0 && dpa == 0) continue;
      if (mask.sampled(p, q)) continue;
      const int o = dpe * static_cast<int>(kernel.r_pa) + dpa - 1;
      const auto& W = kernel.w_by_offset[static_cast<std::size_t>(o)];
      const std::int64_t p0 = p - dpe, q0 = q - dpa;
      for (std::int64_t r = 0; r < ro; ++r) {
        std::int64_t s = 0;
        for (std::int64_t c = 0; c < nc; ++c)
          for (int ir : dr) {
            const std::int64_t rr = r + ir;
            for (int ij : jp) {
              const std::int64_t pp = p0 + static_cast<std::int64_t>(ij) * kernel.r_pe;
              for (int im : jq) {
                const std::int64_t qq = q0 + static_cast<std::int64_t>(im) * kernel.r_pa;
                const bool in =
                    rr >= 0 && rr < ro && pp >= 0 && pp < pe && qq >= 0 && qq < pa;
                src(s++) = in ? under.t.at({rr, pp, qq, c}) : cplx{0.0, 0.0};
              }
            }
          }
        tgt.noalias() = W * src;
        for (std::int64_t c = 0; c < nc; ++c) out.t.at({r, p, q, c}) = tgt(c);
      }
    }
  }
  return out;
}

KspaceData acs_replace(const KspaceData& recon, const KspaceData& acq, const AcsRegion& bounds) {
  if (recon.t.dims != acq.t.dims)
    throw std::invalid_argument("acs_replace: recon/acq dims mismatch");
  KspaceData out = recon;
  const std::int64_t nc = recon.n_coil();
  for (std::int64_t pe = std::max<std::int64_t>(0, bounds.pe_lo);
       pe <= std::min(recon.n_pe() - 1, bounds.pe_hi); ++pe)
    for (std::int64_t pa = std::max<std::int64_t>(0, bounds.pa_lo);
         pa <= std::min(recon.n_pa() - 1, bounds.pa_hi); ++pa)
      for (std::int64_t r = 0; r < recon.n_ro(); ++r)
        for (std::int64_t c = 0; c < nc; ++c) out.t.at({r, pe, pa, c}) = acq.t.at({r, pe, pa, c});
  return out;
}

KspaceData make_virtual_coils(const KspaceData& ksp) {
  const std::int64_t ro = ksp.n_ro(), pe = ksp.n_pe(), pa = ksp.n_pa(), nc = ksp.n_coil();
  ComplexTensor out({ro, pe, pa, 2 * nc});
  for (std::int64_t r = 0; r < ro; ++r)
    for (std::int64_t p = 0; p < pe; ++p)
      for (std::int64_t q = 0; q < pa; ++q) {
        const std::int64_t rm = mirror_index(r, ro), pm = mirror_index(p, pe),
                           qm = mirror_index(q, pa);
        for (std::int64_t c = 0; c < nc; ++c) {
          out.at({r, p, q, c}) = ksp.t.at({r, p, q, c});
          out.at({r, p, q, nc + c}) = std::conj(ksp.t.at({rm, pm, qm, c}));
        }
      }
  return KspaceData(std::move(out), ksp.readout_os);
}

SamplingMask mirror_mask(const SamplingMask& mask) {
  SamplingMask m = mask;
  for (std::int64_t p = 0; p < mask.n_pe; ++p)
    for (std::int64_t q = 0; q < mask.n_pa; ++q)
      m.set(p, q, mask.sampled(mirror_index(p, mask.n_pe), mirror_index(q, mask.n_pa)));
  m.acs.reset();
  return m;
}

KspaceData vc_grappa(const KspaceData& under, const SamplingMask& mask, const KspaceData& acs,
                     int r_pe, int r_pa, const GrappaTaps& taps, double lambda) {
  if (r_pe == 1 && r_pa == 1) return under;
  // The virtual block is sampled on the index-reversed lattice; a single
  // shared kernel geometry requires that reversal to land on the same lattice.
  if ((2 * center_index(under.n_pe())) % r_pe != 0 || (2 * center_index(under.n_pa())) % r_pa != 0)
    throw std::runtime_error(
        "vc_grappa: mirrored sampling leaves no valid calibration equations for this grid/lattice");

  const std::int64_t nc = under.n_coil();
  const KspaceData aug = make_virtual_coils(under);

  // Mirror-valid ACS: on even extents the reflected block sticks one index
  // out, so drop local index 0 on those axes before augmenting.
  std::vector<std::int64_t> acs_dims = acs.t.dims;
  std::vector<std::int64_t> lo(4, 0);
  for (int a = 0; a < 3; ++a)
    if (acs.t.dims[a] % 2 == 0 && acs.t.dims[a] > 1) {
      lo[a] = 1;
      acs_dims[a] -= 1;
    }
  ComplexTensor aug_acs({acs_dims[0], acs_dims[1], acs_dims[2], 2 * nc});
  for (std::int64_t r = 0; r < acs_dims[0]; ++r)
    for (std::int64_t p = 0; p < acs_dims[1]; ++p)
      for (std::int64_t q = 0; q < acs_dims[2]; ++q) {
        const std::int64_t rs = r + lo[0], ps = p + lo[1], qs = q + lo[2];
        const std::int64_t rm = 2 * center_index(acs.n_ro()) - rs,
                           pm = 2 * center_index(acs.n_pe()) - ps,
                           qm = 2 * center_index(acs.n_pa()) - qs;
        for (std::int64_t c = 0; c < nc; ++c) {
          aug_acs.at({r, p, q, c}) = acs.t.at({rs, ps, qs, c});
          aug_acs.at({r, p, q, nc + c}) = std::conj(acs.t.at({rm, pm, qm, c}));
        }
      }

  const GrappaKernel kernel =
      calibrate(KspaceData(std::move(aug_acs)), r_pe, r_pa, taps, lambda);
  const KspaceData filled = interpolate(aug, mask, kernel);

  ComplexTensor out({under.n_ro(), under.n_pe(), under.n_pa(), nc});
  for (std::int64_t r = 0; r < under.n_ro(); ++r)
    for (std::int64_t p = 0; p < under.n_pe(); ++p)
      for (std::int64_t q = 0; q < under.n_pa(); ++q)
        for (std::int64_t c = 0; c < nc; ++c)
          out.at({r, p, q, c}) = filled.t.at({r, p, q, c});
  return KspaceData(std::move(out), under.readout_os);
}

}  // namespace sparkmri
