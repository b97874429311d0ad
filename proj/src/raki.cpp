#include "sparkmri/raki.hpp"

#include <cmath>

#include "sparkmri/rng.hpp"

namespace sparkmri {

namespace {

struct RakiGeom {
  int r = 1;
  std::int64_t ro_foot = 0, pe_foot = 0;  // composed valid footprints
  std::int64_t ro_anchor = 0, pe_anchor = 0;
};

Network build_raki_net(const RakiConfig& cfg, int in_ch, int r) {
  Network net;
  net.layers.push_back(make_conv(in_ch, cfg.ch1, {cfg.k1_ro, cfg.k1_pe}, false));
  net.layers.push_back(make_conv(cfg.ch1, cfg.ch2, {cfg.k2_ro, cfg.k2_pe}, false));
  net.layers.push_back(make_conv(cfg.ch2, 2 * (r - 1), {cfg.k3_ro, cfg.k3_pe}, false));
  net.acts = {Act::relu, Act::relu, Act::identity};
  net.validate();
  return net;
}

RakiGeom geometry(const RakiConfig& cfg, int r) {
  RakiGeom g;
  g.r = r;
  g.ro_foot = cfg.k1_ro + cfg.k2_ro + cfg.k3_ro - 2;
  g.pe_foot = cfg.k1_pe + cfg.k2_pe + cfg.k3_pe - 2;
  g.ro_anchor = (g.ro_foot - 1) / 2;
  g.pe_anchor = (g.pe_foot - 1) / 2;  // predict the gap after this source row
  return g;
}

// k-space values at decimated lattice rows -> (2C, ro, n_rows) real tensor.
RealTensor pack_rows(const KspaceData& ksp, const std::vector<std::int64_t>& rows, double scale) {
  const std::int64_t nc = ksp.n_coil(), ro = ksp.n_ro();
  const std::int64_t nr = static_cast<std::int64_t>(rows.size());
  RealTensor out({2 * nc, ro, nr});
  const double inv = 1.0 / scale;
  for (std::int64_t c = 0; c < nc; ++c)
    for (std::int64_t i = 0; i < ro; ++i)
      for (std::int64_t j = 0; j < nr; ++j) {
        const cplx z = ksp.t.at({i, rows[static_cast<std::size_t>(j)], 0, c});
        out.at({2 * c, i, j}) = z.real() * inv;
        out.at({2 * c + 1, i, j}) = z.imag() * inv;
      }
  return out;
}

}  // namespace

KspaceData raki_reconstruct(const KspaceData& under, const SamplingMask& mask,
                            const KspaceData& acs, const RakiConfig& cfg) {
  if (mask.n_pa != 1 || under.n_pa() != 1)
    throw std::invalid_argument("raki: only 1D-accelerated 2D data is supported");
  if (!mask.acs) throw std::invalid_argument("raki: mask needs an ACS region");
  const int r = mask.r_pe;
  if (r == 1) return under;
  if (under.n_coil() != acs.n_coil()) throw std::invalid_argument("raki: coil count mismatch");

  const RakiGeom g = geometry(cfg, r);
  const std::int64_t nc = under.n_coil();

  // Decimated training grid: lattice-aligned rows inside the ACS.
  std::vector<std::int64_t> acs_rows;  // local ACS pe indices
  const std::int64_t acs_lo = mask.acs->pe_lo;
  for (std::int64_t p = 0; p < acs.n_pe(); ++p)
    if ((p + acs_lo) % r == 0) acs_rows.push_back(p);
  if (static_cast<std::int64_t>(acs_rows.size()) < g.pe_foot || acs.n_ro() < g.ro_foot)
    throw std::runtime_error("raki: ACS smaller than the composed receptive field");

  double scale = max_abs(acs.t);
  if (scale == 0.0) scale = 1.0;
  const RealTensor x_train = pack_rows(acs, acs_rows, scale);

  const std::int64_t ro_out = acs.n_ro() - g.ro_foot + 1;
  const std::int64_t pe_out = static_cast<std::int64_t>(acs_rows.size()) - g.pe_foot + 1;

  // Decimated full grid for reconstruction.
  std::vector<std::int64_t> full_rows;
  for (std::int64_t p = 0; p < under.n_pe(); p += r) full_rows.push_back(p);
  const RealTensor x_full = pack_rows(under, full_rows, scale);
  const std::int64_t ro_full_out = under.n_ro() - g.ro_foot + 1;
  const std::int64_t pe_full_out = static_cast<std::int64_t>(full_rows.size()) - g.pe_foot + 1;

  KspaceData out = under;
  for (std::int64_t coil = 0; coil < nc; ++coil) {
    Network net = build_raki_net(cfg, static_cast<int>(2 * nc), r);
    init_network(net, CounterRng{cfg.seed}.substream(static_cast<std::uint64_t>(coil)).seed);

    // Targets: the r-1 skipped rows after the anchor source row.
    RealTensor target({2 * (r - 1), ro_out, pe_out});
    for (std::int64_t i = 0; i < ro_out; ++i)
      for (std::int64_t j = 0; j < pe_out; ++j)
        for (int dr = 1; dr < r; ++dr) {
          const std::int64_t pe = acs_rows[static_cast<std::size_t>(j + g.pe_anchor)] + dr;
          const cplx z = acs.t.at({i + g.ro_anchor, pe, 0, coil});
          target.at({2 * (dr - 1), i, j}) = z.real() / scale;
          target.at({2 * (dr - 1) + 1, i, j}) = z.imag() / scale;
        }

    AdamState adam = make_adam(net, cfg.lr);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      const ForwardTrace trace = net_forward_trace(net, x_train);
      const MseResult loss = mse_loss(trace_output(net, trace), target);
      const Gradients grads = net_backward(net, x_train, trace, loss.grad);
      adam_step(adam, net, grads.dw);
    }

    const RealTensor pred = net_forward(net, x_full);
    for (std::int64_t i = 0; i < ro_full_out; ++i)
      for (std::int64_t j = 0; j < pe_full_out; ++j)
        for (int dr = 1; dr < r; ++dr) {
          const std::int64_t pe = full_rows[static_cast<std::size_t>(j + g.pe_anchor)] + dr;
          if (pe >= under.n_pe() || mask.sampled(pe, 0)) continue;
          out.t.at({i + g.ro_anchor, pe, 0, coil}) =
              scale * cplx{pred.at({2 * (dr - 1), i, j}), pred.at({2 * (dr - 1) + 1, i, j})};
        }
  }
  return out;
}

}  // namespace sparkmri
