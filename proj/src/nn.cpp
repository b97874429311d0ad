#include "sparkmri/nn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "sparkmri/rng.hpp"

namespace sparkmri {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

struct ConvGeom {
  std::vector<std::int64_t> in_dims, out_dims;  // spatial only
  std::int64_t in_pix = 1, out_pix = 1;
  std::int64_t inner_in = 1, inner_out = 1;  // last-axis extents
  std::int64_t rows_out = 1;                 // out_pix / inner_out
  std::vector<std::int64_t> k_coords;        // flattened kernel coords, row-major
  int rank = 0;
};

ConvGeom geometry(const ConvLayer& layer, const RealTensor& x) {
  if (x.rank() != static_cast<int>(layer.kernel.size()) + 1)
    throw std::invalid_argument("conv: input rank does not match kernel rank");
  if (x.dims[0] != layer.in_ch) throw std::invalid_argument("conv: input channel mismatch");
  ConvGeom g;
  g.rank = static_cast<int>(layer.kernel.size());
  for (int a = 0; a < g.rank; ++a) {
    const std::int64_t d = x.dims[a + 1];
    const int k = layer.kernel[a];
    if (layer.same_pad && k % 2 == 0)
      throw std::invalid_argument("conv: same-padding requires odd kernels");
    const std::int64_t o = layer.same_pad ? d : d - k + 1;
    if (o < 1) throw std::invalid_argument("conv: input smaller than the valid kernel footprint");
    g.in_dims.push_back(d);
    g.out_dims.push_back(o);
    g.in_pix *= d;
    g.out_pix *= o;
  }
  g.inner_in = g.in_dims.back();
  g.inner_out = g.out_dims.back();
  g.rows_out = g.out_pix / g.inner_out;
  return g;
}

// Fill (or scatter back) the im2col block for output rows [row0, row1).
// col is (in_ch * kvol) x (n_rows * inner_out), row-major.
template <bool Scatter>
void im2col_rows(const ConvLayer& layer, const ConvGeom& g,
                 std::conditional_t<Scatter, RealTensor&, const RealTensor&> x, RowMat& col,
                 std::int64_t row0, std::int64_t row1) {
  const std::int64_t kvol = layer.kernel_volume();
  const std::int64_t n_rows = row1 - row0;
  const std::int64_t w = g.inner_out;
  std::vector<int> kc(static_cast<std::size_t>(g.rank));
  std::vector<std::int64_t> oc(static_cast<std::size_t>(g.rank));

  for (std::int64_t t = 0; t < kvol; ++t) {
    // kernel coords of tap t
    std::int64_t tt = t;
    for (int a = g.rank - 1; a >= 0; --a) {
      kc[a] = static_cast<int>(tt % layer.kernel[a]);
      tt /= layer.kernel[a];
    }
    const std::int64_t dt_inner =
        kc[g.rank - 1] - (layer.same_pad ? layer.kernel[g.rank - 1] / 2 : 0);
    const std::int64_t jlo = std::max<std::int64_t>(0, -dt_inner);
    const std::int64_t jhi = std::min<std::int64_t>(w, g.inner_in - dt_inner);

    for (std::int64_t row = row0; row < row1; ++row) {
      // outer coords of this output row
      std::int64_t rr = row;
      for (int a = g.rank - 2; a >= 0; --a) {
        oc[a] = rr % g.out_dims[a];
        rr /= g.out_dims[a];
      }
      bool outside = false;
      std::int64_t src_base = 0;
      for (int a = 0; a < g.rank - 1; ++a) {
        const std::int64_t s = oc[a] + kc[a] - (layer.same_pad ? layer.kernel[a] / 2 : 0);
        if (s < 0 || s >= g.in_dims[a]) {
          outside = true;
          break;
        }
        src_base = src_base * g.in_dims[a] + s;
      }
      src_base = src_base * g.inner_in + dt_inner;

      for (int i = 0; i < layer.in_ch; ++i) {
        double* crow = col.data() + (static_cast<std::int64_t>(i) * kvol + t) * col.cols() +
                       (row - row0) * w;
        if (outside || jlo >= jhi) {
          if constexpr (!Scatter) std::memset(crow, 0, sizeof(double) * static_cast<std::size_t>(w));
          continue;
        }
        if constexpr (Scatter) {
          double* xr = x.v.data() + static_cast<std::int64_t>(i) * g.in_pix + src_base;
          for (std::int64_t j = jlo; j < jhi; ++j) xr[j] += crow[j];
        } else {
          const double* xr = x.v.data() + static_cast<std::int64_t>(i) * g.in_pix + src_base;
          std::memset(crow, 0, sizeof(double) * static_cast<std::size_t>(jlo));
          std::memcpy(crow + jlo, xr + jlo, sizeof(double) * static_cast<std::size_t>(jhi - jlo));
          std::memset(crow + jhi, 0, sizeof(double) * static_cast<std::size_t>(w - jhi));
        }
      }
    }
  }
}

std::int64_t rows_per_chunk(const ConvGeom& g, std::int64_t k_total) {
  const std::int64_t budget = 4 << 20;  // ~32 MB of col buffer
  const std::int64_t rows = std::max<std::int64_t>(1, budget / std::max<std::int64_t>(1, k_total * g.inner_out));
  return std::min(rows, g.rows_out);
}

}  // namespace

ConvLayer make_conv(int in_ch, int out_ch, std::vector<int> kernel, bool same_pad) {
  if (in_ch < 1 || out_ch < 1) throw std::invalid_argument("conv: channel counts must be >= 1");
  for (int k : kernel)
    if (k < 1) throw std::invalid_argument("conv: kernel extents must be >= 1");
  ConvLayer l;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.kernel = std::move(kernel);
  l.same_pad = same_pad;
  std::vector<std::int64_t> wd{out_ch, in_ch};
  for (int k : l.kernel) wd.push_back(k);
  l.weights = RealTensor(wd);
  return l;
}

void Network::validate() const {
  if (layers.empty()) throw std::invalid_argument("network: no layers");
  if (acts.size() != layers.size()) throw std::invalid_argument("network: acts/layers size mismatch");
  for (std::size_t k = 1; k < layers.size(); ++k)
    if (layers[k].in_ch != layers[k - 1].out_ch)
      throw std::invalid_argument("network: channel counts do not chain at layer " + std::to_string(k));
  for (const auto& s : skips) {
    if (s.dst < 1 || s.dst > n_layers() || s.src < 0 || s.src >= s.dst)
      throw std::invalid_argument("network: bad skip endpoints");
    const int src_ch = s.src == 0 ? layers[0].in_ch : layers[static_cast<std::size_t>(s.src - 1)].out_ch;
    if (src_ch != layers[static_cast<std::size_t>(s.dst - 1)].out_ch)
      throw std::invalid_argument("network: skip endpoint shapes differ");
  }
}

void init_network(Network& net, std::uint64_t seed) {
  CounterRng rng{seed};
  std::uint64_t idx = 0;
  for (auto& layer : net.layers) {
    const double bound = std::sqrt(1.0 / static_cast<double>(layer.fan_in()));
    for (auto& w : layer.weights.v) w = (2.0 * rng.uniform(idx++) - 1.0) * bound;
  }
}

RealTensor conv_forward(const ConvLayer& layer, const RealTensor& x) {
  const ConvGeom g = geometry(layer, x);
  const std::int64_t k_total = layer.fan_in();
  std::vector<std::int64_t> od{layer.out_ch};
  od.insert(od.end(), g.out_dims.begin(), g.out_dims.end());
  RealTensor out(od);

  Eigen::Map<const RowMat> wmat(layer.weights.v.data(), layer.out_ch, k_total);
  const std::int64_t chunk_rows = rows_per_chunk(g, k_total);
  RowMat col(k_total, chunk_rows * g.inner_out);
  for (std::int64_t row0 = 0; row0 < g.rows_out; row0 += chunk_rows) {
    const std::int64_t row1 = std::min(g.rows_out, row0 + chunk_rows);
    const std::int64_t npix = (row1 - row0) * g.inner_out;
    if (npix != col.cols()) col.resize(k_total, npix);
    im2col_rows<false>(layer, g, x, col, row0, row1);
    StridedMap ymap(out.v.data() + row0 * g.inner_out, layer.out_ch, npix,
                    Eigen::OuterStride<>(g.out_pix));
    ymap.noalias() = wmat * col;
  }
  return out;
}

namespace {

// dW and dX for one layer; any of the outputs may be skipped by passing null.
void conv_backward(const ConvLayer& layer, const RealTensor& x, const RealTensor& dy,
                   RealTensor* dw, RealTensor* dx) {
  const ConvGeom g = geometry(layer, x);
  const std::int64_t k_total = layer.fan_in();
  Eigen::Map<const RowMat> wmat(layer.weights.v.data(), layer.out_ch, k_total);

  if (dw) *dw = RealTensor(layer.weights.dims);
  if (dx) *dx = RealTensor(x.dims);

  const std::int64_t chunk_rows = rows_per_chunk(g, k_total);
  RowMat col(k_total, chunk_rows * g.inner_out);
  RowMat dcol(k_total, chunk_rows * g.inner_out);
  for (std::int64_t row0 = 0; row0 < g.rows_out; row0 += chunk_rows) {
    const std::int64_t row1 = std::min(g.rows_out, row0 + chunk_rows);
    const std::int64_t npix = (row1 - row0) * g.inner_out;
    ConstStridedMap dymap(dy.v.data() + row0 * g.inner_out, layer.out_ch, npix,
                          Eigen::OuterStride<>(g.out_pix));
    if (dw) {
      if (npix != col.cols()) col.resize(k_total, npix);
      im2col_rows<false>(layer, g, x, col, row0, row1);
      Eigen::Map<RowMat> dwmat(dw->v.data(), layer.out_ch, k_total);
      dwmat.noalias() += dymap * col.transpose();
    }
    if (dx) {
      if (npix != dcol.cols()) dcol.resize(k_total, npix);
      dcol.noalias() = wmat.transpose() * dymap;
      im2col_rows<true>(layer, g, *dx, dcol, row0, row1);
    }
  }
}

double act_deriv(Act a, double z) {
  switch (a) {
    case Act::identity: return 1.0;
    case Act::relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::custom_nl: return 1.0 + (z > 1.0 ? 0.5 : 0.0) - (z < -1.0 ? 0.5 : 0.0);
  }
  return 1.0;
}

}  // namespace

double relu(double x) { return x > 0.0 ? x : 0.0; }
double custom_nl(double x) { return x + relu((x - 1.0) / 2.0) + relu(-(x + 1.0) / 2.0); }

RealTensor relu(const RealTensor& x) {
  RealTensor out = x;
  for (auto& v : out.v) v = relu(v);
  return out;
}

RealTensor custom_nl(const RealTensor& x) {
  RealTensor out = x;
  for (auto& v : out.v) v = custom_nl(v);
  return out;
}

RealTensor apply_act(Act a, const RealTensor& x) {
  switch (a) {
    case Act::identity: return x;
    case Act::relu: return relu(x);
    case Act::custom_nl: return custom_nl(x);
  }
  return x;
}

ForwardTrace net_forward_trace(const Network& net, const RealTensor& x) {
  net.validate();
  ForwardTrace trace;
  trace.z.reserve(net.layers.size());
  RealTensor a = x;  // a_{k-1}
  for (int k = 1; k <= net.n_layers(); ++k) {
    RealTensor z = conv_forward(net.layers[static_cast<std::size_t>(k - 1)], a);
    for (const auto& s : net.skips) {
      if (s.dst != k) continue;
      const RealTensor& src =
          s.src == 0 ? x : apply_act(net.acts[static_cast<std::size_t>(s.src - 1)],
                                     trace.z[static_cast<std::size_t>(s.src - 1)]);
      if (src.dims != z.dims) throw std::invalid_argument("network: skip shape mismatch");
      for (std::int64_t i = 0; i < z.size(); ++i) z.v[i] += src.v[i];
    }
    trace.z.push_back(std::move(z));
    if (k < net.n_layers())
      a = apply_act(net.acts[static_cast<std::size_t>(k - 1)], trace.z.back());
  }
  return trace;
}

RealTensor trace_output(const Network& net, const ForwardTrace& trace) {
  return apply_act(net.acts.back(), trace.z.back());
}

RealTensor net_forward(const Network& net, const RealTensor& x) {
  // Inference-only path: retains just the skip sources instead of the
  // whole trace.
  net.validate();
  std::vector<bool> retain(static_cast<std::size_t>(net.n_layers() + 1), false);
  for (const auto& s : net.skips) retain[static_cast<std::size_t>(s.src)] = true;
  std::vector<RealTensor> kept(static_cast<std::size_t>(net.n_layers() + 1));
  if (retain[0]) kept[0] = x;

  RealTensor a = x;
  RealTensor z;
  for (int k = 1; k <= net.n_layers(); ++k) {
    z = conv_forward(net.layers[static_cast<std::size_t>(k - 1)], a);
    for (const auto& s : net.skips) {
      if (s.dst != k) continue;
      const RealTensor& src = kept[static_cast<std::size_t>(s.src)];
      if (src.dims != z.dims) throw std::invalid_argument("network: skip shape mismatch");
      for (std::int64_t i = 0; i < z.size(); ++i) z.v[i] += src.v[i];
    }
    a = apply_act(net.acts[static_cast<std::size_t>(k - 1)], z);
    if (retain[static_cast<std::size_t>(k)]) kept[static_cast<std::size_t>(k)] = a;
  }
  return a;
}

Gradients net_backward(const Network& net, const RealTensor& x, const ForwardTrace& trace,
                       const RealTensor& loss_grad) {
  const int L = net.n_layers();
  Gradients g;
  g.dw.resize(static_cast<std::size_t>(L));

  // grad_a[k] = dL/d a_k (k = 0 is the network input)
  std::vector<RealTensor> grad_a(static_cast<std::size_t>(L + 1));
  grad_a[static_cast<std::size_t>(L)] = loss_grad;

  auto a_of = [&](int k) -> RealTensor {
    return k == 0 ? x
                  : apply_act(net.acts[static_cast<std::size_t>(k - 1)],
                              trace.z[static_cast<std::size_t>(k - 1)]);
  };

  for (int k = L; k >= 1; --k) {
    const auto& zk = trace.z[static_cast<std::size_t>(k - 1)];
    RealTensor gz = grad_a[static_cast<std::size_t>(k)];
    const Act act = net.acts[static_cast<std::size_t>(k - 1)];
    if (act != Act::identity)
      for (std::int64_t i = 0; i < gz.size(); ++i) gz.v[i] *= act_deriv(act, zk.v[i]);

    for (const auto& s : net.skips) {
      if (s.dst != k) continue;
      auto& acc = grad_a[static_cast<std::size_t>(s.src)];
      if (acc.v.empty()) acc = gz;
      else
        for (std::int64_t i = 0; i < gz.size(); ++i) acc.v[i] += gz.v[i];
    }

    const RealTensor a_prev = a_of(k - 1);
    RealTensor dx;
    conv_backward(net.layers[static_cast<std::size_t>(k - 1)], a_prev, gz,
                  &g.dw[static_cast<std::size_t>(k - 1)], &dx);
    auto& acc = grad_a[static_cast<std::size_t>(k - 1)];
    if (acc.v.empty()) acc = std::move(dx);
    else
      for (std::int64_t i = 0; i < dx.size(); ++i) acc.v[i] += dx.v[i];
  }
  g.dx = std::move(grad_a[0]);
  return g;
}

MseResult mse_loss(const RealTensor& pred, const RealTensor& target) {
  if (pred.dims != target.dims) throw std::invalid_argument("mse_loss: dims mismatch");
  MseResult r;
  r.grad = RealTensor(pred.dims);
  const double inv = 1.0 / static_cast<double>(pred.size());
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    const double d = pred.v[i] - target.v[i];
    r.loss += d * d * inv;
    r.grad.v[i] = 2.0 * d * inv;
  }
  return r;
}

AdamState make_adam(const Network& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& layer : net.layers) {
    s.m.emplace_back(layer.weights.dims);
    s.v.emplace_back(layer.weights.dims);
  }
  return s;
}

void adam_step(AdamState& state, Network& net, const std::vector<RealTensor>& grads) {
  if (grads.size() != net.layers.size())
    throw std::invalid_argument("adam_step: gradient count mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& w = net.layers[l].weights.v;
    auto& m = state.m[l].v;
    auto& v = state.v[l].v;
    const auto& gv = grads[l].v;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gv[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gv[i] * gv[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace sparkmri
