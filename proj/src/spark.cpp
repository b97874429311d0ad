#include "sparkmri/spark.hpp"

#include <cmath>

#include "sparkmri/coil.hpp"
#include "sparkmri/fft.hpp"
#include "sparkmri/metrics.hpp"
#include "sparkmri/rng.hpp"

namespace sparkmri {

namespace {

struct CropBox {
  std::int64_t ro_lo, ro_hi, pe_lo, pe_hi, pa_lo, pa_hi;  // inclusive
  std::int64_t n_ro() const { return ro_hi - ro_lo + 1; }
  std::int64_t n_pe() const { return pe_hi - pe_lo + 1; }
  std::int64_t n_pa() const { return pa_hi - pa_lo + 1; }
};

// The ACS loss only sees network output inside A; with same-padded
// convolutions that output depends on input within the stacked receptive
// field, so training on this crop is exactly equivalent to the full grid.
CropBox training_crop(const AcsProjector& acs, const Network& net, const KspaceData& y) {
  std::int64_t margin_ro = 0, margin_pe = 0, margin_pa = 0;
  for (const auto& l : net.layers) {
    margin_ro += (l.kernel[0] - 1) / 2;
    margin_pe += (l.kernel.size() > 1 ? l.kernel[1] - 1 : 0) / 2;
    margin_pa += (l.kernel.size() > 2 ? l.kernel[2] - 1 : 0) / 2;
  }
  CropBox box;
  box.ro_lo = std::max<std::int64_t>(0, acs.ro_lo - margin_ro);
  box.ro_hi = std::min(y.n_ro() - 1, acs.ro_hi + margin_ro);
  box.pe_lo = std::max<std::int64_t>(0, acs.pe_lo - margin_pe);
  box.pe_hi = std::min(y.n_pe() - 1, acs.pe_hi + margin_pe);
  box.pa_lo = std::max<std::int64_t>(0, acs.pa_lo - margin_pa);
  box.pa_hi = std::min(y.n_pa() - 1, acs.pa_hi + margin_pa);
  return box;
}

KspaceData crop_kspace(const KspaceData& y, const CropBox& box) {
  ComplexTensor t({box.n_ro(), box.n_pe(), box.n_pa(), y.n_coil()});
  for (std::int64_t r = 0; r < box.n_ro(); ++r)
    for (std::int64_t p = 0; p < box.n_pe(); ++p)
      for (std::int64_t q = 0; q < box.n_pa(); ++q)
        for (std::int64_t c = 0; c < y.n_coil(); ++c)
          t.at({r, p, q, c}) = y.t.at({box.ro_lo + r, box.pe_lo + p, box.pa_lo + q, c});
  return KspaceData(std::move(t), y.readout_os);
}

}  // namespace

AcsProjector AcsProjector::from_mask(const SamplingMask& mask, std::int64_t n_ro) {
  if (!mask.acs) throw std::invalid_argument("AcsProjector: mask has no ACS region");
  return {0, n_ro - 1, mask.acs->pe_lo, mask.acs->pe_hi, mask.acs->pa_lo, mask.acs->pa_hi};
}

RealTensor pack_input(const KspaceData& y, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("pack_input: scale must be positive");
  const std::int64_t nc = y.n_coil();
  const bool flat = y.n_pa() == 1;
  RealTensor out(flat ? std::vector<std::int64_t>{2 * nc, y.n_ro(), y.n_pe()}
                      : std::vector<std::int64_t>{2 * nc, y.n_ro(), y.n_pe(), y.n_pa()});
  const std::int64_t nvox = y.t.size() / nc;
  const double inv = 1.0 / scale;
  for (std::int64_t p = 0; p < nvox; ++p)
    for (std::int64_t c = 0; c < nc; ++c) {
      const cplx z = y.t.v[p * nc + c];
      out.v[(2 * c) * nvox + p] = z.real() * inv;
      out.v[(2 * c + 1) * nvox + p] = z.imag() * inv;
    }
  return out;
}

Network build_spark_network(SparkArch arch, int in_ch, int hidden) {
  if (in_ch < 1 || hidden < 1) throw std::invalid_argument("spark network: bad channel counts");
  Network net;
  const std::vector<int> k =
      arch == SparkArch::net2d ? std::vector<int>{3, 3} : std::vector<int>{3, 3, 3};
  const Act act = arch == SparkArch::net2d ? Act::relu : Act::custom_nl;
  auto add = [&](int ci, int co) {
    net.layers.push_back(make_conv(ci, co, k));
    net.acts.push_back(act);
  };
  if (arch == SparkArch::net2d) {
    add(in_ch, hidden);
    add(hidden, hidden);
    add(hidden, in_ch);  // skip target: shapes must match the input
    add(in_ch, hidden);
    add(hidden, hidden);
    add(hidden, 2);
    net.skips = {{0, 3}};
  } else {
    add(in_ch, hidden);
    add(hidden, hidden);
    add(hidden, in_ch);
    add(in_ch, hidden);
    add(hidden, hidden);
    add(hidden, in_ch);
    add(in_ch, hidden);
    add(hidden, hidden);
    add(hidden, 2);
    net.skips = {{0, 3}, {3, 6}};
  }
  net.acts.back() = Act::identity;  // residual estimate is sign-unconstrained
  net.validate();
  return net;
}

CoilTrainResult train_coil_model(const KspaceData& y_acq, const KspaceData& y_est,
                                 const AcsProjector& acs, int coil, const SparkConfig& cfg,
                                 double scale) {
  if (y_acq.t.dims != y_est.t.dims)
    throw std::invalid_argument("train_coil_model: y_acq/y_est dims mismatch");
  if (acs.empty() || acs.count() == 0)
    throw std::invalid_argument("train_coil_model: ACS bounds are empty");
  if (acs.ro_hi >= y_est.n_ro() || acs.pe_hi >= y_est.n_pe() || acs.pa_hi >= y_est.n_pa())
    throw std::invalid_argument("train_coil_model: ACS bounds exceed the grid");
  if (cfg.epochs < 1 || cfg.lr <= 0.0) throw std::invalid_argument("train_coil_model: bad config");
  const std::int64_t nc = y_est.n_coil();
  if (coil < 0 || coil >= nc) throw std::invalid_argument("train_coil_model: bad coil index");
  if (cfg.arch == SparkArch::net2d && y_est.n_pa() != 1)
    throw std::invalid_argument("train_coil_model: net2d requires partition extent 1");

  CoilTrainResult result;
  result.model.coil = coil;
  result.model.scale = scale;
  result.model.net =
      build_spark_network(cfg.arch, static_cast<int>(2 * nc), cfg.hidden_channels);
  init_network(result.model.net, CounterRng{cfg.seed}.substream(static_cast<std::uint64_t>(coil)).seed);

  const CropBox box = training_crop(acs, result.model.net, y_est);
  const RealTensor x = pack_input(crop_kspace(y_est, box), scale);

  // Scaled ACS residual for this coil, with the loss confined to A.
  const std::int64_t nvox = box.n_ro() * box.n_pe() * box.n_pa();
  RealTensor target(x.dims);
  target.dims[0] = 2;
  target.v.assign(static_cast<std::size_t>(2 * nvox), 0.0);
  std::vector<std::uint8_t> in_acs(static_cast<std::size_t>(nvox), 0);
  const double inv = 1.0 / scale;
  for (std::int64_t r = 0; r < box.n_ro(); ++r)
    for (std::int64_t p = 0; p < box.n_pe(); ++p)
      for (std::int64_t q = 0; q < box.n_pa(); ++q) {
        const std::int64_t gr = box.ro_lo + r, gp = box.pe_lo + p, gq = box.pa_lo + q;
        if (!acs.contains(gr, gp, gq)) continue;
        const std::int64_t pix = (r * box.n_pe() + p) * box.n_pa() + q;
        const cplx res =
            (y_acq.t.at({gr, gp, gq, coil}) - y_est.t.at({gr, gp, gq, coil})) * inv;
        if (!std::isfinite(res.real()) || !std::isfinite(res.imag()))
          throw std::invalid_argument("train_coil_model: non-finite residual");
        target.v[static_cast<std::size_t>(pix)] = res.real();
        target.v[static_cast<std::size_t>(nvox + pix)] = res.imag();
        in_acs[static_cast<std::size_t>(pix)] = 1;
      }
  const double n_loss = 2.0 * static_cast<double>(acs.count());

  AdamState adam = make_adam(result.model.net, cfg.lr);
  RealTensor grad(target.dims);
  auto masked_loss = [&](const RealTensor& out, RealTensor* g) {
    double loss = 0.0;
    if (g) g->v.assign(g->v.size(), 0.0);
    for (std::int64_t pix = 0; pix < nvox; ++pix) {
      if (!in_acs[static_cast<std::size_t>(pix)]) continue;
      for (int ch = 0; ch < 2; ++ch) {
        const std::int64_t i = ch * nvox + pix;
        const double d = out.v[i] - target.v[i];
        loss += d * d / n_loss;
        if (g) g->v[i] = 2.0 * d / n_loss;
      }
    }
    return loss;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ForwardTrace trace = net_forward_trace(result.model.net, x);
    const RealTensor out = trace_output(result.model.net, trace);
    result.loss_history.push_back(masked_loss(out, &grad));
    const Gradients g = net_backward(result.model.net, x, trace, grad);
    adam_step(adam, result.model.net, g.dw);
  }
  result.loss_history.push_back(masked_loss(net_forward(result.model.net, x), nullptr));
  return result;
}

ComplexTensor apply_correction(const CorrectionModel& model, const KspaceData& y_est) {
  const RealTensor out = net_forward(model.net, pack_input(y_est, model.scale));
  const std::int64_t nvox = y_est.t.size() / y_est.n_coil();
  ComplexTensor corrected({y_est.n_ro(), y_est.n_pe(), y_est.n_pa()});
  const std::int64_t nc = y_est.n_coil();
  for (std::int64_t pix = 0; pix < nvox; ++pix)
    corrected.v[pix] = y_est.t.v[pix * nc + model.coil] +
                       model.scale * cplx{out.v[pix], out.v[nvox + pix]};
  return corrected;
}

SparkCorrectResult spark_correct(const KspaceData& y_acq, const KspaceData& y_est,
                                 const AcsProjector& acs, const SparkConfig& cfg) {
  SparkCorrectResult result;
  result.scale = max_abs(y_est.t);
  if (result.scale == 0.0) result.scale = 1.0;
  result.corrected = y_est;

  const std::int64_t nc = y_est.n_coil();
  for (std::int64_t c = 0; c < nc; ++c) {
    CoilTrainResult fit =
        train_coil_model(y_acq, y_est, acs, static_cast<int>(c), cfg, result.scale);
    const ComplexTensor coil = apply_correction(fit.model, y_est);
    for (std::int64_t pix = 0; pix < coil.size(); ++pix)
      result.corrected.t.v[pix * nc + c] = coil.v[pix];
    result.loss_histories.push_back(std::move(fit.loss_history));
  }

  if (cfg.final_acs_replace) {
    for (std::int64_t r = acs.ro_lo; r <= acs.ro_hi; ++r)
      for (std::int64_t p = acs.pe_lo; p <= acs.pe_hi; ++p)
        for (std::int64_t q = acs.pa_lo; q <= acs.pa_hi; ++q)
          for (std::int64_t c = 0; c < nc; ++c)
            result.corrected.t.at({r, p, q, c}) = y_acq.t.at({r, p, q, c});
  }
  return result;
}

namespace {

RealTensor sos_image(const KspaceData& ksp) { return sos_combine(ifftc_spatial(ksp)); }

void fill_rmse(PipelineResult& res, const RealTensor* reference) {
  if (!reference) return;
  res.base_rmse = rmse_percent(res.base_image, *reference);
  res.spark_rmse = rmse_percent(res.spark_image, *reference);
}

PipelineResult run_grappa_family(const KspaceData& full, const SamplingMask& mask,
                                 const PipelineParams& params, const RealTensor* reference) {
  if (!mask.acs) throw std::invalid_argument("spark_pipeline: mask needs an ACS region");
  const KspaceData y_acq = apply_mask(full, mask);
  const SamplingMask lattice = strip_acs(mask);
  const KspaceData y_lat = apply_mask(full, lattice);
  const CropBox acs_box{0, full.n_ro() - 1, mask.acs->pe_lo, mask.acs->pe_hi,
                        mask.acs->pa_lo, mask.acs->pa_hi};
  const KspaceData acs_data = crop_kspace(y_acq, acs_box);

  PipelineResult res;
  if (params.method == ReconMethod::vc_grappa) {
    res.y_est = vc_grappa(y_lat, lattice, acs_data, mask.r_pe, mask.r_pa, params.taps,
                          params.lambda);
  } else {
    const GrappaKernel kernel =
        calibrate(acs_data, mask.r_pe, mask.r_pa, params.taps, params.lambda);
    res.y_est = interpolate(y_lat, lattice, kernel);
  }
  res.base_image = sos_image(acs_replace(res.y_est, y_acq, *mask.acs));

  const AcsProjector acs = AcsProjector::from_mask(mask, full.n_ro());
  SparkCorrectResult corr = spark_correct(y_acq, res.y_est, acs, params.spark);
  res.y_corrected = std::move(corr.corrected);
  res.loss_histories = std::move(corr.loss_histories);
  res.spark_image = sos_image(res.y_corrected);
  fill_rmse(res, reference);
  return res;
}

PipelineResult run_sense_family(const KspaceData& full, const ImageData& maps,
                                const SamplingMask& mask, const PipelineParams& params,
                                const RealTensor* reference) {
  if (!mask.acs) throw std::invalid_argument("spark_pipeline: mask needs an ACS region");
  const bool wave = params.method != ReconMethod::sense;
  const bool group = params.method == ReconMethod::wave_slice_group;

  std::optional<WavePsf> psf;
  if (wave)
    psf = make_wave_psf(maps.t.dims[0], maps.t.dims[1], maps.t.dims[2], params.wave_cycles,
                        params.wave_amplitude_rad, params.readout_os);
  else if (full.readout_os != 1)
    throw std::invalid_argument("spark_pipeline: cartesian SENSE expects unoversampled data");

  EncodingModel model = group ? slice_group_model(maps, *psf, mask, params.caipi_shift)
                              : make_encoding_model(maps, mask, psf);
  if (full.t.dims != std::vector<std::int64_t>(model.kspace_dims().begin(),
                                               model.kspace_dims().end()))
    throw std::invalid_argument("spark_pipeline: data does not match the encoding model");

  const KspaceData y_acq = apply_mask(full, mask);

  PipelineResult res;
  const ImageData x_base = cg_solve(model, y_acq, params.cg_max_iter, params.cg_tol).x;
  res.base_image = magnitude(x_base);

  // SPARK input: the reconstruction excluding the ACS data.
  EncodingModel model_lat = model;
  model_lat.mask = strip_acs(mask);
  const KspaceData y_lat = apply_mask(full, model_lat.mask);
  const ImageData x_in = cg_solve(model_lat, y_lat, params.cg_max_iter, params.cg_tol).x;
  res.y_est = recon_to_kspace(x_in, model);

  const AcsProjector acs = AcsProjector::from_mask(mask, full.n_ro());
  SparkCorrectResult corr = spark_correct(y_acq, res.y_est, acs, params.spark);
  res.y_corrected = std::move(corr.corrected);
  res.loss_histories = std::move(corr.loss_histories);

  // Final least-squares reconstruction of the corrected k-space, no
  // undersampling.
  const EncodingModel model_full = model.with_full_mask();
  const ImageData x_spark =
      cg_solve(model_full, res.y_corrected, params.cg_max_iter, params.cg_tol).x;
  res.spark_image = magnitude(x_spark);
  fill_rmse(res, reference);
  return res;
}

PipelineResult run_hybrid_3d(const KspaceData& full, const SamplingMask& mask,
                             const PipelineParams& params, const RealTensor* reference) {
  if (!mask.acs) throw std::invalid_argument("spark_pipeline: hybrid mask needs an ACS region");
  const AcsRegion& block = *mask.acs;
  const KspaceData y_acq = apply_mask(full, mask);

  // External low-res reference calibrations for both lattice rates.
  const KspaceData reference_scan = KspaceData(
      crop_center(full.t, {full.n_ro(), params.ref_pe, params.ref_pa, full.n_coil()}),
      full.readout_os);
  const GrappaKernel kernel_acs =
      calibrate(reference_scan, block.r_pe, block.r_pa, params.taps, params.lambda);
  const GrappaKernel kernel_ext =
      calibrate(reference_scan, mask.r_pe, mask.r_pa, params.taps, params.lambda);

  // GRAPPA-complete the undersampled ACS block on its own lattice.
  SamplingMask acs_lattice;
  acs_lattice.n_pe = mask.n_pe;
  acs_lattice.n_pa = mask.n_pa;
  acs_lattice.r_pe = block.r_pe;
  acs_lattice.r_pa = block.r_pa;
  acs_lattice.grid.assign(static_cast<std::size_t>(mask.n_pe * mask.n_pa), 0);
  for (std::int64_t p = block.pe_lo; p <= block.pe_hi; ++p)
    for (std::int64_t q = block.pa_lo; q <= block.pa_hi; ++q)
      if (p % block.r_pe == 0 && q % block.r_pa == 0) acs_lattice.set(p, q, true);
  const KspaceData acs_completed =
      interpolate(apply_mask(y_acq, acs_lattice), acs_lattice, kernel_acs);

  // Input reconstruction: exterior-rate GRAPPA over the whole grid, seeded
  // with acquired exterior samples plus the completed ACS on that lattice.
  SamplingMask lattice_ext;
  lattice_ext.n_pe = mask.n_pe;
  lattice_ext.n_pa = mask.n_pa;
  lattice_ext.r_pe = mask.r_pe;
  lattice_ext.r_pa = mask.r_pa;
  lattice_ext.grid.assign(static_cast<std::size_t>(mask.n_pe * mask.n_pa), 0);
  KspaceData y_lattice = y_acq;
  for (auto& z : y_lattice.t.v) z = cplx{0.0, 0.0};
  for (std::int64_t p = 0; p < mask.n_pe; ++p)
    for (std::int64_t q = 0; q < mask.n_pa; ++q) {
      if (p % mask.r_pe != 0 || q % mask.r_pa != 0) continue;
      const bool in_block = block.contains(p, q);
      if (in_block || mask.sampled(p, q)) {
        lattice_ext.set(p, q, true);
        const KspaceData& src = in_block ? acs_completed : y_acq;
        for (std::int64_t r = 0; r < full.n_ro(); ++r)
          for (std::int64_t c = 0; c < full.n_coil(); ++c)
            y_lattice.t.at({r, p, q, c}) = src.t.at({r, p, q, c});
      }
    }

  PipelineResult res;
  res.y_est = interpolate(y_lattice, lattice_ext, kernel_ext);

  // Acceleration-matched baseline: uniform exterior-rate GRAPPA with no ACS,
  // kernels from the same external reference.
  SamplingMask uniform = uniform_2d(mask.n_pe, mask.n_pa, mask.r_pe, mask.r_pa, 0, 0);
  res.base_image = sos_image(interpolate(apply_mask(full, uniform), uniform, kernel_ext));

  // SPARK target: the GRAPPA-completed ACS block stands in for acquired data.
  const KspaceData y_target = acs_replace(y_acq, acs_completed, block);
  const AcsProjector acs = AcsProjector::from_mask(mask, full.n_ro());
  SparkCorrectResult corr = spark_correct(y_target, res.y_est, acs, params.spark);
  res.y_corrected = std::move(corr.corrected);
  res.loss_histories = std::move(corr.loss_histories);
  res.spark_image = sos_image(res.y_corrected);
  fill_rmse(res, reference);
  return res;
}

}  // namespace

PipelineResult spark_pipeline(const KspaceData& full_ksp, const ImageData& maps,
                              const SamplingMask& mask, const PipelineParams& params,
                              const RealTensor* reference) {
  switch (params.method) {
    case ReconMethod::grappa:
    case ReconMethod::vc_grappa:
      return run_grappa_family(full_ksp, mask, params, reference);
    case ReconMethod::sense:
    case ReconMethod::wave:
    case ReconMethod::wave_slice_group:
      return run_sense_family(full_ksp, maps, mask, params, reference);
    case ReconMethod::grappa3d_hybrid:
      return run_hybrid_3d(full_ksp, mask, params, reference);
  }
  throw std::invalid_argument("spark_pipeline: unknown method");
}

}  // namespace sparkmri
