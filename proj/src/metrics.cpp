#include "sparkmri/metrics.hpp"

#include <cmath>

#include "sparkmri/coil.hpp"
#include "sparkmri/fft.hpp"
#include "sparkmri/rng.hpp"

namespace sparkmri {

double rmse_percent(const RealTensor& recon, const RealTensor& reference) {
  if (recon.dims != reference.dims) throw std::invalid_argument("rmse_percent: dims mismatch");
  double err = 0.0, ref = 0.0;
  for (std::int64_t i = 0; i < recon.size(); ++i) {
    const double d = recon.v[i] - reference.v[i];
    err += d * d;
    ref += reference.v[i] * reference.v[i];
  }
  if (ref == 0.0) throw std::invalid_argument("rmse_percent: reference norm is zero");
  return 100.0 * std::sqrt(err / ref);
}

EvalReport pseudo_replica(const ReconFn& recon_fn, const KspaceData& ksp_full,
                          const SamplingMask& mask, const NoiseModel& noise, double sigma,
                          int n_replicas, const ImageData& maps, const RealTensor& reference) {
  if (n_replicas < 2) throw std::invalid_argument("pseudo_replica: need n_replicas >= 2");

  EvalReport report;
  const ImageData original =
      complex_combine(ifftc_spatial(recon_fn(apply_mask(ksp_full, mask))), maps);
  const std::int64_t nvox = original.t.size();

  std::vector<double> sum(static_cast<std::size_t>(nvox), 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(nvox), 0.0);
  for (int rep = 0; rep < n_replicas; ++rep) {
    NoiseModel rep_noise = noise;
    rep_noise.seed = CounterRng{noise.seed}.substream(static_cast<std::uint64_t>(rep + 1)).seed;
    const KspaceData replica =
        apply_mask(add_correlated_noise(ksp_full, rep_noise, sigma), mask);
    const ImageData combined = complex_combine(ifftc_spatial(recon_fn(replica)), maps);
    for (std::int64_t i = 0; i < nvox; ++i) {
      const double re = combined.t.v[i].real();
      sum[static_cast<std::size_t>(i)] += re;
      sumsq[static_cast<std::size_t>(i)] += re * re;
    }
    report.replica_rmse.push_back(rmse_percent(magnitude(combined), reference));
  }

  report.proxy = RealTensor({original.t.dims[0], original.t.dims[1], original.t.dims[2]});
  const double n = static_cast<double>(n_replicas);
  for (std::int64_t i = 0; i < nvox; ++i) {
    const double mean = sum[static_cast<std::size_t>(i)] / n;
    const double var =
        std::max(0.0, (sumsq[static_cast<std::size_t>(i)] - n * mean * mean) / (n - 1.0));
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      report.proxy.v[i] = original.t.v[i].real() / sd;
    } else {
      report.proxy.v[i] = 0.0;
      report.flagged_zero_std += 1;
    }
  }

  double m = 0.0;
  for (double r : report.replica_rmse) m += r;
  m /= n;
  double s = 0.0;
  for (double r : report.replica_rmse) s += (r - m) * (r - m);
  report.rmse_mean = m;
  report.rmse_std = std::sqrt(s / (n - 1.0));
  return report;
}

double support_mean(const RealTensor& map, const RealTensor& support) {
  if (map.dims != support.dims) throw std::invalid_argument("support_mean: dims mismatch");
  double acc = 0.0;
  std::int64_t count = 0;
  for (std::int64_t i = 0; i < map.size(); ++i)
    if (support.v[i] > 0.0) {
      acc += map.v[i];
      ++count;
    }
  if (count == 0) throw std::invalid_argument("support_mean: empty support");
  return acc / static_cast<double>(count);
}

}  // namespace sparkmri
