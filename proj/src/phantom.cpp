#include "sparkmri/phantom.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "sparkmri/fft.hpp"
#include "sparkmri/rng.hpp"

namespace sparkmri {

namespace {

constexpr double kDeg = M_PI / 180.0;

// Modified Shepp-Logan table: (a, b, x0, y0, phi_deg, intensity).
constexpr double kSheppLogan2d[10][6] = {
    {0.6900, 0.9200, 0.00, 0.0000, 0.0, 1.0},
    {0.6624, 0.8740, 0.00, -0.0184, 0.0, -0.8},
    {0.1100, 0.3100, 0.22, 0.0000, -18.0, -0.2},
    {0.1600, 0.4100, -0.22, 0.0000, 18.0, -0.2},
    {0.2100, 0.2500, 0.00, 0.3500, 0.0, 0.1},
    {0.0460, 0.0460, 0.00, 0.1000, 0.0, 0.1},
    {0.0460, 0.0460, 0.00, -0.1000, 0.0, 0.1},
    {0.0460, 0.0230, -0.08, -0.6050, 0.0, 0.1},
    {0.0230, 0.0230, 0.00, -0.6060, 0.0, 0.1},
    {0.0230, 0.0460, 0.06, -0.6050, 0.0, 0.1},
};

// Kak-Slaney ellipsoid extents/offsets for the 3D variant.
constexpr double kSheppLogan3dExtra[10][2] = {
    // (c semi-axis, z0)
    {0.810, 0.00}, {0.780, 0.00}, {0.220, 0.00}, {0.280, 0.00}, {0.410, -0.15},
    {0.050, 0.25}, {0.050, 0.25}, {0.050, 0.00}, {0.020, 0.00}, {0.020, 0.00},
};

double normalized_coord(std::int64_t i, std::int64_t n) {
  return n == 1 ? 0.0 : static_cast<double>(i - center_index(n)) / (static_cast<double>(n) / 2.0);
}

}  // namespace

PhantomSpec shepp_logan_2d() {
  PhantomSpec spec;
  for (const auto& e : kSheppLogan2d)
    spec.ellipses.push_back({{e[2], e[3]}, {e[0], e[1]}, e[4] * kDeg, e[5]});
  return spec;
}

PhantomSpec shepp_logan_3d() {
  PhantomSpec spec;
  for (int k = 0; k < 10; ++k) {
    const auto& e = kSheppLogan2d[k];
    spec.ellipses.push_back({{e[2], e[3], kSheppLogan3dExtra[k][1]},
                             {e[0], e[1], kSheppLogan3dExtra[k][0]},
                             e[4] * kDeg,
                             e[5]});
  }
  return spec;
}

ImageData generate_phantom(const PhantomSpec& spec, const std::vector<std::int64_t>& dims) {
  if (dims.size() != 2 && dims.size() != 3)
    throw std::invalid_argument("generate_phantom: dims must have rank 2 or 3");
  if (spec.ellipses.empty()) throw std::invalid_argument("generate_phantom: no ellipses");
  for (const auto& e : spec.ellipses)
    for (double s : e.semi_axes)
      if (s <= 0.0) throw std::invalid_argument("generate_phantom: semi-axes must be positive");

  const std::int64_t nx = dims[0], ny = dims[1], nz = dims.size() == 3 ? dims[2] : 1;
  ComplexTensor out({nx, ny, nz});
  for (std::int64_t ix = 0; ix < nx; ++ix) {
    const double x = normalized_coord(ix, nx);
    for (std::int64_t iy = 0; iy < ny; ++iy) {
      const double y = normalized_coord(iy, ny);
      for (std::int64_t iz = 0; iz < nz; ++iz) {
        const double z = normalized_coord(iz, nz);
        double val = 0.0;
        for (const auto& e : spec.ellipses) {
          const double dx = x - e.center[0];
          const double dy = y - e.center[1];
          const double dz = e.center.size() > 2 ? z - e.center[2] : z;
          const double ca = std::cos(e.angle_rad), sa = std::sin(e.angle_rad);
          const double xr = ca * dx + sa * dy;
          const double yr = -sa * dx + ca * dy;
          double q = (xr / e.semi_axes[0]) * (xr / e.semi_axes[0]) +
                     (yr / e.semi_axes[1]) * (yr / e.semi_axes[1]);
          if (e.semi_axes.size() > 2)
            q += (dz / e.semi_axes[2]) * (dz / e.semi_axes[2]);
          else if (nz > 1)
            q += z * z * 4.0;  // 2D spec on a 3D grid: confine to the central slab
          if (q <= 1.0) val += e.intensity;
        }
        out.at({ix, iy, iz}) = val;
      }
    }
  }
  return ImageData(std::move(out), false);
}

ImageData generate_sensitivities(const CoilGeometry& geom, const std::vector<std::int64_t>& dims) {
  if (geom.n_coils < 1) throw std::invalid_argument("generate_sensitivities: n_coils must be >= 1");
  if (dims.size() != 2 && dims.size() != 3)
    throw std::invalid_argument("generate_sensitivities: dims must have rank 2 or 3");
  const std::int64_t nx = dims[0], ny = dims[1], nz = dims.size() == 3 ? dims[2] : 1;
  const std::int64_t nc = geom.n_coils;
  ComplexTensor maps({nx, ny, nz, nc});
  for (std::int64_t ix = 0; ix < nx; ++ix) {
    const double x = normalized_coord(ix, nx);
    for (std::int64_t iy = 0; iy < ny; ++iy) {
      const double y = normalized_coord(iy, ny);
      for (std::int64_t iz = 0; iz < nz; ++iz) {
        const double z = normalized_coord(iz, nz);
        double sos = 0.0;
        std::vector<cplx> row(static_cast<std::size_t>(nc));
        for (std::int64_t c = 0; c < nc; ++c) {
          const double th = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(nc);
          const double cx = geom.ring_radius * std::cos(th);
          const double cy = geom.ring_radius * std::sin(th);
          const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy) + z * z;
          const double mag = std::exp(-d2 / (2.0 * geom.width * geom.width));
          // smooth linear + quadratic phase, varying per coil
          const double lin = geom.phase_slope * (x * std::cos(th) + y * std::sin(th));
          const double quad = 0.3 * geom.phase_slope *
                              ((x * x - y * y) * std::cos(2.0 * th) + 2.0 * x * y * std::sin(2.0 * th));
          row[static_cast<std::size_t>(c)] = std::polar(mag, lin + quad);
          sos += mag * mag;
        }
        const double inv = sos > 0.0 ? 1.0 / std::sqrt(sos) : 0.0;
        for (std::int64_t c = 0; c < nc; ++c)
          maps.at({ix, iy, iz, c}) = row[static_cast<std::size_t>(c)] * inv;
      }
    }
  }
  return ImageData(std::move(maps), true);
}

KspaceData synthesize_kspace(const ImageData& image, const ImageData& maps) {
  if (image.has_coil) throw std::invalid_argument("synthesize_kspace: image must be coil-free");
  if (!maps.has_coil) throw std::invalid_argument("synthesize_kspace: maps need a coil axis");
  for (int a = 0; a < 3; ++a)
    if (image.t.dims[a] != maps.t.dims[a])
      throw std::invalid_argument("synthesize_kspace: image/maps spatial dims mismatch");
  const std::int64_t nc = maps.t.dims[3];
  const std::int64_t nvox = image.t.size();
  ComplexTensor coil({image.t.dims[0], image.t.dims[1], image.t.dims[2], nc});
  for (std::int64_t p = 0; p < nvox; ++p)
    for (std::int64_t c = 0; c < nc; ++c) coil.v[p * nc + c] = image.t.v[p] * maps.t.v[p * nc + c];
  return fftc_spatial(ImageData(std::move(coil), true));
}

NoiseModel identity_noise(int n_coils, std::uint64_t seed) {
  NoiseModel m;
  m.n_coils = n_coils;
  m.seed = seed;
  m.covariance.assign(static_cast<std::size_t>(n_coils) * n_coils, cplx{0.0, 0.0});
  for (int c = 0; c < n_coils; ++c) m.covariance[static_cast<std::size_t>(c) * n_coils + c] = 1.0;
  return m;
}

NoiseModel uniform_correlation_noise(int n_coils, double off_diagonal, std::uint64_t seed) {
  NoiseModel m = identity_noise(n_coils, seed);
  for (int i = 0; i < n_coils; ++i)
    for (int j = 0; j < n_coils; ++j)
      if (i != j) m.covariance[static_cast<std::size_t>(i) * n_coils + j] = off_diagonal;
  return m;
}

KspaceData add_correlated_noise(const KspaceData& ksp, const NoiseModel& noise, double sigma) {
  const std::int64_t nc = ksp.n_coil();
  if (noise.n_coils != nc)
    throw std::invalid_argument("add_correlated_noise: covariance dimension != coil count");
  if (sigma == 0.0) return ksp;

  using Mat = Eigen::MatrixXcd;
  Mat cov(nc, nc);
  for (std::int64_t i = 0; i < nc; ++i)
    for (std::int64_t j = 0; j < nc; ++j) cov(i, j) = noise.covariance[i * nc + j];
  if ((cov - cov.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("add_correlated_noise: covariance not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.eigenvalues().minCoeff() < -1e-12)
    throw std::invalid_argument("add_correlated_noise: covariance not positive semidefinite");
  Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
  Mat factor = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  KspaceData out = ksp;
  CounterRng rng{noise.seed};
  const std::int64_t nvox = ksp.t.size() / nc;
  Eigen::VectorXcd w(nc), n(nc);
  for (std::int64_t p = 0; p < nvox; ++p) {
    for (std::int64_t c = 0; c < nc; ++c)
      w(c) = rng.cgauss(static_cast<std::uint64_t>(p * nc + c));
    n.noalias() = factor * w;
    for (std::int64_t c = 0; c < nc; ++c) out.t.v[p * nc + c] += sigma * n(c);
  }
  return out;
}

std::vector<cplx> estimate_noise_covariance(const std::vector<cplx>& samples, int n_coils,
                                            std::int64_t n_samples) {
  if (static_cast<std::int64_t>(samples.size()) != n_coils * n_samples)
    throw std::invalid_argument("estimate_noise_covariance: sample matrix size mismatch");
  std::vector<cplx> cov(static_cast<std::size_t>(n_coils) * n_coils, cplx{0.0, 0.0});
  if (n_samples == 0) return cov;
  for (int i = 0; i < n_coils; ++i)
    for (int j = 0; j < n_coils; ++j) {
      cplx s{0.0, 0.0};
      for (std::int64_t k = 0; k < n_samples; ++k)
        s += samples[static_cast<std::size_t>(i) * n_samples + k] *
             std::conj(samples[static_cast<std::size_t>(j) * n_samples + k]);
      cov[static_cast<std::size_t>(i) * n_coils + j] = s / static_cast<double>(n_samples);
    }
  return cov;
}

}  // namespace sparkmri
