#pragma once

#include <vector>

#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// One additive ellipse/ellipsoid in normalized [-1, 1]^d coordinates.
/// Rotation is in-plane (about the partition axis for 3D).
struct Ellipse {
  std::vector<double> center;     // size 2 or 3
  std::vector<double> semi_axes;  // same size
  double angle_rad = 0.0;
  double intensity = 0.0;
};

struct PhantomSpec {
  std::vector<Ellipse> ellipses;
};

struct CoilGeometry {
  int n_coils = 8;
  double ring_radius = 1.1;
  double width = 0.85;       // Gaussian falloff of the lobe magnitude
  double phase_slope = 1.5;  // linear phase coefficient per coil
};

struct NoiseModel {
  std::vector<cplx> covariance;  // C x C row-major, Hermitian PSD
  int n_coils = 0;
  std::uint64_t seed = 0;
};

/// Classic 10-ellipse head phantom (2D) and its ellipsoid extension (3D).
PhantomSpec shepp_logan_2d();
PhantomSpec shepp_logan_3d();

/// Sum of ellipse indicators weighted by intensity; real-valued output.
ImageData generate_phantom(const PhantomSpec& spec, const std::vector<std::int64_t>& dims);

/// Complex Gaussian-lobe profiles on a ring, normalized so sos = 1 at every
/// voxel (the raw sos is strictly positive by construction).
ImageData generate_sensitivities(const CoilGeometry& geom, const std::vector<std::int64_t>& dims);

/// Per coil: fftc(image * S_c) over all spatial axes.
KspaceData synthesize_kspace(const ImageData& image, const ImageData& maps);

NoiseModel identity_noise(int n_coils, std::uint64_t seed);
NoiseModel uniform_correlation_noise(int n_coils, double off_diagonal, std::uint64_t seed);

/// output = input + sigma * L * w with L the eigen-factor of the covariance
/// and w i.i.d. unit complex Gaussians; deterministic given the seed.
KspaceData add_correlated_noise(const KspaceData& ksp, const NoiseModel& noise, double sigma);

/// (1/K) * N * N^H from a C x K sample matrix (row-major).
std::vector<cplx> estimate_noise_covariance(const std::vector<cplx>& samples, int n_coils,
                                            std::int64_t n_samples);

}  // namespace sparkmri
