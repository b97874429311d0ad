#pragma once

#include <string>

#include "sparkmri/phantom.hpp"
#include "sparkmri/raki.hpp"
#include "sparkmri/sampling.hpp"
#include "sparkmri/spark.hpp"

namespace sparkmri {

/// Structured run configuration. Every field has a default; unknown JSON
/// keys are rejected with the offending path in the message.
struct RunConfig {
  std::uint64_t seed = 0;

  struct Phantom {
    std::vector<std::int64_t> dims = {128, 128};
    std::string kind = "shepp-logan";  // 2D/3D picked from dims
  } phantom;

  CoilGeometry coils{};

  struct Noise {
    double sigma_rel = 0.0;  // relative to the rms of the full k-space
    double corr = 0.0;       // uniform off-diagonal coil correlation
    std::uint64_t seed = 1;
  } noise;

  struct Mask {
    std::string kind = "uniform1d";  // uniform1d | uniform2d | caipi | hybrid
    int r_pe = 4, r_pa = 1;
    std::int64_t acs_pe = 24, acs_pa = 1;
    int shift = 1;              // caipi
    int r_acs_pe = 3, r_acs_pa = 2;  // hybrid ACS lattice
    bool elliptical = false;
  } mask;

  std::string method = "grappa";  // grappa | vc-grappa | sense | wave |
                                  // wave-slice-group | grappa3d

  struct Grappa {
    int taps_read = 5, taps_pe = 4, taps_pa = 1;
    double lambda = 0.01;
  } grappa;

  struct Sense {
    int max_iter = 50;
    double tol = 1e-6;
  } sense;

  struct Wave {
    double cycles = 15.0;
    double amplitude_rad = 8.0;
    int oversample = 3;
    int caipi_shift = 1;
  } wave;

  struct Spark {
    std::string arch = "net2d";
    int epochs = 200;
    double lr = 2e-3;
    int hidden = 64;
    std::uint64_t seed = 0;
    bool final_acs_replace = true;
  } spark;

  struct Raki {
    int epochs = 500;
    double lr = 2e-3;
    std::uint64_t seed = 0;
  } raki;

  struct Hybrid {
    std::int64_t ref_pe = 24, ref_pa = 24;
  } hybrid;

  struct Metrics {
    int replicas = 20;
  } metrics;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

/// Derived objects.
PhantomSpec phantom_spec(const RunConfig& cfg);
SamplingMask build_mask(const RunConfig& cfg, std::int64_t n_pe, std::int64_t n_pa);
PipelineParams pipeline_params(const RunConfig& cfg);
ReconMethod parse_method(const std::string& name);

}  // namespace sparkmri
