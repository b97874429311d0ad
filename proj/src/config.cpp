#include "sparkmri/config.hpp"

#include <json.hpp>

#include <fstream>

namespace sparkmri {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::runtime_error("config: " + path + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::runtime_error("config: unknown key '" + path + key + "'");
  }
}

template <typename T>
void get(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j = json::parse(json_text);
  RunConfig cfg;
  check_keys(j, "", {"seed", "phantom", "coils", "noise", "mask", "method", "grappa", "sense",
                     "wave", "spark", "raki", "hybrid", "metrics"});
  get(j, "seed", cfg.seed);
  get(j, "method", cfg.method);

  if (j.contains("phantom")) {
    const auto& p = j["phantom"];
    check_keys(p, "phantom.", {"dims", "kind"});
    get(p, "dims", cfg.phantom.dims);
    get(p, "kind", cfg.phantom.kind);
    if (cfg.phantom.dims.size() != 2 && cfg.phantom.dims.size() != 3)
      throw std::runtime_error("config: phantom.dims must have 2 or 3 entries");
  }
  if (j.contains("coils")) {
    const auto& p = j["coils"];
    check_keys(p, "coils.", {"count", "ring_radius", "width", "phase_slope"});
    get(p, "count", cfg.coils.n_coils);
    get(p, "ring_radius", cfg.coils.ring_radius);
    get(p, "width", cfg.coils.width);
    get(p, "phase_slope", cfg.coils.phase_slope);
  }
  if (j.contains("noise")) {
    const auto& p = j["noise"];
    check_keys(p, "noise.", {"sigma_rel", "corr", "seed"});
    get(p, "sigma_rel", cfg.noise.sigma_rel);
    get(p, "corr", cfg.noise.corr);
    get(p, "seed", cfg.noise.seed);
  }
  if (j.contains("mask")) {
    const auto& p = j["mask"];
    check_keys(p, "mask.",
               {"kind", "r_pe", "r_pa", "acs_pe", "acs_pa", "shift", "r_acs_pe", "r_acs_pa",
                "elliptical"});
    get(p, "kind", cfg.mask.kind);
    get(p, "r_pe", cfg.mask.r_pe);
    get(p, "r_pa", cfg.mask.r_pa);
    get(p, "acs_pe", cfg.mask.acs_pe);
    get(p, "acs_pa", cfg.mask.acs_pa);
    get(p, "shift", cfg.mask.shift);
    get(p, "r_acs_pe", cfg.mask.r_acs_pe);
    get(p, "r_acs_pa", cfg.mask.r_acs_pa);
    get(p, "elliptical", cfg.mask.elliptical);
  }
  if (j.contains("grappa")) {
    const auto& p = j["grappa"];
    check_keys(p, "grappa.", {"taps_read", "taps_pe", "taps_pa", "lambda"});
    get(p, "taps_read", cfg.grappa.taps_read);
    get(p, "taps_pe", cfg.grappa.taps_pe);
    get(p, "taps_pa", cfg.grappa.taps_pa);
    get(p, "lambda", cfg.grappa.lambda);
  }
  if (j.contains("sense")) {
    const auto& p = j["sense"];
    check_keys(p, "sense.", {"max_iter", "tol"});
    get(p, "max_iter", cfg.sense.max_iter);
    get(p, "tol", cfg.sense.tol);
  }
  if (j.contains("wave")) {
    const auto& p = j["wave"];
    check_keys(p, "wave.", {"cycles", "amplitude_rad", "oversample", "caipi_shift"});
    get(p, "cycles", cfg.wave.cycles);
    get(p, "amplitude_rad", cfg.wave.amplitude_rad);
    get(p, "oversample", cfg.wave.oversample);
    get(p, "caipi_shift", cfg.wave.caipi_shift);
  }
  if (j.contains("spark")) {
    const auto& p = j["spark"];
    check_keys(p, "spark.", {"arch", "epochs", "lr", "hidden", "seed", "final_acs_replace"});
    get(p, "arch", cfg.spark.arch);
    get(p, "epochs", cfg.spark.epochs);
    get(p, "lr", cfg.spark.lr);
    get(p, "hidden", cfg.spark.hidden);
    get(p, "seed", cfg.spark.seed);
    get(p, "final_acs_replace", cfg.spark.final_acs_replace);
    if (cfg.spark.arch != "net2d" && cfg.spark.arch != "net3d")
      throw std::runtime_error("config: spark.arch must be net2d or net3d");
  }
  if (j.contains("raki")) {
    const auto& p = j["raki"];
    check_keys(p, "raki.", {"epochs", "lr", "seed"});
    get(p, "epochs", cfg.raki.epochs);
    get(p, "lr", cfg.raki.lr);
    get(p, "seed", cfg.raki.seed);
  }
  if (j.contains("hybrid")) {
    const auto& p = j["hybrid"];
    check_keys(p, "hybrid.", {"ref_pe", "ref_pa"});
    get(p, "ref_pe", cfg.hybrid.ref_pe);
    get(p, "ref_pa", cfg.hybrid.ref_pa);
  }
  if (j.contains("metrics")) {
    const auto& p = j["metrics"];
    check_keys(p, "metrics.", {"replicas"});
    get(p, "replicas", cfg.metrics.replicas);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["method"] = c.method;
  j["phantom"] = {{"dims", c.phantom.dims}, {"kind", c.phantom.kind}};
  j["coils"] = {{"count", c.coils.n_coils},
                {"ring_radius", c.coils.ring_radius},
                {"width", c.coils.width},
                {"phase_slope", c.coils.phase_slope}};
  j["noise"] = {{"sigma_rel", c.noise.sigma_rel}, {"corr", c.noise.corr}, {"seed", c.noise.seed}};
  j["mask"] = {{"kind", c.mask.kind},         {"r_pe", c.mask.r_pe},
               {"r_pa", c.mask.r_pa},         {"acs_pe", c.mask.acs_pe},
               {"acs_pa", c.mask.acs_pa},     {"shift", c.mask.shift},
               {"r_acs_pe", c.mask.r_acs_pe}, {"r_acs_pa", c.mask.r_acs_pa},
               {"elliptical", c.mask.elliptical}};
  j["grappa"] = {{"taps_read", c.grappa.taps_read},
                 {"taps_pe", c.grappa.taps_pe},
                 {"taps_pa", c.grappa.taps_pa},
                 {"lambda", c.grappa.lambda}};
  j["sense"] = {{"max_iter", c.sense.max_iter}, {"tol", c.sense.tol}};
  j["wave"] = {{"cycles", c.wave.cycles},
               {"amplitude_rad", c.wave.amplitude_rad},
               {"oversample", c.wave.oversample},
               {"caipi_shift", c.wave.caipi_shift}};
  j["spark"] = {{"arch", c.spark.arch},   {"epochs", c.spark.epochs},
                {"lr", c.spark.lr},       {"hidden", c.spark.hidden},
                {"seed", c.spark.seed},   {"final_acs_replace", c.spark.final_acs_replace}};
  j["raki"] = {{"epochs", c.raki.epochs}, {"lr", c.raki.lr}, {"seed", c.raki.seed}};
  j["hybrid"] = {{"ref_pe", c.hybrid.ref_pe}, {"ref_pa", c.hybrid.ref_pa}};
  j["metrics"] = {{"replicas", c.metrics.replicas}};
  return j.dump(2);
}

PhantomSpec phantom_spec(const RunConfig& cfg) {
  if (cfg.phantom.kind != "shepp-logan")
    throw std::runtime_error("config: unknown phantom kind '" + cfg.phantom.kind + "'");
  return cfg.phantom.dims.size() == 2 ? shepp_logan_2d() : shepp_logan_3d();
}

SamplingMask build_mask(const RunConfig& cfg, std::int64_t n_pe, std::int64_t n_pa) {
  const auto& m = cfg.mask;
  if (m.kind == "uniform1d") return uniform_1d(n_pe, m.r_pe, m.acs_pe);
  if (m.kind == "uniform2d") {
    SamplingMask mask = uniform_2d(n_pe, n_pa, m.r_pe, m.r_pa, m.acs_pe, m.acs_pa);
    return m.elliptical ? elliptical_filter(mask) : mask;
  }
  if (m.kind == "caipi") return caipi_2d(n_pe, n_pa, m.r_pe, m.r_pa, m.shift);
  if (m.kind == "hybrid")
    return hybrid_mask(n_pe, n_pa, m.acs_pe, m.acs_pa, {m.r_acs_pe, m.r_acs_pa},
                       {m.r_pe, m.r_pa}, m.elliptical);
  throw std::runtime_error("config: unknown mask kind '" + m.kind + "'");
}

ReconMethod parse_method(const std::string& name) {
  if (name == "grappa") return ReconMethod::grappa;
  if (name == "vc-grappa") return ReconMethod::vc_grappa;
  if (name == "sense") return ReconMethod::sense;
  if (name == "wave") return ReconMethod::wave;
  if (name == "wave-slice-group") return ReconMethod::wave_slice_group;
  if (name == "grappa3d") return ReconMethod::grappa3d_hybrid;
  throw std::runtime_error("config: unknown method '" + name + "'");
}

PipelineParams pipeline_params(const RunConfig& cfg) {
  PipelineParams p;
  p.method = parse_method(cfg.method);
  p.taps = GrappaTaps{cfg.grappa.taps_read, cfg.grappa.taps_pe, cfg.grappa.taps_pa};
  p.lambda = cfg.grappa.lambda;
  p.cg_max_iter = cfg.sense.max_iter;
  p.cg_tol = cfg.sense.tol;
  p.wave_cycles = cfg.wave.cycles;
  p.wave_amplitude_rad = cfg.wave.amplitude_rad;
  p.readout_os = cfg.wave.oversample;
  p.caipi_shift = cfg.wave.caipi_shift;
  p.ref_pe = cfg.hybrid.ref_pe;
  p.ref_pa = cfg.hybrid.ref_pa;
  p.spark.arch = cfg.spark.arch == "net3d" ? SparkArch::net3d : SparkArch::net2d;
  p.spark.epochs = cfg.spark.epochs;
  p.spark.lr = cfg.spark.lr;
  p.spark.hidden_channels = cfg.spark.hidden;
  p.spark.seed = cfg.spark.seed;
  p.spark.final_acs_replace = cfg.spark.final_acs_replace;
  return p;
}

}  // namespace sparkmri
