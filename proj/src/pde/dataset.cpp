#include "radon/pde/dataset.hpp"

#include "radon/pde/advection.hpp"
#include "radon/pde/burgers.hpp"
#include "radon/pde/riemann.hpp"

#include <random>
#include <set>

namespace radon::pde {

namespace {

const std::set<std::string> kProblems = {"advection", "burgers", "burgers-spacetime", "sod"};
const std::vector<std::string> kSplits = {"train", "validation", "test"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Vec linspace(double lo, double hi, int n) { return Vec::LinSpaced(n, lo, hi); }

}  // namespace

void DatasetConfig::validate() const {
  require(kProblems.count(problem) > 0, "unknown problem '" + problem + "'");
  require(n_train >= 1 && n_validation >= 0 && n_test >= 0, "split counts must be nonnegative");
  if (problem == "advection") {
    require(advection_points >= 4, "advection needs at least 4 output points");
    require(advection_time >= 0.0, "advection time must be nonnegative");
  }
  if (problem == "burgers" || problem == "burgers-spacetime") {
    require(nu > 0.0 && burgers_time > 0.0, "Burgers needs positive viscosity and time");
    require(n_modes >= 8 && (n_modes & (n_modes - 1)) == 0, "n_modes must be a power of two");
    require(sensors >= 1 && n_modes % sensors == 0, "sensors must divide n_modes");
    require(dt > 0.0 && dt <= 1e-3, "dt must lie in (0, 1e-3]");
  }
  if (problem == "burgers-spacetime") {
    require(spacetime_x == n_modes + 1, "spacetime_x must equal n_modes + 1 (closed periodic grid)");
    require(spacetime_t >= 2, "spacetime_t must be at least 2");
  }
  if (problem == "sod") {
    require(sod_points >= 4 && sod_hi > sod_lo && sod_time > 0.0, "invalid Sod grid or time");
  }
}

json DatasetConfig::to_json() const {
  return {
      {"problem", problem},
      {"counts", {{"train", n_train}, {"validation", n_validation}, {"test", n_test}}},
      {"seed", seed},
      {"advection", {{"speed", advection_speed}, {"time", advection_time}, {"points", advection_points}}},
      {"burgers",
       {{"nu", nu},
        {"time", burgers_time},
        {"n_modes", n_modes},
        {"dt", dt},
        {"sensors", sensors},
        {"spacetime_x", spacetime_x},
        {"spacetime_t", spacetime_t},
        {"grf",
         {{"amplitude", grf.amplitude},
          {"tau", grf.tau},
          {"order", grf.order},
          {"convention", grf.convention}}}}},
      {"sod", {{"points", sod_points}, {"lo", sod_lo}, {"hi", sod_hi}, {"time", sod_time}}},
  };
}

DatasetConfig DatasetConfig::from_json(const json& j) {
  DatasetConfig c;
  try {
    reject_unknown(j, {"problem", "counts", "seed", "advection", "burgers", "sod"}, "dataset config");
    read_opt(j, "problem", c.problem);
    read_opt(j, "seed", c.seed);
    if (j.contains("counts")) {
      const json& k = j["counts"];
      reject_unknown(k, {"train", "validation", "test"}, "dataset counts");
      read_opt(k, "train", c.n_train);
      read_opt(k, "validation", c.n_validation);
      read_opt(k, "test", c.n_test);
    }
    if (j.contains("advection")) {
      const json& a = j["advection"];
      reject_unknown(a, {"speed", "time", "points"}, "advection config");
      read_opt(a, "speed", c.advection_speed);
      read_opt(a, "time", c.advection_time);
      read_opt(a, "points", c.advection_points);
    }
    if (j.contains("burgers")) {
      const json& b = j["burgers"];
      reject_unknown(b, {"nu", "time", "n_modes", "dt", "sensors", "spacetime_x", "spacetime_t", "grf"},
                     "burgers config");
      read_opt(b, "nu", c.nu);
      read_opt(b, "time", c.burgers_time);
      read_opt(b, "n_modes", c.n_modes);
      read_opt(b, "dt", c.dt);
      read_opt(b, "sensors", c.sensors);
      read_opt(b, "spacetime_x", c.spacetime_x);
      read_opt(b, "spacetime_t", c.spacetime_t);
      if (b.contains("grf")) {
        const json& g = b["grf"];
        reject_unknown(g, {"amplitude", "tau", "order", "convention"}, "grf config");
        read_opt(g, "amplitude", c.grf.amplitude);
        read_opt(g, "tau", c.grf.tau);
        read_opt(g, "order", c.grf.order);
        read_opt(g, "convention", c.grf.convention);
      }
    }
    if (j.contains("sod")) {
      const json& s = j["sod"];
      reject_unknown(s, {"points", "lo", "hi", "time"}, "sod config");
      read_opt(s, "points", c.sod_points);
      read_opt(s, "lo", c.sod_lo);
      read_opt(s, "hi", c.sod_hi);
      read_opt(s, "time", c.sod_time);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed dataset config: ") + e.what());
  }
  c.validate();
  return c;
}

Mat PdeDataset::field(int sample) const {
  require(sample >= 0 && sample < count(), "sample index out of range");
  Mat f(n_t(), n_x());
  for (int k = 0; k < n_t(); ++k) f.row(k) = outputs.row(sample).segment(k * n_x(), n_x());
  return f;
}

void PdeDataset::validate() const {
  require(inputs.rows() == outputs.rows(), "dataset input and output counts differ");
  require(outputs.cols() == static_cast<Eigen::Index>(n_t()) * n_x(),
          "dataset output width does not match its grids");
  require(inputs.allFinite() && outputs.allFinite(), "dataset contains non-finite values");
}

Container to_container(const PdeDataset& d) {
  d.validate();
  Container c;
  c.header = {{"format", "radon-dataset-split"},
              {"format_version", kDatasetVersion},
              {"problem", d.problem},
              {"split", d.split},
              {"seed", d.seed},
              {"count", d.count()},
              {"x_grid", grid_to_json(d.x_grid)},
              {"periodic", d.periodic}};
  c.add("inputs", d.inputs);
  c.add("outputs", d.outputs);
  if (d.times.size() > 0) c.add("times", d.times);
  return c;
}

PdeDataset dataset_from_container(const Container& c) {
  const json& h = c.header;
  if (h.value("format", std::string()) != "radon-dataset-split")
    throw FormatError("not a dataset split file");
  if (h.value("format_version", -1) != kDatasetVersion)
    throw FormatError("unsupported dataset format version");
  PdeDataset d;
  d.problem = h.at("problem").get<std::string>();
  d.split = h.at("split").get<std::string>();
  d.seed = h.at("seed").get<std::uint64_t>();
  d.x_grid = grid_from_json(h.at("x_grid"));
  d.periodic = h.at("periodic").get<bool>();
  d.inputs = c.matrix("inputs");
  d.outputs = c.matrix("outputs");
  if (c.has("times")) d.times = c.vector("times");
  if (d.count() != h.at("count").get<int>()) throw FormatError("dataset count does not match header");
  d.validate();
  return d;
}

PdeDataset generate_split(const DatasetConfig& cfg, const std::string& split, int count) {
  cfg.validate();
  require(count >= 0, "split count must be nonnegative");
  PdeDataset d;
  d.problem = cfg.problem;
  d.split = split;
  d.seed = substream_seed(cfg.seed, "datagen/" + split);

  if (cfg.problem == "advection") {
    d.x_grid = {0.0, 1.0, cfg.advection_points, true};
    d.periodic = true;
    const Vec x = d.x_grid.nodes();
    d.inputs.resize(count, 3);
    d.outputs.resize(count, x.size());
    for (int i = 0; i < count; ++i) {
      std::mt19937_64 rng(substream_seed(cfg.seed, "datagen/" + split, i));
      const BoxWaveParams p = sample_box_params(rng);
      d.inputs.row(i) = p.encode().transpose();
      d.outputs.row(i) =
          advection_exact(p, cfg.advection_speed, cfg.advection_time, x, 0.0, 1.0).transpose();
    }
  } else if (cfg.problem == "burgers" || cfg.problem == "burgers-spacetime") {
    const bool spacetime = cfg.problem == "burgers-spacetime";
    BurgersOptions opts{cfg.nu, cfg.n_modes, cfg.dt, false};
    const int stride = cfg.n_modes / cfg.sensors;
    d.periodic = true;
    if (spacetime) {
      d.x_grid = {0.0, 1.0, cfg.spacetime_x, false};
      d.times = linspace(0.0, cfg.burgers_time, cfg.spacetime_t);
    } else {
      d.x_grid = {0.0, 1.0, cfg.n_modes, true};
    }
    d.inputs.resize(count, cfg.sensors);
    d.outputs.resize(count, static_cast<Eigen::Index>(d.n_t()) * d.n_x());
    for (int i = 0; i < count; ++i) {
      std::mt19937_64 rng(substream_seed(cfg.seed, "datagen/" + split, i));
      const Vec u0 = grf_sample(rng, cfg.n_modes, cfg.grf);
      for (int s = 0; s < cfg.sensors; ++s) d.inputs(i, s) = u0[s * stride];
      if (spacetime) {
        const Mat u = burgers_solve_on_times(u0, d.times, opts);
        for (int k = 0; k < d.n_t(); ++k) {
          auto row = d.outputs.row(i).segment(static_cast<Eigen::Index>(k) * d.n_x(), d.n_x());
          row.head(cfg.n_modes) = u.row(k);
          row[cfg.n_modes] = u(k, 0);
        }
      } else {
        d.outputs.row(i) = burgers_solve(u0, cfg.burgers_time, opts).transpose();
      }
    }
  } else {
    d.x_grid = {cfg.sod_lo, cfg.sod_hi, cfg.sod_points, false};
    d.periodic = false;
    const Vec x = d.x_grid.nodes();
    d.inputs.resize(count, 6);
    d.outputs.resize(count, x.size());
    for (int i = 0; i < count; ++i) {
      std::mt19937_64 rng(substream_seed(cfg.seed, "datagen/" + split, i));
      Vec z;
      const RiemannState st = sod_params_sample(rng, &z);
      d.inputs.row(i) = z.transpose();
      d.outputs.row(i) = euler_riemann_exact(st, x, cfg.sod_time).e.transpose();
    }
  }
  d.validate();
  return d;
}

json dataset_build(const DatasetConfig& cfg, const std::filesystem::path& dir) {
  cfg.validate();
  json manifest = {{"format", "radon-dataset"},
                   {"format_version", kDatasetVersion},
                   {"problem", cfg.problem},
                   {"config", cfg.to_json()},
                   {"splits", json::object()}};
  const int counts[] = {cfg.n_train, cfg.n_validation, cfg.n_test};
  for (std::size_t s = 0; s < kSplits.size(); ++s) {
    const PdeDataset d = generate_split(cfg, kSplits[s], counts[s]);
    const std::string bytes = serialize(to_container(d));
    const std::string file = kSplits[s] + ".bin";
    write_file(dir / file, bytes);
    manifest["splits"][kSplits[s]] = {
        {"file", file}, {"count", counts[s]}, {"seed", d.seed}, {"hash", hex64(fnv1a(bytes))}};
    if (s == 0) {
      manifest["x_grid"] = grid_to_json(d.x_grid);
      manifest["periodic"] = d.periodic;
      manifest["input_dim"] = d.inputs.cols();
      if (d.times.size() > 0) manifest["t_grid"] = {{"lo", d.times[0]}, {"hi", d.times[d.times.size() - 1]}, {"n", d.times.size()}};
    }
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

json read_dataset_manifest(const std::filesystem::path& dir) {
  json m;
  try {
    m = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw FormatError("malformed dataset manifest: " + std::string(e.what()));
  }
  if (m.value("format", std::string()) != "radon-dataset")
    throw FormatError(dir.string() + " is not a dataset directory");
  if (m.value("format_version", -1) != kDatasetVersion)
    throw FormatError("unsupported dataset format version");
  return m;
}

PdeDataset read_split(const std::filesystem::path& dir, const std::string& split) {
  const json m = read_dataset_manifest(dir);
  if (!m["splits"].contains(split)) throw InvalidArgument("dataset has no split '" + split + "'");
  const json& entry = m["splits"][split];
  const std::string bytes = read_file(dir / entry.at("file").get<std::string>());
  if (hex64(fnv1a(bytes)) != entry.at("hash").get<std::string>())
    throw FormatError("split file " + split + " does not match the manifest hash");
  return dataset_from_container(deserialize(bytes));
}

}  // namespace radon::pde
