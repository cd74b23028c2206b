#include "radon/experiment.hpp"

#include "radon/analysis.hpp"
#include "radon/reconstruct.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace radon::experiment {

namespace fs = std::filesystem;
using deeponet::NetSpec;

// ---------------------------------------------------------------------------
// Config

equi::PreprocessOptions PreprocessConfig::options() const {
  equi::PreprocessOptions o;
  o.n_xi = n_xi;
  o.cap_solution = cap_solution;
  o.cap_coordinate = cap_coordinate;
  o.density.beta = beta;
  o.density.smoothing_passes = smoothing_passes;
  return o;
}

namespace {

json net_json(const NetSpec& n) {
  return {{"hidden", n.hidden}, {"activation", std::string(nn::to_string(n.activation))}};
}

NetSpec net_from_json(const json& j, NetSpec base) {
  for (const auto& [key, value] : j.items()) {
    if (key == "hidden") base.hidden = value.get<std::vector<int>>();
    else if (key == "activation") base.activation = nn::activation_from_string(value.get<std::string>());
    else throw InvalidArgument("unknown key '" + key + "' in net spec");
  }
  for (int w : base.hidden) require(w >= 1, "hidden widths must be positive");
  return base;
}

template <class Fn>
void for_keys(const json& j, const char* where, Fn fn) {
  if (!j.is_object()) throw InvalidArgument(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!fn(key, value)) throw InvalidArgument("unknown key '" + key + "' in " + where);
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string file_hash(const fs::path& p) { return hex64(fnv1a(read_file(p))); }

}  // namespace

Paths ExperimentConfig::resolved_paths() const {
  Paths p = paths;
  if (p.data.empty()) p.data = output_dir / "data";
  if (p.preprocessed.empty()) p.preprocessed = output_dir / "preprocessed";
  if (p.models.empty()) p.models = output_dir / "models";
  if (p.eval.empty()) p.eval = output_dir / "eval";
  if (p.analysis.empty()) p.analysis = output_dir / "analysis";
  return p;
}

void ExperimentConfig::validate() const {
  require(!name.empty(), "experiment name must not be empty");
  require(!output_dir.empty(), "output_dir must not be empty");
  dataset.validate();
  require(preprocess.n_xi >= 2, "n_xi must be at least 2");
  require(preprocess.cap_solution >= 1.0 && preprocess.cap_coordinate >= 1.0,
          "weight caps must be at least 1");
  require(preprocess.beta >= 0.0 && preprocess.smoothing_passes >= 0,
          "beta and smoothing passes must be nonnegative");
  require(preprocess.time_slices >= 0, "time_slices must be nonnegative");
  require(model.basis >= 1, "basis must be positive");
  training.train.validate();
  require(training.output_points >= 2, "output_points must be at least 2");
  require(training.output_times >= 0, "output_times must be nonnegative");
  require(eval.eval_xi_cells >= 0, "eval_xi_cells must be nonnegative");
  require(eval.split == "test" || eval.split == "validation" || eval.split == "train",
          "eval split must be train, validation or test");
  require(eval.checkpoint == "final" || eval.checkpoint == "best",
          "eval checkpoint must be final or best");
  require(!analysis.ns.empty() && !analysis.tail_ns.empty(), "analysis n lists must be nonempty");
}

json ExperimentConfig::to_json() const {
  json ds = dataset.to_json();
  ds.erase("seed");  // derived from the root seed
  const Paths& p = paths;
  return {
      {"name", name},
      {"seed", seed},
      {"output_dir", output_dir.string()},
      {"paths",
       {{"data", p.data.string()},
        {"preprocessed", p.preprocessed.string()},
        {"models", p.models.string()},
        {"eval", p.eval.string()},
        {"analysis", p.analysis.string()}}},
      {"dataset", ds},
      {"preprocess",
       {{"n_xi", preprocess.n_xi},
        {"cap_solution", preprocess.cap_solution},
        {"cap_coordinate", preprocess.cap_coordinate},
        {"beta", preprocess.beta},
        {"smoothing_passes", preprocess.smoothing_passes},
        {"time_slices", preprocess.time_slices}}},
      {"model",
       {{"basis", model.basis},
        {"branch", net_json(model.branch)},
        {"trunk", net_json(model.trunk)},
        {"shift_scale", net_json(model.scale)},
        {"shift_shift", net_json(model.shift)}}},
      {"training",
       [&] {
         json t = training.train.to_json();
         t.erase("seed");
         t["output_points"] = training.output_points;
         t["output_times"] = training.output_times;
         return t;
       }()},
      {"eval",
       {{"eval_xi_cells", eval.eval_xi_cells},
        {"split", eval.split},
        {"checkpoint", eval.checkpoint}}},
      {"analysis",
       {{"zeta", analysis.zeta},
        {"ns", analysis.ns},
        {"quadrature_cells", analysis.quadrature_cells},
        {"tail_ns", analysis.tail_ns}}},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    for_keys(j, "experiment config", [&](const std::string& key, const json& v) {
      if (key == "name") c.name = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "paths") {
        for_keys(v, "paths", [&](const std::string& k, const json& p) {
          if (k == "data") c.paths.data = p.get<std::string>();
          else if (k == "preprocessed") c.paths.preprocessed = p.get<std::string>();
          else if (k == "models") c.paths.models = p.get<std::string>();
          else if (k == "eval") c.paths.eval = p.get<std::string>();
          else if (k == "analysis") c.paths.analysis = p.get<std::string>();
          else return false;
          return true;
        });
      } else if (key == "dataset") {
        if (v.contains("seed")) throw InvalidArgument("dataset seed is derived from the root seed");
        c.dataset = pde::DatasetConfig::from_json(v);
      } else if (key == "preprocess") {
        for_keys(v, "preprocess", [&](const std::string& k, const json& p) {
          if (k == "n_xi") c.preprocess.n_xi = p.get<int>();
          else if (k == "cap_solution") c.preprocess.cap_solution = p.get<double>();
          else if (k == "cap_coordinate") c.preprocess.cap_coordinate = p.get<double>();
          else if (k == "beta") c.preprocess.beta = p.get<double>();
          else if (k == "smoothing_passes") c.preprocess.smoothing_passes = p.get<int>();
          else if (k == "time_slices") c.preprocess.time_slices = p.get<int>();
          else return false;
          return true;
        });
      } else if (key == "model") {
        for_keys(v, "model", [&](const std::string& k, const json& p) {
          if (k == "basis") c.model.basis = p.get<int>();
          else if (k == "branch") c.model.branch = net_from_json(p, c.model.branch);
          else if (k == "trunk") c.model.trunk = net_from_json(p, c.model.trunk);
          else if (k == "shift_scale") c.model.scale = net_from_json(p, c.model.scale);
          else if (k == "shift_shift") c.model.shift = net_from_json(p, c.model.shift);
          else return false;
          return true;
        });
      } else if (key == "training") {
        json t = v;
        if (t.contains("seed")) throw InvalidArgument("training seed is derived from the root seed");
        if (t.contains("output_points")) c.training.output_points = t["output_points"].get<int>();
        if (t.contains("output_times")) c.training.output_times = t["output_times"].get<int>();
        t.erase("output_points");
        t.erase("output_times");
        c.training.train = training::TrainConfig::from_json(t);
      } else if (key == "eval") {
        for_keys(v, "eval", [&](const std::string& k, const json& p) {
          if (k == "eval_xi_cells") c.eval.eval_xi_cells = p.get<int>();
          else if (k == "split") c.eval.split = p.get<std::string>();
          else if (k == "checkpoint") c.eval.checkpoint = p.get<std::string>();
          else return false;
          return true;
        });
      } else if (key == "analysis") {
        for_keys(v, "analysis", [&](const std::string& k, const json& p) {
          if (k == "zeta") c.analysis.zeta = p.get<double>();
          else if (k == "ns") c.analysis.ns = p.get<std::vector<int>>();
          else if (k == "quadrature_cells") c.analysis.quadrature_cells = p.get<int>();
          else if (k == "tail_ns") c.analysis.tail_ns = p.get<std::vector<int>>();
          else return false;
          return true;
        });
      } else {
        return false;
      }
      return true;
    });
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }
  c.dataset.seed = c.seed;
  c.training.train.seed = substream_seed(c.seed, "shuffle");
  c.validate();
  return c;
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.dataset.seed = c.seed;
  c.training.train.seed = substream_seed(c.seed, "shuffle");
  return c;
}

ExperimentConfig load_config(const fs::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + file.string() + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Run manifests

namespace {

void write_run(const fs::path& dir, const std::string& stage, const ExperimentConfig& cfg,
               const json& upstream, const std::vector<fs::path>& outputs, json extra = {}) {
  json out = json::object();
  for (const auto& p : outputs) out[p.filename().string()] = file_hash(p);
  json run = {{"stage", stage},
              {"tool_version", kToolVersion},
              {"config_hash", cfg.hash()},
              {"seed", cfg.seed},
              {"upstream", upstream},
              {"outputs", out}};
  if (!extra.is_null()) run["details"] = extra;
  write_file(dir / "run.json", run.dump(2) + "\n");
}

json read_run(const fs::path& dir) {
  const fs::path p = dir / "run.json";
  if (!fs::exists(p))
    throw InvalidArgument("missing upstream stage output " + dir.string() + " (run the stage first)");
  json run = json::parse(read_file(p));
  if (run.value("tool_version", std::string()) != kToolVersion)
    throw FormatError(dir.string() + " was written by an incompatible tool version");
  return run;
}

// Verifies the stage outputs in dir are unmodified and returns {path: hash}.
json verified_outputs(const fs::path& dir) {
  const json run = read_run(dir);
  json cur = json::object();
  for (const auto& [file, hash] : run.at("outputs").items()) {
    const fs::path p = dir / file;
    if (!fs::exists(p)) throw FormatError("upstream file " + p.string() + " is missing");
    const std::string h = file_hash(p);
    if (h != hash.get<std::string>())
      throw FormatError("upstream file " + p.string() + " was modified after its stage ran");
    cur[p.string()] = h;
  }
  return cur;
}

// Every upstream entry recorded in dir/run.json must still match the files.
void check_not_stale(const fs::path& dir) {
  const json run = read_run(dir);
  for (const auto& [path, hash] : run.at("upstream").items()) {
    if (!fs::exists(path) || file_hash(path) != hash.get<std::string>())
      throw FormatError("stale upstream: " + path + " changed since " + dir.string() +
                        " was produced; rerun " + run.at("stage").get<std::string>());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Data helpers

equi::PreprocessedSplit preprocess_split(const pde::PdeDataset& d, const PreprocessConfig& cfg,
                                         const std::string& source_hash) {
  d.validate();
  equi::PreprocessedSplit p;
  p.split = d.split;
  p.periodic = d.periodic;
  p.options = cfg.options();
  p.source_hash = source_hash;
  p.inputs = d.inputs;
  p.source_ids.resize(d.count());

  // Spatial grid the density works on; closed periodic storage drops the
  // duplicated last node.
  UniformGrid g = d.x_grid;
  int drop = 0;
  if (d.periodic && !g.periodic) {
    g = {d.x_grid.lo, d.x_grid.hi, d.x_grid.n - 1, true};
    drop = 1;
  }
  std::vector<int> slice_ids;
  if (d.times.size() == 0) {
    slice_ids = {0};
  } else {
    const int nt = d.n_t();
    const int keep = cfg.time_slices == 0 ? nt : std::min(cfg.time_slices, nt);
    require(keep >= 2, "space-time preprocessing keeps at least two slices");
    for (int k = 0; k < keep; ++k)
      slice_ids.push_back(static_cast<int>(std::lround(static_cast<double>(k) * (nt - 1) / (keep - 1))));
    p.times.resize(keep);
    for (int k = 0; k < keep; ++k) p.times[k] = d.times[slice_ids[k]];
  }
  const int n_xi = cfg.n_xi;
  const Eigen::Index width = static_cast<Eigen::Index>(slice_ids.size()) * (n_xi + 1);
  for (Mat* m : {&p.x, &p.u, &p.det_j, &p.w_solution, &p.w_coordinate}) m->resize(d.count(), width);
  p.sigma.resize(d.count() * static_cast<Eigen::Index>(slice_ids.size()));

  const equi::PreprocessOptions opts = cfg.options();
  for (int i = 0; i < d.count(); ++i) {
    const Mat field = d.field(i);
    for (std::size_t k = 0; k < slice_ids.size(); ++k) {
      const Vec row = field.row(slice_ids[k]).head(d.n_x() - drop).transpose();
      const equi::AdaptiveSample s = equi::preprocess_sample(equi::SampledField{g, row}, opts);
      const Eigen::Index off = static_cast<Eigen::Index>(k) * (n_xi + 1);
      p.x.row(i).segment(off, n_xi + 1) = s.x.transpose();
      p.u.row(i).segment(off, n_xi + 1) = s.u.transpose();
      p.det_j.row(i).segment(off, n_xi + 1) = s.det_j.transpose();
      p.w_solution.row(i).segment(off, n_xi + 1) = s.w_solution.transpose();
      p.w_coordinate.row(i).segment(off, n_xi + 1) = s.w_coordinate.transpose();
      p.sigma[i * static_cast<Eigen::Index>(slice_ids.size()) + k] = s.sigma;
      if (i == 0 && k == 0) p.xi = s.xi;
    }
    p.source_ids[i] = i;
  }
  p.validate();
  return p;
}

namespace {

std::vector<int> even_indices(int n, int points, bool periodic) {
  require(points >= 2 && points <= n, "cannot pick that many output points");
  std::vector<int> idx(points);
  for (int i = 0; i < points; ++i) {
    if (periodic) {
      require(n % points == 0, "output_points must divide a periodic grid");
      idx[i] = i * (n / points);
    } else {
      idx[i] = static_cast<int>(std::lround(static_cast<double>(i) * (n - 1) / (points - 1)));
    }
  }
  return idx;
}

}  // namespace

std::vector<int> output_point_indices(const pde::PdeDataset& d, int points, int times) {
  const std::vector<int> xs = even_indices(d.n_x(), std::min(points, d.n_x()), d.x_grid.periodic);
  std::vector<int> ts = {0};
  if (d.times.size() > 0)
    ts = even_indices(d.n_t(), times == 0 ? d.n_t() : std::min(times, d.n_t()), false);
  std::vector<int> cols;
  for (int t : ts)
    for (int x : xs) cols.push_back(t * d.n_x() + x);
  return cols;
}

namespace {

Mat output_queries(const pde::PdeDataset& d, const std::vector<int>& cols) {
  const bool st = d.times.size() > 0;
  Mat q(cols.size(), st ? 2 : 1);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    q(c, 0) = d.x_grid.node(cols[c] % d.n_x());
    if (st) q(c, 1) = d.times[cols[c] / d.n_x()];
  }
  return q;
}

std::vector<int> all_columns(const pde::PdeDataset& d) {
  std::vector<int> cols(d.outputs.cols());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = static_cast<int>(c);
  return cols;
}

}  // namespace

training::SupervisedData baseline_data(const pde::PdeDataset& d, int points, int times) {
  const auto cols = output_point_indices(d, points, times);
  training::SupervisedData s;
  s.inputs = d.inputs;
  s.queries = output_queries(d, cols);
  s.targets.resize(d.count(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) s.targets.col(c) = d.outputs.col(cols[c]);
  return s;
}

deeponet::ComputationalGrid computational_grid(const equi::PreprocessedSplit& p) {
  return {p.xi, p.times};
}

training::SupervisedData adaptive_data(const equi::PreprocessedSplit& p, bool coordinate) {
  training::SupervisedData s;
  s.inputs = p.inputs;
  s.queries = computational_grid(p).queries();
  s.targets = coordinate ? p.x : p.u;
  s.weights = coordinate ? p.w_coordinate : p.w_solution;
  return s;
}

deeponet::QueryNormalization output_query_norm(const pde::PdeDataset& d) {
  if (d.times.size() == 0)
    return deeponet::QueryNormalization::for_box(Vec::Constant(1, d.x_grid.lo),
                                                 Vec::Constant(1, d.x_grid.hi));
  return deeponet::QueryNormalization::for_box(Vec{{d.x_grid.lo, d.times[0]}},
                                               Vec{{d.x_grid.hi, d.times[d.times.size() - 1]}});
}

RAdaptiveEval radaptive_evaluate(const deeponet::RAdaptiveSystem& system,
                                 const pde::PdeDataset& test, int eval_xi_cells) {
  system.validate();
  deeponet::ComputationalGrid grid = system.grid;
  const double lo = grid.xi[0];
  const double hi = grid.xi[grid.xi.size() - 1];
  if (eval_xi_cells > 0) {
    grid.xi = Vec::LinSpaced(eval_xi_cells + 1, lo, hi);
    grid.xi[eval_xi_cells] = hi;
  }
  const Mat q = grid.queries();
  const Mat y = deeponet::deeponet_eval_batch(system.coord_net, test.inputs, q);
  const Mat u = deeponet::deeponet_eval_batch(system.sol_net, test.inputs, q);
  const Eigen::Index nx = grid.xi.size();
  const int slices = grid.slice_count();
  const double dxi = grid.xi[1] - grid.xi[0];

  RAdaptiveEval out;
  out.predictions.resize(test.count(), test.outputs.cols());
  const Vec targets = test.x_grid.nodes();
  long positive = 0, total_det = 0, mono_before = 0, mono_after = 0, meshes = 0;
  for (int i = 0; i < test.count(); ++i) {
    std::vector<reconstruct::GraphPrediction> graphs;
    for (int k = 0; k < slices; ++k) {
      const Vec knots = y.row(i).segment(k * nx, nx).transpose();
      const Vec values = u.row(i).segment(k * nx, nx).transpose();
      const Vec det = training::jacobian_stencil(knots, dxi, test.periodic);
      positive += (det.array() > 0.0).count();
      total_det += det.size();
      bool inc = true;
      for (Eigen::Index j = 1; j < nx && inc; ++j) inc = knots[j] > knots[j - 1];
      mono_before += inc;
      const Vec fixed = reconstruct::monotone_fix(knots, lo, hi);
      bool inc_after = true;
      for (Eigen::Index j = 1; j < nx && inc_after; ++j) inc_after = fixed[j] > fixed[j - 1];
      mono_after += inc_after;
      ++meshes;
      graphs.push_back({knots, values});
    }
    if (slices == 1 && test.times.size() == 0) {
      out.predictions.row(i) =
          reconstruct::recover_uniform(graphs[0], targets, lo, hi, test.periodic).transpose();
    } else {
      const Mat f = reconstruct::recover_spacetime(graphs, grid.times, targets, test.times, lo, hi,
                                                   test.periodic);
      for (int t = 0; t < test.n_t(); ++t)
        out.predictions.row(i).segment(static_cast<Eigen::Index>(t) * test.n_x(), test.n_x()) = f.row(t);
    }
  }
  out.positive_det = static_cast<double>(positive) / static_cast<double>(total_det);
  out.monotone_before_fix = static_cast<double>(mono_before) / static_cast<double>(meshes);
  out.monotone_after_fix = static_cast<double>(mono_after) / static_cast<double>(meshes);
  return out;
}

// ---------------------------------------------------------------------------
// Stages

json cmd_datagen(const ExperimentConfig& cfg) {
  cfg.validate();
  const Paths p = cfg.resolved_paths();
  const json manifest = pde::dataset_build(cfg.dataset, p.data);
  write_run(p.data, "datagen", cfg, json::object(),
            {p.data / "manifest.json", p.data / "train.bin", p.data / "validation.bin",
             p.data / "test.bin"});
  return manifest;
}

json cmd_preprocess(const ExperimentConfig& cfg) {
  cfg.validate();
  const Paths p = cfg.resolved_paths();
  const json upstream = verified_outputs(p.data);
  const json manifest = pde::read_dataset_manifest(p.data);
  std::vector<fs::path> outputs;
  json summary = json::object();
  for (const std::string split : {"train", "validation", "test"}) {
    const pde::PdeDataset d = pde::read_split(p.data, split);
    const auto pre = preprocess_split(d, cfg.preprocess,
                                      manifest.at("splits").at(split).at("hash").get<std::string>());
    const fs::path file = p.preprocessed / (split + ".bin");
    write_container(file, to_container(pre));
    outputs.push_back(file);
    summary[split] = {{"count", pre.count()}, {"n_xi", cfg.preprocess.n_xi}, {"slices", pre.slices()}};
  }
  write_run(p.preprocessed, "preprocess", cfg, upstream, outputs, summary);
  return summary;
}

namespace {

deeponet::DeepOnetSpec deeponet_spec(const ExperimentConfig& cfg, int input_dim, int query_dim) {
  deeponet::DeepOnetSpec s;
  s.input_dim = input_dim;
  s.query_dim = query_dim;
  s.basis = cfg.model.basis;
  s.branch = cfg.model.branch;
  s.trunk = cfg.model.trunk;
  return s;
}

equi::PreprocessedSplit read_preprocessed(const fs::path& dir, const std::string& split) {
  return equi::preprocessed_from_container(read_container(dir / (split + ".bin")));
}

}  // namespace

json cmd_train(const ExperimentConfig& cfg, const std::string& family) {
  cfg.validate();
  const std::set<std::string> families(kFamilies.begin(), kFamilies.end());
  if (!families.count(family)) throw InvalidArgument("unknown model family '" + family + "'");
  const Paths p = cfg.resolved_paths();
  const fs::path dir = p.models / family;
  training::TrainConfig tc = cfg.training.train;
  tc.seed = substream_seed(cfg.seed, "shuffle/" + family);
  const std::uint64_t init_seed = substream_seed(cfg.seed, "init/" + family);

  json report;
  json upstream;
  json extra = json::object();
  if (family == "vanilla" || family == "shift") {
    upstream = verified_outputs(p.data);
    const pde::PdeDataset train = pde::read_split(p.data, "train");
    const pde::PdeDataset val = pde::read_split(p.data, "validation");
    const auto td = baseline_data(train, cfg.training.output_points, cfg.training.output_times);
    const auto vd = baseline_data(val, cfg.training.output_points, cfg.training.output_times);
    const auto spec = deeponet_spec(cfg, static_cast<int>(train.inputs.cols()),
                                    static_cast<int>(td.queries.cols()));
    if (family == "vanilla") {
      auto model = deeponet::make_deeponet(spec, init_seed);
      model.query_norm = output_query_norm(train);
      model.input_norm = deeponet::InputStandardization::fit(train.inputs);
      auto r = training::train_deeponet(model, td, vd, {training::LossKind::plain, {}}, tc);
      deeponet::save_bundle(dir / "final", deeponet::to_bundle(r.model));
      deeponet::save_bundle(dir / "best", deeponet::to_bundle(r.best));
      report = r.report.to_json();
    } else {
      deeponet::ShiftDeepOnetSpec ss;
      ss.base = spec;
      ss.scale = cfg.model.scale;
      ss.shift = cfg.model.shift;
      auto model = deeponet::make_shift_deeponet(ss, init_seed);
      model.query_norm = output_query_norm(train);
      model.input_norm = deeponet::InputStandardization::fit(train.inputs);
      auto r = training::train_shift(model, td, vd, tc);
      deeponet::save_bundle(dir / "final", deeponet::to_bundle(r.model));
      deeponet::save_bundle(dir / "best", deeponet::to_bundle(r.best));
      report = r.report.to_json();
    }
  } else {
    upstream = verified_outputs(p.preprocessed);
    const json data_manifest = pde::read_dataset_manifest(p.data);
    const auto train = read_preprocessed(p.preprocessed, "train");
    const auto val = read_preprocessed(p.preprocessed, "validation");
    for (const auto* s : {&train, &val})
      if (s->source_hash != data_manifest.at("splits").at(s->split).at("hash").get<std::string>())
        throw FormatError("stale upstream: preprocessed " + s->split +
                          " split was built from an older dataset; rerun preprocess");
    const bool coord = family == "radaptive-coord";
    const auto td = adaptive_data(train, coord);
    const auto vd = adaptive_data(val, coord);
    const auto grid = computational_grid(train);
    auto model = deeponet::make_deeponet(
        deeponet_spec(cfg, static_cast<int>(train.inputs.cols()), static_cast<int>(td.queries.cols())),
        init_seed);
    const double lo = train.xi[0], hi = train.xi[train.xi.size() - 1];
    model.query_norm =
        train.times.size() == 0
            ? deeponet::QueryNormalization::for_box(Vec::Constant(1, lo), Vec::Constant(1, hi))
            : deeponet::QueryNormalization::for_box(Vec{{lo, train.times[0]}},
                                                    Vec{{hi, train.times[train.times.size() - 1]}});
    model.input_norm = deeponet::InputStandardization::fit(train.inputs);
    training::LossSpec loss;
    loss.kind = coord ? training::LossKind::coordinate : training::LossKind::solution;
    loss.layout = {train.xi[1] - train.xi[0], train.slices(), train.periodic};
    auto r = training::train_deeponet(model, td, vd, loss, tc);
    deeponet::save_bundle(dir / "final", deeponet::to_bundle(r.model));
    deeponet::save_bundle(dir / "best", deeponet::to_bundle(r.best));
    report = r.report.to_json();
    extra["grid"] = {{"xi", std::vector<double>(grid.xi.begin(), grid.xi.end())},
                     {"times", std::vector<double>(grid.times.begin(), grid.times.end())},
                     {"periodic", train.periodic}};
  }
  report["family"] = family;
  write_file(dir / "report.json", report.dump(2) + "\n");
  std::vector<fs::path> outputs = {dir / "report.json"};
  for (const char* which : {"final", "best"})
    for (const auto& e : fs::directory_iterator(dir / which))
      outputs.push_back(e.path());
  // Output names must be unique within run.json, so record bundle files
  // relative to the family directory.
  json out = json::object();
  for (const auto& f : outputs) out[fs::relative(f, dir).string()] = file_hash(f);
  json run = {{"stage", "train"},
              {"family", family},
              {"tool_version", kToolVersion},
              {"config_hash", cfg.hash()},
              {"seed", cfg.seed},
              {"upstream", upstream},
              {"outputs", out},
              {"details", extra}};
  write_file(dir / "run.json", run.dump(2) + "\n");
  return report;
}

namespace {

// Loads a trained vanilla-architecture bundle and checks it is current.
deeponet::DeepOnetModel load_deeponet(const fs::path& family_dir, const std::string& which) {
  check_not_stale(family_dir);
  verified_outputs(family_dir);
  return deeponet::deeponet_from_bundle(deeponet::load_bundle(family_dir / which));
}

}  // namespace

json cmd_eval(const ExperimentConfig& cfg) {
  cfg.validate();
  const Paths p = cfg.resolved_paths();
  verified_outputs(p.data);
  const pde::PdeDataset test = pde::read_split(p.data, cfg.eval.split);
  const Mat all_q = output_queries(test, all_columns(test));

  std::vector<std::pair<std::string, Vec>> rows;
  json mesh = json::object();
  if (fs::exists(p.models / "vanilla" / "run.json")) {
    const auto m = load_deeponet(p.models / "vanilla", cfg.eval.checkpoint);
    rows.emplace_back("vanilla", reconstruct::rel_l2_errors(
                                     deeponet::deeponet_eval_batch(m, test.inputs, all_q), test.outputs));
  }
  if (fs::exists(p.models / "shift" / "run.json")) {
    check_not_stale(p.models / "shift");
    verified_outputs(p.models / "shift");
    const auto m = deeponet::shift_from_bundle(deeponet::load_bundle(p.models / "shift" / cfg.eval.checkpoint));
    rows.emplace_back("shift", reconstruct::rel_l2_errors(
                                   deeponet::shift_deeponet_eval_batch(m, test.inputs, all_q), test.outputs));
  }
  const fs::path coord_dir = p.models / "radaptive-coord";
  const fs::path sol_dir = p.models / "radaptive-sol";
  if (fs::exists(coord_dir / "run.json") && fs::exists(sol_dir / "run.json")) {
    deeponet::RAdaptiveSystem sys;
    sys.coord_net = load_deeponet(coord_dir, cfg.eval.checkpoint);
    sys.sol_net = load_deeponet(sol_dir, cfg.eval.checkpoint);
    const json g = read_run(coord_dir).at("details").at("grid");
    const json gs = read_run(sol_dir).at("details").at("grid");
    if (g != gs) throw FormatError("coordinate and solution nets were trained on different grids");
    const auto xi = g.at("xi").get<std::vector<double>>();
    const auto times = g.at("times").get<std::vector<double>>();
    sys.grid.xi = Eigen::Map<const Vec>(xi.data(), static_cast<Eigen::Index>(xi.size()));
    sys.grid.times = Eigen::Map<const Vec>(times.data(), static_cast<Eigen::Index>(times.size()));
    const RAdaptiveEval ev = radaptive_evaluate(sys, test, cfg.eval.eval_xi_cells);
    rows.emplace_back("radaptive", reconstruct::rel_l2_errors(ev.predictions, test.outputs));
    mesh = {{"positive_det_fraction_before_fix", ev.positive_det},
            {"monotone_fraction_before_fix", ev.monotone_before_fix},
            {"monotone_fraction_after_fix", ev.monotone_after_fix},
            {"eval_xi_cells", cfg.eval.eval_xi_cells}};
  }
  if (rows.empty()) throw InvalidArgument("no trained models found under " + p.models.string());

  std::ostringstream table, per_sample;
  table << "model,rel_l2\n";
  per_sample << "sample";
  json result = json::object();
  for (const auto& [name, errs] : rows) {
    table << name << "," << csv_number(errs.mean()) << "\n";
    per_sample << "," << name;
    result[name] = errs.mean();
  }
  per_sample << "\n";
  for (int i = 0; i < test.count(); ++i) {
    per_sample << i;
    for (const auto& [name, errs] : rows) per_sample << "," << csv_number(errs[i]);
    per_sample << "\n";
  }
  write_file(p.eval / "errors.csv", table.str());
  write_file(p.eval / "per_sample.csv", per_sample.str());
  std::vector<fs::path> outputs = {p.eval / "errors.csv", p.eval / "per_sample.csv"};
  if (!mesh.empty()) {
    write_file(p.eval / "mesh.json", mesh.dump(2) + "\n");
    outputs.push_back(p.eval / "mesh.json");
    result["mesh"] = mesh;
  }
  json upstream = json::object();
  for (const auto& fam : kFamilies) {
    const fs::path d = p.models / fam / "run.json";
    if (fs::exists(d)) upstream[d.string()] = file_hash(d);
  }
  write_run(p.eval, "eval", cfg, upstream, outputs);
  return result;
}

json cmd_analyze(const ExperimentConfig& cfg, const std::string& what) {
  cfg.validate();
  const Paths p = cfg.resolved_paths();
  const AnalysisConfig& a = cfg.analysis;
  json result;
  std::vector<fs::path> outputs;
  json upstream = json::object();

  if (what == "spectrum" || what == "tail") {
    upstream = verified_outputs(p.data);
    const json pre_files = verified_outputs(p.preprocessed);
    for (const auto& [k, v] : pre_files.items()) upstream[k] = v;
    const pde::PdeDataset raw = pde::read_split(p.data, "train");
    const auto pre = read_preprocessed(p.preprocessed, "train");
    const double dxi = pre.xi[1] - pre.xi[0];
    const auto s_raw = analysis::covariance_spectrum(raw.outputs, raw.x_grid.spacing(), "u(x)");
    const auto s_u = analysis::covariance_spectrum(pre.u, dxi, "u(xi)");
    const auto s_x = analysis::covariance_spectrum(pre.x, dxi, "x(xi)");
    if (what == "spectrum") {
      result = {{"spectra", {s_raw.to_json(), s_u.to_json(), s_x.to_json()}}};
      write_file(p.analysis / "spectrum.json", result.dump(2) + "\n");
      outputs.push_back(p.analysis / "spectrum.json");
    } else {
      std::ostringstream csv;
      csv << "n,raw_u,adaptive_u,adaptive_x\n";
      result = json::array();
      for (int n : a.tail_ns) {
        const double r = analysis::optimal_error_tail(s_raw, n);
        const double u = analysis::optimal_error_tail(s_u, n);
        const double x = analysis::optimal_error_tail(s_x, n);
        csv << n << "," << csv_number(r) << "," << csv_number(u) << "," << csv_number(x) << "\n";
        result.push_back({{"n", n}, {"raw_u", r}, {"adaptive_u", u}, {"adaptive_x", x}});
      }
      write_file(p.analysis / "tails.csv", csv.str());
      outputs.push_back(p.analysis / "tails.csv");
    }
  } else if (what == "appendixb" || what == "fem-rate") {
    std::vector<double> ns, adaptive, uniform, smooth;
    for (int n : a.ns) {
      ns.push_back(n);
      const double delta = std::pow(static_cast<double>(n), -3.0);
      adaptive.push_back(analysis::appendixB_construct(delta, n, a.zeta, 0.0, a.quadrature_cells).error);
      uniform.push_back(analysis::box_uniform_interp_error(a.zeta, n, a.quadrature_cells));
      const int m = a.quadrature_cells;
      Vec s(m + 1);
      for (int i = 0; i <= m; ++i) s[i] = std::sin(2.0 * std::numbers::pi * i / m);
      smooth.push_back(analysis::fem_uniform_interp_error(s, 0.0, 1.0, n));
    }
    std::ostringstream csv;
    if (what == "appendixb") {
      csv << "n,delta,adaptive_error,uniform_error\n";
      for (std::size_t i = 0; i < ns.size(); ++i)
        csv << ns[i] << "," << csv_number(std::pow(ns[i], -3.0)) << "," << csv_number(adaptive[i])
            << "," << csv_number(uniform[i]) << "\n";
      result = {{"adaptive", analysis::rate_fit(ns, adaptive).to_json()},
                {"uniform", analysis::rate_fit(ns, uniform).to_json()}};
    } else {
      csv << "n,box_error,sine_error\n";
      for (std::size_t i = 0; i < ns.size(); ++i)
        csv << ns[i] << "," << csv_number(uniform[i]) << "," << csv_number(smooth[i]) << "\n";
      result = {{"box", analysis::rate_fit(ns, uniform).to_json()},
                {"sine", analysis::rate_fit(ns, smooth).to_json()}};
    }
    const std::string stem = what == "appendixb" ? "appendixb" : "fem_rate";
    write_file(p.analysis / (stem + ".csv"), csv.str());
    write_file(p.analysis / (stem + ".json"), result.dump(2) + "\n");
    outputs = {p.analysis / (stem + ".csv"), p.analysis / (stem + ".json")};
  } else {
    throw InvalidArgument("unknown analysis '" + what + "' (spectrum | tail | appendixb | fem-rate)");
  }
  // Several analyses share the directory; keep one run file per analysis.
  json out = json::object();
  for (const auto& f : outputs) out[f.filename().string()] = file_hash(f);
  json run = {{"stage", "analyze"},
              {"analysis", what},
              {"tool_version", kToolVersion},
              {"config_hash", cfg.hash()},
              {"seed", cfg.seed},
              {"upstream", upstream},
              {"outputs", out}};
  write_file(p.analysis / ("run_" + what + ".json"), run.dump(2) + "\n");
  return result;
}

}  // namespace radon::experiment
