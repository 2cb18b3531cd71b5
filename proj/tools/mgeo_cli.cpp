// mgeo command-line driver.
//
//   mgeo gen-data    --manifold semisphere|swissroll --n N --seed S --out cloud.csv
//   mgeo embed       --data cloud.csv --out embedding.csv
//   mgeo train-ae    --data cloud.csv --embedding embedding.csv --out ae.json
//   mgeo train-curve --model ae.json (--data cloud.csv --from I --to J | --x0 .. --x1 ..) --out curve.json
//   mgeo eval        --model ae.json --curve curve.json --data cloud.csv --oracle ... --out report.json
//   mgeo ablate      --config run.json --out table.csv
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgeo/mgeo.hpp"

using namespace mgeo;

namespace {

// Bad flags or values supplied by the user.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string config;
  // gen-data
  std::string manifold;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> radius;
  // shared paths
  std::string data, embedding, model, curve, out, history, curve_out, plot_script;
  // embed
  std::optional<std::size_t> k, d;
  // train-ae
  std::optional<std::size_t> ae_epochs;
  // train-curve
  std::optional<std::size_t> from, to;
  std::vector<double> x0, x1;
  std::vector<double> weights;
  std::optional<std::size_t> curve_epochs;
  bool resample_random = false;
  // eval
  std::string oracle = "none";
  std::optional<std::size_t> graph_k;
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load_run_config(o.config);
  apply_env_overrides(cfg);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.ae.seed = ae_seed(cfg);
    cfg.curve.seed = curve_seed(cfg);
  }
  if (!o.manifold.empty()) cfg.data.manifold = o.manifold;
  if (o.n) {
    if (*o.n == 0) throw UsageError("n must be ≥ 1");
    cfg.data.n = *o.n;
  }
  if (o.radius) cfg.data.radius = *o.radius;
  if (o.k) cfg.ltsa.k = *o.k;
  if (o.d) {
    cfg.ltsa.d = *o.d;
    cfg.ae.latent_dim = *o.d;
  }
  if (o.ae_epochs) cfg.ae.epochs = *o.ae_epochs;
  if (o.curve_epochs) cfg.curve.epochs = *o.curve_epochs;
  if (o.resample_random) cfg.curve.resample_random = true;
  if (!o.weights.empty()) {
    if (o.weights.size() != 3) throw UsageError("--weights takes three values: conspeed geo min");
    cfg.curve.weights = {o.weights[0], o.weights[1], o.weights[2]};
  }
  validate(cfg);
  return cfg;
}

json input_entry(const std::string& path) { return {{"path", path}, {"fnv1a", file_hash(path)}}; }

PointCloud load_cloud(const std::string& path) {
  PointCloud c = load_csv(path);
  if (c.dim() < 2) throw std::runtime_error("'" + path + "': need at least 2 columns, found " + std::to_string(c.dim()));
  return c;
}

AeModel load_model(const std::string& path) {
  try {
    return ae_from_json(load_json(path));
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << c.data.manifold << " n=" << c.data.n << " seed=" << c.seed;
  return os.str();
}

int cmd_gen_data(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  // An explicit --seed names the sampler stream directly.
  const std::uint64_t seed = o.seed ? *o.seed : data_seed(cfg);
  const PointCloud cloud = make_cloud(cfg.data, seed);
  save_csv(cloud, o.out);
  std::cout << "gen-data: wrote " << cloud.size() << " x " << cloud.dim() << " " << cfg.data.manifold
            << " points (seed " << seed << ") to " << o.out << "\n";
  return 0;
}

int cmd_embed(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const PointCloud cloud = load_cloud(o.data);
  const Embedding e = ltsa_embed(cloud, cfg.ltsa);
  save_matrix_csv(e.coords, o.out, "z");
  std::cout << "embed: " << cloud.size() << " points -> " << e.coords.cols() << "-D LTSA chart (k=" << cfg.ltsa.k
            << ") written to " << o.out << "\n";
  return 0;
}

int cmd_train_ae(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const PointCloud cloud = load_cloud(o.data);
  Embedding e;
  e.coords = load_matrix_csv(o.embedding);
  if (e.coords.rows() != cloud.size()) {
    throw std::runtime_error("'" + o.embedding + "' has " + std::to_string(e.coords.rows()) + " rows but '" + o.data +
                             "' has " + std::to_string(cloud.size()));
  }
  if (e.coords.cols() != cfg.ae.latent_dim) {
    throw std::runtime_error("'" + o.embedding + "' has " + std::to_string(e.coords.cols()) +
                             " columns, expected latent_dim " + std::to_string(cfg.ae.latent_dim));
  }
  const AeTrainResult r = train_ae(cloud, e, cfg.ae);
  json j = to_json(r.model);
  j["config"] = to_json(cfg);
  j["inputs"] = {{"data", input_entry(o.data)}, {"embedding", input_entry(o.embedding)}};
  j["reconstruction_rmse"] = r.reconstruction_rmse;
  write_file(o.out, j.dump(1) + "\n");
  if (!o.history.empty()) write_ae_history_csv(r.history, o.history);
  std::cout << "train-ae: " << cfg.ae.epochs << " epochs, reconstruction RMSE " << r.reconstruction_rmse << ", model "
            << o.out << "\n";
  return 0;
}

int cmd_train_curve(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const AeModel ae = load_model(o.model);
  std::vector<double> x0 = o.x0, x1 = o.x1;
  json endpoints = nullptr;
  json inputs = {{"model", input_entry(o.model)}};
  if (o.from || o.to) {
    if (!o.from || !o.to) throw UsageError("--from and --to must be given together");
    if (o.data.empty()) throw UsageError("--from/--to need --data");
    if (!x0.empty() || !x1.empty()) throw UsageError("give endpoints as indices or as vectors, not both");
    const PointCloud cloud = load_cloud(o.data);
    for (std::size_t idx : {*o.from, *o.to})
      if (idx >= cloud.size())
        throw UsageError("endpoint index " + std::to_string(idx) + " out of range for '" + o.data + "' (" +
                         std::to_string(cloud.size()) + " rows)");
    x0.assign(cloud.points.row(*o.from).begin(), cloud.points.row(*o.from).end());
    x1.assign(cloud.points.row(*o.to).begin(), cloud.points.row(*o.to).end());
    endpoints = {*o.from, *o.to};
    inputs["data"] = input_entry(o.data);
  } else if (x0.empty() || x1.empty()) {
    throw UsageError("endpoints required: --from/--to with --data, or --x0/--x1");
  }
  if (x0.size() != ae.ambient_dim() || x1.size() != ae.ambient_dim()) {
    throw std::runtime_error("endpoint dimension " + std::to_string(x0.size()) + " does not match model '" + o.model +
                             "' (ambient dimension " + std::to_string(ae.ambient_dim()) + ")");
  }
  const MlpDecoder dec(ae.decoder);
  const CurveTrainResult r = train_curve(dec, chord_between(ae, x0, x1), cfg.curve);
  json j = {{"format", "mgeo-curve"}, {"version", 1},        {"curve", to_json(r.curve)}, {"x0", x0},
            {"x1", x1},               {"endpoints", endpoints}, {"config", to_json(cfg)},  {"inputs", inputs},
            {"final_loss", r.history.empty() ? json(nullptr) : to_json(r.history.back())}};
  write_file(o.out, j.dump(1) + "\n");
  if (!o.history.empty()) write_curve_history_csv(r.history, o.history);
  std::cout << "train-curve: " << cfg.curve.epochs << " epochs";
  if (!r.history.empty()) std::cout << ", final loss " << r.history.back().total;
  std::cout << ", curve " << o.out << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const AeModel ae = load_model(o.model);
  const json cj = load_json(o.curve);
  CubicCurve curve;
  std::vector<double> x0, x1;
  try {
    if (cj.value("format", "") != "mgeo-curve") throw std::runtime_error("not an mgeo-curve file");
    curve = curve_from_json(cj.at("curve"));
    x0 = cj.at("x0").get<std::vector<double>>();
    x1 = cj.at("x1").get<std::vector<double>>();
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + o.curve + "': " + e.what());
  }
  if (curve.dim() != ae.latent_dim()) {
    throw std::runtime_error("'" + o.curve + "' has latent dimension " + std::to_string(curve.dim()) + " but '" +
                             o.model + "' has " + std::to_string(ae.latent_dim()));
  }
  const PointCloud cloud = load_cloud(o.data);
  if (cloud.dim() != ae.ambient_dim()) {
    throw std::runtime_error("'" + o.data + "' has " + std::to_string(cloud.dim()) + " columns but '" + o.model +
                             "' expects " + std::to_string(ae.ambient_dim()));
  }

  std::optional<double> oracle;
  if (o.oracle == "greatcircle") {
    oracle = great_circle(x0, x1, 1).length;
  } else if (o.oracle == "swissroll") {
    oracle = swissroll_geodesic(swissroll_intrinsic(x0, cfg.data.swissroll), swissroll_intrinsic(x1, cfg.data.swissroll),
                                cfg.data.swissroll);
  } else if (o.oracle == "graph") {
    const std::size_t i = detail::nearest_row(cloud.points, x0), j = detail::nearest_row(cloud.points, x1);
    oracle = knn_graph_shortest_path(cloud.points, o.graph_k.value_or(cfg.ltsa.k), i, j);
  } else if (o.oracle != "none") {
    throw UsageError("--oracle must be greatcircle, swissroll, graph or none");
  }

  const MlpDecoder dec(ae.decoder);
  const GeodesicReport rep = evaluate_curve(dec, curve, cloud.points, cfg.eval, oracle);
  json j = {{"config", to_json(cfg)},
            {"oracle", o.oracle},
            {"trained_with", {{"model", load_json(o.model).value("config", json(nullptr))},
                              {"curve", cj.value("config", json(nullptr))}}},
            {"inputs", {{"model", input_entry(o.model)}, {"curve", input_entry(o.curve)}, {"data", input_entry(o.data)}}},
            {"report", to_json(rep)}};
  write_file(o.out, j.dump(2) + "\n");
  if (!o.curve_out.empty()) {
    save_matrix_csv(decoded_curve(dec, curve, cfg.eval.n_points), o.curve_out, "x");
    if (!o.plot_script.empty()) write_file(o.plot_script, plot_script(o.data, o.curve_out, o.curve_out + ".png"));
  } else if (!o.plot_script.empty()) {
    throw UsageError("--plot-script needs --curve-out");
  }
  std::cout << "eval: length " << rep.polyline_length;
  if (rep.length_ratio) std::cout << " (oracle " << *rep.oracle_length << ", ratio " << *rep.length_ratio << ")";
  std::cout << ", uniformity_cv " << rep.uniformity_cv << ", tangential_residual " << rep.tangential_residual
            << "; report " << o.out << "\n";
  return 0;
}

int cmd_ablate(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  std::cout << "ablate: " << describe(cfg) << "\n";
  const PreparedModel p = prepare_model(cfg);
  const auto rows = run_ablation(cfg, p);
  write_file(o.out, ablation_csv(rows));
  for (const auto& r : rows) std::cout << "  " << r.label << ": " << r.length << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic interpolation with a geometry-regularised autoencoder"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Run configuration JSON")->check(CLI::ExistingFile);
  };

  auto* gen = app.add_subcommand("gen-data", "Sample a point cloud");
  gen->add_option("--manifold", o.manifold, "semisphere or swissroll")
      ->check(CLI::IsMember({"semisphere", "swissroll"}));
  gen->add_option("--n", o.n, "Number of points");
  gen->add_option("--seed", o.seed, "Sampler seed");
  gen->add_option("--radius", o.radius, "Semi-sphere radius");
  gen->add_option("--out", o.out, "Output CSV")->required();
  add_config(gen);

  auto* emb = app.add_subcommand("embed", "LTSA embedding of a cloud");
  emb->add_option("--data", o.data, "Cloud CSV")->required();
  emb->add_option("--k", o.k, "Neighbours per patch");
  emb->add_option("--d", o.d, "Target dimension");
  emb->add_option("--out", o.out, "Embedding CSV")->required();
  add_config(emb);

  auto* tae = app.add_subcommand("train-ae", "Train the autoencoder");
  tae->add_option("--data", o.data, "Cloud CSV")->required();
  tae->add_option("--embedding", o.embedding, "Embedding CSV")->required();
  tae->add_option("--epochs", o.ae_epochs, "Training epochs");
  tae->add_option("--seed", o.seed, "Run seed");
  tae->add_option("--out", o.out, "Checkpoint JSON")->required();
  tae->add_option("--history", o.history, "Per-epoch loss CSV");
  add_config(tae);

  auto* tc = app.add_subcommand("train-curve", "Fit a cubic latent curve between two endpoints");
  tc->add_option("--model", o.model, "Autoencoder checkpoint")->required();
  tc->add_option("--data", o.data, "Cloud CSV (for --from/--to)");
  tc->add_option("--from", o.from, "Start point index");
  tc->add_option("--to", o.to, "End point index");
  tc->add_option("--x0", o.x0, "Start point coordinates")->delimiter(',');
  tc->add_option("--x1", o.x1, "End point coordinates")->delimiter(',');
  tc->add_option("--weights", o.weights, "Loss weights conspeed,geo,min")->delimiter(',');
  tc->add_option("--epochs", o.curve_epochs, "Training epochs");
  tc->add_flag("--resample-random", o.resample_random, "Redraw interior sample points every epoch");
  tc->add_option("--seed", o.seed, "Run seed");
  tc->add_option("--out", o.out, "Curve JSON")->required();
  tc->add_option("--history", o.history, "Per-epoch loss CSV");
  add_config(tc);

  auto* ev = app.add_subcommand("eval", "Evaluate a trained curve");
  ev->add_option("--model", o.model, "Autoencoder checkpoint")->required();
  ev->add_option("--curve", o.curve, "Curve JSON")->required();
  ev->add_option("--data", o.data, "Training cloud CSV")->required();
  ev->add_option("--oracle", o.oracle, "greatcircle, swissroll, graph or none");
  ev->add_option("--graph-k", o.graph_k, "Neighbours for the graph oracle");
  ev->add_option("--out", o.out, "Report JSON")->required();
  ev->add_option("--curve-out", o.curve_out, "Decoded curve CSV");
  ev->add_option("--plot-script", o.plot_script, "Write a matplotlib script for the decoded curve");
  add_config(ev);

  auto* ab = app.add_subcommand("ablate", "Loss-combination ablation table");
  ab->add_option("--out", o.out, "Table CSV")->required();
  ab->add_option("--seed", o.seed, "Run seed");
  add_config(ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_gen_data(o);
    if (*emb) return cmd_embed(o);
    if (*tae) return cmd_train_ae(o);
    if (*tc) return cmd_train_curve(o);
    if (*ev) return cmd_eval(o);
    if (*ab) return cmd_ablate(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
