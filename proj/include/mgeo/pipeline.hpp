#pragma once

// End-to-end wiring: run configuration, dataset → LTSA → autoencoder →
// curve stages, endpoint selection, ground-truth lengths, JSON reports and
// the loss-combination ablation.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgeo/autoencoder.hpp"
#include "mgeo/curve.hpp"
#include "mgeo/datasets.hpp"
#include "mgeo/decoder.hpp"
#include "mgeo/interpolation.hpp"
#include "mgeo/losses.hpp"
#include "mgeo/ltsa.hpp"
#include "mgeo/oracle.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

using nlohmann::json;

struct DataConfig {
  std::string manifold = "semisphere";  // semisphere | swissroll
  std::size_t n = 2000;
  double radius = 1.0;                  // semi-sphere only
  SwissRollParams swissroll;
};

struct RunConfig {
  DataConfig data;
  LtsaConfig ltsa;
  AeTrainConfig ae;
  CurveTrainConfig curve;
  // Endpoint sample indices; chosen automatically when absent.
  std::optional<std::pair<std::size_t, std::size_t>> endpoints;
  EvalConfig eval;
  std::uint64_t seed = 1;
};

// Stage seeds are derived from the run seed so a single number pins the run.
inline std::uint64_t data_seed(const RunConfig& c) { return derive_seed(c.seed, 11); }
inline std::uint64_t ae_seed(const RunConfig& c) { return derive_seed(c.seed, 12); }
inline std::uint64_t curve_seed(const RunConfig& c) { return derive_seed(c.seed, 13); }

namespace detail {

// Reads keys out of a JSON object and rejects anything it was not asked for.
class Section {
public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw std::invalid_argument("config: section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  std::optional<Section> sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), name_.empty() ? key : name_ + "." + key);
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) const { return j_.at(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw std::invalid_argument("config: unknown key '" + (name_.empty() ? "" : name_ + ".") + it.key() + "'");
      }
    }
  }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data"] = {{"manifold", c.data.manifold},
               {"n", c.data.n},
               {"radius", c.data.radius},
               {"swissroll",
                {{"t_min", c.data.swissroll.t_min},
                 {"t_max", c.data.swissroll.t_max},
                 {"height", c.data.swissroll.height},
                 {"radius_scale", c.data.swissroll.radius_scale}}}};
  j["ltsa"] = {{"k", c.ltsa.k}, {"d", c.ltsa.d}, {"eig_floor", c.ltsa.eig_floor}, {"threads", c.ltsa.threads}};
  j["ae"] = {{"latent_dim", c.ae.latent_dim}, {"hidden", c.ae.hidden},
             {"activation", to_string(c.ae.activation)}, {"epochs", c.ae.epochs},
             {"batch_size", c.ae.batch_size}, {"lr", c.ae.lr}, {"lr_final", c.ae.lr_final},
             {"w_rec", c.ae.w_rec}, {"w_lat", c.ae.w_lat}, {"w_dec", c.ae.w_dec},
             {"squared", c.ae.squared}};
  j["curve"] = {{"n_samples", c.curve.n_samples}, {"dt", c.curve.dt},
                {"weights", {{"conspeed", c.curve.weights.conspeed}, {"geo", c.curve.weights.geo},
                             {"min", c.curve.weights.min}}},
                {"epochs", c.curve.epochs}, {"lr", c.curve.lr},
                {"resample_random", c.curve.resample_random},
                {"endpoints", c.endpoints ? json::array({c.endpoints->first, c.endpoints->second}) : json(nullptr)}};
  j["eval"] = {{"n_points", c.eval.n_points}, {"dt", c.eval.dt}};
  return j;
}

inline void validate(const RunConfig& c) {
  if (c.data.manifold != "semisphere" && c.data.manifold != "swissroll") {
    throw std::invalid_argument("config: data.manifold must be 'semisphere' or 'swissroll'");
  }
  if (c.data.n == 0) throw std::invalid_argument("n must be ≥ 1");
  if (c.data.manifold == "swissroll") c.data.swissroll.validate();
  if (!(c.data.radius > 0.0)) throw std::invalid_argument("config: data.radius must be > 0");
  if (c.ltsa.d != c.ae.latent_dim) throw std::invalid_argument("config: ltsa.d must equal ae.latent_dim");
  c.ae.validate();
  c.curve.weights.validate();
  if (c.curve.n_samples == 0) throw std::invalid_argument("config: curve.n_samples must be >= 1");
  if (!(c.curve.dt > 0.0) || !(c.eval.dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
  if (!(c.curve.lr > 0.0)) throw std::invalid_argument("config: curve.lr must be > 0");
  if (c.eval.n_points == 0) throw std::invalid_argument("config: eval.n_points must be >= 1");
}

inline RunConfig run_config_from_json(const json& root) {
  RunConfig c;
  detail::Section top(root, "");
  top.get("seed", c.seed);
  if (auto s = top.sub("data")) {
    s->get("manifold", c.data.manifold);
    s->get("n", c.data.n);
    s->get("radius", c.data.radius);
    if (auto r = s->sub("swissroll")) {
      r->get("t_min", c.data.swissroll.t_min);
      r->get("t_max", c.data.swissroll.t_max);
      r->get("height", c.data.swissroll.height);
      r->get("radius_scale", c.data.swissroll.radius_scale);
      r->finish();
    }
    s->finish();
  }
  if (auto s = top.sub("ltsa")) {
    s->get("k", c.ltsa.k);
    s->get("d", c.ltsa.d);
    s->get("eig_floor", c.ltsa.eig_floor);
    s->get("threads", c.ltsa.threads);
    s->finish();
  }
  if (auto s = top.sub("ae")) {
    s->get("latent_dim", c.ae.latent_dim);
    s->get("hidden", c.ae.hidden);
    std::string act = to_string(c.ae.activation);
    s->get("activation", act);
    c.ae.activation = activation_from_string(act);
    s->get("epochs", c.ae.epochs);
    s->get("batch_size", c.ae.batch_size);
    s->get("lr", c.ae.lr);
    s->get("lr_final", c.ae.lr_final);
    s->get("w_rec", c.ae.w_rec);
    s->get("w_lat", c.ae.w_lat);
    s->get("w_dec", c.ae.w_dec);
    s->get("squared", c.ae.squared);
    s->finish();
  }
  if (auto s = top.sub("curve")) {
    s->get("n_samples", c.curve.n_samples);
    s->get("dt", c.curve.dt);
    s->get("epochs", c.curve.epochs);
    s->get("lr", c.curve.lr);
    s->get("resample_random", c.curve.resample_random);
    if (auto w = s->sub("weights")) {
      w->get("conspeed", c.curve.weights.conspeed);
      w->get("geo", c.curve.weights.geo);
      w->get("min", c.curve.weights.min);
      w->finish();
    }
    if (s->has("endpoints") && !s->at("endpoints").is_null()) {
      std::vector<std::size_t> e;
      s->get("endpoints", e);
      if (e.size() != 2) throw std::invalid_argument("config: curve.endpoints must hold two indices");
      c.endpoints = std::make_pair(e[0], e[1]);
    }
    s->finish();
  }
  if (auto s = top.sub("eval")) {
    s->get("n_points", c.eval.n_points);
    s->get("dt", c.eval.dt);
    s->finish();
  }
  top.finish();
  validate(c);
  c.ae.seed = ae_seed(c);
  c.curve.seed = curve_seed(c);
  return c;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path + "': invalid JSON: " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json(load_json(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

// MGEO_SEED replaces the run seed, MGEO_THREADS the k-NN thread count.
inline void apply_env_overrides(RunConfig& c) {
  if (const char* s = std::getenv("MGEO_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw std::invalid_argument("MGEO_SEED must be an unsigned integer");
    c.seed = v;
    c.ae.seed = ae_seed(c);
    c.curve.seed = curve_seed(c);
  }
  if (const char* s = std::getenv("MGEO_THREADS"); s && *s) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(s, &end, 10);
    if (*end != '\0' || v == 0) throw std::invalid_argument("MGEO_THREADS must be a positive integer");
    c.ltsa.threads = static_cast<unsigned>(v);
  }
}

// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_hash(const std::string& path) { return fnv1a_hex(read_file(path)); }

// ---------------------------------------------------------------------------
// Stages

inline PointCloud make_cloud(const DataConfig& d, std::uint64_t seed) {
  if (d.manifold == "semisphere") return sample_semisphere(d.n, d.radius, seed);
  if (d.manifold == "swissroll") return sample_swissroll(d.n, d.swissroll, seed);
  throw std::invalid_argument("unknown manifold '" + d.manifold + "'");
}

namespace detail {

inline std::size_t nearest_row(const Matrix& pts, std::span<const double> target) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    const double d = squared_distance(pts.row(i), target);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Semi-sphere: samples nearest two directions at 30° elevation whose great
// circle spans 60°. Swiss roll: samples nearest 5% and 95% of the unrolled
// length at mid height.
inline std::pair<std::size_t, std::size_t> select_endpoints(const PointCloud& cloud, const DataConfig& d) {
  if (d.manifold == "semisphere") {
    const double el = std::numbers::pi / 6.0;
    const double half = 0.5 * std::acos((0.5 - std::sin(el) * std::sin(el)) / (std::cos(el) * std::cos(el)));
    const double r = d.radius;
    const std::vector<double> p0{r * std::cos(el) * std::cos(-half), r * std::cos(el) * std::sin(-half), r * std::sin(el)};
    const std::vector<double> p1{r * std::cos(el) * std::cos(half), r * std::cos(el) * std::sin(half), r * std::sin(el)};
    return {detail::nearest_row(cloud.points, p0), detail::nearest_row(cloud.points, p1)};
  }
  if (!cloud.intrinsic) throw std::invalid_argument("select_endpoints: swiss-roll cloud lacks intrinsic coordinates");
  const double total = swissroll_arclength(d.swissroll.t_max, d.swissroll);
  const std::vector<double> q0{0.05 * total, 0.5 * d.swissroll.height};
  const std::vector<double> q1{0.95 * total, 0.5 * d.swissroll.height};
  return {detail::nearest_row(*cloud.intrinsic, q0), detail::nearest_row(*cloud.intrinsic, q1)};
}

// Exact manifold distance between two samples.
inline double oracle_length(const PointCloud& cloud, const DataConfig& d, std::size_t i, std::size_t j) {
  if (d.manifold == "semisphere") return great_circle(cloud.points.row(i), cloud.points.row(j), 1).length;
  std::vector<double> q0, q1;
  if (cloud.intrinsic) {
    q0.assign(cloud.intrinsic->row(i).begin(), cloud.intrinsic->row(i).end());
    q1.assign(cloud.intrinsic->row(j).begin(), cloud.intrinsic->row(j).end());
  } else {
    q0 = swissroll_intrinsic(cloud.points.row(i), d.swissroll);
    q1 = swissroll_intrinsic(cloud.points.row(j), d.swissroll);
  }
  return swissroll_geodesic(q0, q1, d.swissroll);
}

inline CubicCurve chord_between(const AeModel& ae, std::span<const double> x0, std::span<const double> x1) {
  if (x0.size() != ae.ambient_dim() || x1.size() != ae.ambient_dim()) {
    throw std::invalid_argument("endpoint has dimension " + std::to_string(x0.size()) + ", model expects " +
                                std::to_string(ae.ambient_dim()));
  }
  Matrix x(2, x0.size());
  std::copy(x0.begin(), x0.end(), x.row(0).begin());
  std::copy(x1.begin(), x1.end(), x.row(1).begin());
  const Matrix z = encode(ae, x);
  return CubicCurve(std::vector<double>(z.row(0).begin(), z.row(0).end()),
                    std::vector<double>(z.row(1).begin(), z.row(1).end()));
}

inline json to_json(const GeodesicReport& r) {
  json j = {{"polyline_length", r.polyline_length},
            {"chord_length", r.chord_length},
            {"uniformity_cv", r.uniformity_cv},
            {"tangential_residual", r.tangential_residual},
            {"tangential_excluded", r.tangential_excluded},
            {"geodesic_loss", r.geodesic_loss},
            {"on_manifold_dist", r.on_manifold_dist},
            {"eval_points", r.eval_points}};
  j["oracle_length"] = r.oracle_length ? json(*r.oracle_length) : json(nullptr);
  j["length_ratio"] = r.length_ratio ? json(*r.length_ratio) : json(nullptr);
  return j;
}

inline json to_json(const LossBreakdown& l) {
  return {{"conspeed", l.conspeed}, {"geo", l.geo}, {"min", l.min}, {"total", l.total}};
}

inline void write_curve_history_csv(const std::vector<LossBreakdown>& h, const std::string& path) {
  std::ostringstream os;
  os << "epoch,conspeed,geo,min,total\n";
  for (std::size_t e = 0; e < h.size(); ++e)
    os << e << ',' << format_double(h[e].conspeed) << ',' << format_double(h[e].geo) << ','
       << format_double(h[e].min) << ',' << format_double(h[e].total) << '\n';
  write_file(path, os.str());
}

inline void write_ae_history_csv(const std::vector<AeLossBreakdown>& h, const std::string& path) {
  std::ostringstream os;
  os << "epoch,rec,lat,dec,total\n";
  for (std::size_t e = 0; e < h.size(); ++e)
    os << e << ',' << format_double(h[e].rec) << ',' << format_double(h[e].lat) << ','
       << format_double(h[e].dec) << ',' << format_double(h[e].total) << '\n';
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Whole run

struct RunResult {
  PointCloud cloud;
  Embedding embedding;
  AeTrainResult ae;
  std::size_t i0 = 0, i1 = 0;
  double oracle = 0.0;
  CurveTrainResult curve;
  GeodesicReport report;
};

struct PreparedModel {
  PointCloud cloud;
  Embedding embedding;
  AeTrainResult ae;
  std::size_t i0 = 0, i1 = 0;
  double oracle = 0.0;
};

inline PreparedModel prepare_model(const RunConfig& cfg) {
  validate(cfg);
  PreparedModel p;
  p.cloud = make_cloud(cfg.data, data_seed(cfg));
  p.embedding = ltsa_embed(p.cloud, cfg.ltsa);
  p.ae = train_ae(p.cloud, p.embedding, cfg.ae);
  std::tie(p.i0, p.i1) = cfg.endpoints ? *cfg.endpoints : select_endpoints(p.cloud, cfg.data);
  if (p.i0 >= p.cloud.size() || p.i1 >= p.cloud.size()) throw std::invalid_argument("endpoint index out of range");
  p.oracle = oracle_length(p.cloud, cfg.data, p.i0, p.i1);
  return p;
}

inline CurveTrainResult fit_curve(const PreparedModel& p, const CurveTrainConfig& cc) {
  const MlpDecoder dec(p.ae.model.decoder);
  return train_curve(dec, chord_between(p.ae.model, p.cloud.points.row(p.i0), p.cloud.points.row(p.i1)), cc);
}

inline GeodesicReport evaluate(const PreparedModel& p, const CubicCurve& c, const EvalConfig& e) {
  const MlpDecoder dec(p.ae.model.decoder);
  return evaluate_curve(dec, c, p.cloud.points, e, p.oracle);
}

inline RunResult run_pipeline(const RunConfig& cfg) {
  PreparedModel p = prepare_model(cfg);
  RunResult r;
  r.curve = fit_curve(p, cfg.curve);
  r.report = evaluate(p, r.curve.curve, cfg.eval);
  r.cloud = std::move(p.cloud);
  r.embedding = std::move(p.embedding);
  r.ae = std::move(p.ae);
  r.i0 = p.i0;
  r.i1 = p.i1;
  r.oracle = p.oracle;
  return r;
}

inline json run_report(const RunConfig& cfg, const RunResult& r) {
  return {{"config", to_json(cfg)},
          {"endpoints", {r.i0, r.i1}},
          {"ae_reconstruction_rmse", r.ae.reconstruction_rmse},
          {"final_loss", r.curve.history.empty() ? json(nullptr) : to_json(r.curve.history.back())},
          {"report", to_json(r.report)}};
}

// ---------------------------------------------------------------------------
// Ablation over loss combinations

struct AblationRow {
  std::string label;
  double length = 0.0;
  std::optional<double> uniformity_cv;
  std::optional<double> tangential_residual;
};

struct AblationCombo {
  const char* label;
  bool conspeed, geo, min;
};

inline constexpr AblationCombo kAblationCombos[] = {
    {"conspeed", true, false, false},   {"min", false, false, true},
    {"conspeed+min", true, false, true}, {"conspeed+geo", true, true, false},
    {"conspeed+geo+min", true, true, true},
};

// Rows in the order: linear, the five trained combinations, real geodesic.
// Trained rows share the model, endpoints and seeds and zero the unused
// weights of cfg.curve.weights.
inline std::vector<AblationRow> run_ablation(const RunConfig& cfg, const PreparedModel& p) {
  std::vector<AblationRow> rows;
  const MlpDecoder dec(p.ae.model.decoder);
  const CubicCurve chord = chord_between(p.ae.model, p.cloud.points.row(p.i0), p.cloud.points.row(p.i1));
  const GeodesicReport lin = evaluate_curve(dec, chord, p.cloud.points, cfg.eval, p.oracle);
  rows.push_back({"linear", lin.polyline_length, lin.uniformity_cv, lin.tangential_residual});
  for (const auto& combo : kAblationCombos) {
    CurveTrainConfig cc = cfg.curve;
    cc.weights.conspeed = combo.conspeed ? cfg.curve.weights.conspeed : 0.0;
    cc.weights.geo = combo.geo ? cfg.curve.weights.geo : 0.0;
    cc.weights.min = combo.min ? cfg.curve.weights.min : 0.0;
    const CurveTrainResult res = train_curve(dec, chord, cc);
    const GeodesicReport rep = evaluate_curve(dec, res.curve, p.cloud.points, cfg.eval, p.oracle);
    rows.push_back({combo.label, rep.polyline_length, rep.uniformity_cv, rep.tangential_residual});
  }
  rows.push_back({"real geodesic", p.oracle, std::nullopt, std::nullopt});
  return rows;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "loss_combo,length,uniformity_cv,tangential_residual\n";
  for (const auto& r : rows) {
    os << r.label << ',' << format_double(r.length) << ','
       << (r.uniformity_cv ? format_double(*r.uniformity_cv) : "") << ','
       << (r.tangential_residual ? format_double(*r.tangential_residual) : "") << '\n';
  }
  return os.str();
}

// Matplotlib script drawing the training cloud and a decoded curve.
inline std::string plot_script(const std::string& cloud_csv, const std::string& curve_csv, const std::string& png) {
  std::ostringstream os;
  os << "import numpy as np\n"
        "import matplotlib\n"
        "matplotlib.use('Agg')\n"
        "import matplotlib.pyplot as plt\n\n"
     << "cloud = np.loadtxt(" << json(cloud_csv).dump() << ", delimiter=',', skiprows=1)\n"
     << "curve = np.loadtxt(" << json(curve_csv).dump() << ", delimiter=',', skiprows=1)\n"
     << "fig = plt.figure(figsize=(6, 6))\n"
        "if cloud.shape[1] >= 3:\n"
        "    ax = fig.add_subplot(projection='3d')\n"
        "    ax.scatter(cloud[:, 0], cloud[:, 1], cloud[:, 2], s=1, alpha=0.2)\n"
        "    ax.plot(curve[:, 0], curve[:, 1], curve[:, 2], 'r.-')\n"
        "else:\n"
        "    ax = fig.add_subplot()\n"
        "    ax.scatter(cloud[:, 0], cloud[:, 1], s=1, alpha=0.2)\n"
        "    ax.plot(curve[:, 0], curve[:, 1], 'r.-')\n"
     << "fig.savefig(" << json(png).dump() << ", dpi=150)\n";
  return os.str();
}

}  // namespace mgeo
