// vesselcast command-line tool: synthetic fleets, AIS preprocessing, model
// training, evaluation against reference baselines, and scene risk
// simulation. Every command writes a manifest with its resolved
// configuration and input digests; identical inputs reproduce identical
// output bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vesselcast/vesselcast.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vesselcast;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// exit codes, one per error family
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kSchema = 4,
  kEmptyDataset = 5,
  kInvalidInput = 6,
  kState = 7,
};

struct EmptyDatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& bytes) {
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// FNV-1a 64-bit content digest for provenance records
std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json load_json_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw SchemaError("bad json in " + path + ": " + e.what());
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const json& run_config, const json& inputs) {
  json manifest{{"tool", "vesselcast"},
                {"version", kToolVersion},
                {"command", command},
                {"run_config", run_config},
                {"inputs", inputs}};
  spit(path, manifest.dump(2) + "\n");
}

json input_digest(const std::string& path) {
  return json{{"path", path}, {"fnv1a64", fnv1a64(slurp(path))}};
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string truth;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t vessels = 0;
  double duration_h = 0.0;
  double noise_pos_m = -1.0;
};

int run_synth(const SynthArgs& args) {
  synth::SyntheticFleetSpec spec;
  if (!args.config.empty()) spec = load_json_file(args.config).get<synth::SyntheticFleetSpec>();
  if (args.seed_set) spec.seed = args.seed;
  if (args.vessels > 0) spec.vessels = args.vessels;
  if (args.duration_h > 0.0) spec.duration_s = args.duration_h * 3600.0;
  if (args.noise_pos_m >= 0.0) spec.noise_pos_m = args.noise_pos_m;

  auto fleet = synth::generate_fleet(spec);
  spit(args.out, synth::fleet_csv(fleet));
  const std::string truth_path =
      args.truth.empty() ? args.out + ".truth.json" : args.truth;
  spit(truth_path, fleet.truth.dump(2) + "\n");

  json run_config;
  to_json(run_config, spec);
  write_manifest(args.out + ".manifest.json", "synth", run_config, json::array());
  std::cout << "synth: wrote " << fleet.records.size() << " records for "
            << fleet.truth["vessels"].size() << " vessels to " << args.out
            << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string in;
  std::string out;
  std::string config;
  unsigned workers = 1;
  std::size_t min_points = 0;
  double gap_s = 0.0;
  double min_duration_s = 0.0;
  bool no_mmsi_check = false;
};

int run_preprocess(const PreprocessArgs& args) {
  pipeline::PipelineConfig cfg;
  if (!args.config.empty()) {
    const auto j = load_json_file(args.config);
    cfg.filter.min_sog_kn = j.value("min_sog_kn", cfg.filter.min_sog_kn);
    cfg.filter.min_points = j.value("min_points", cfg.filter.min_points);
    cfg.filter.check_mmsi = j.value("check_mmsi", cfg.filter.check_mmsi);
    cfg.gap_threshold_s = j.value("gap_threshold_s", cfg.gap_threshold_s);
    cfg.interval_s = j.value("interval_s", cfg.interval_s);
    cfg.min_duration_s = j.value("min_duration_s", cfg.min_duration_s);
  }
  if (args.min_points > 0) cfg.filter.min_points = args.min_points;
  if (args.gap_s > 0.0) cfg.gap_threshold_s = args.gap_s;
  if (args.min_duration_s > 0.0) cfg.min_duration_s = args.min_duration_s;
  if (args.no_mmsi_check) cfg.filter.check_mmsi = false;

  auto parsed = ais::parse_ais_csv(args.in);
  auto [dataset, stats] = pipeline::run_pipeline(parsed.records, cfg, args.workers);
  stats.rows_parsed = parsed.records.size();
  stats.rows_skipped = parsed.rows_skipped;

  std::cout << "preprocess: " << stats.rows_parsed << " rows parsed, "
            << stats.rows_skipped << " skipped\n"
            << "  voyages: " << stats.voyages_total << " total, "
            << stats.voyages_invalid_mmsi << " rejected invalid-mmsi, "
            << stats.voyages_too_short << " rejected too-short\n"
            << "  records dropped: " << stats.duplicates_dropped
            << " duplicate-timestamp, " << stats.low_sog_dropped << " low-sog\n"
            << "  trips: " << stats.trips_total << " total, "
            << stats.trips_too_few_points << " rejected too-few-points\n"
            << "  segments: " << stats.segments_interpolated << " interpolated, "
            << stats.segments_below_min_duration << " below minimum duration, "
            << stats.segments_final << " retained\n"
            << "  points: " << stats.points_final << "\n";

  if (dataset.segments.empty())
    throw EmptyDatasetError("preprocess: no segments survived the pipeline");

  json run_config{{"min_sog_kn", cfg.filter.min_sog_kn},
                  {"min_points", cfg.filter.min_points},
                  {"check_mmsi", cfg.filter.check_mmsi},
                  {"gap_threshold_s", cfg.gap_threshold_s},
                  {"interval_s", cfg.interval_s},
                  {"min_duration_s", cfg.min_duration_s},
                  {"workers", args.workers}};
  json stats_json{{"rows_parsed", stats.rows_parsed},
                  {"rows_skipped", stats.rows_skipped},
                  {"voyages_total", stats.voyages_total},
                  {"voyages_invalid_mmsi", stats.voyages_invalid_mmsi},
                  {"voyages_too_short", stats.voyages_too_short},
                  {"duplicates_dropped", stats.duplicates_dropped},
                  {"low_sog_dropped", stats.low_sog_dropped},
                  {"trips_total", stats.trips_total},
                  {"trips_too_few_points", stats.trips_too_few_points},
                  {"segments_interpolated", stats.segments_interpolated},
                  {"segments_below_min_duration", stats.segments_below_min_duration},
                  {"segments_final", stats.segments_final},
                  {"points_final", stats.points_final}};
  json provenance{{"command", "preprocess"},
                  {"run_config", run_config},
                  {"input", input_digest(args.in)},
                  {"stats", stats_json}};
  dataset_io::save_dataset(dataset, args.out, provenance);
  std::cout << "preprocess: wrote dataset to " << args.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::string out;
  std::string model_config;
  std::string train_config;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  bool toy = false;
  std::size_t epochs = 0;
  std::size_t stride = 1;
  std::size_t log_every = 1;
};

int run_train(const TrainArgs& args) {
  ModelConfig mc;
  if (!args.model_config.empty())
    mc = load_json_file(args.model_config).get<ModelConfig>();
  if (args.toy) {
    mc.d_model = 32;
    mc.conv_layers = 2;
    mc.encoder_layers = 1;
    mc.heads = 2;
    mc.d_ff = 64;
    mc.horizon = 30;
  }
  if (args.horizon > 0) mc.horizon = args.horizon;
  mc.init_seed = args.seed;
  mc.validate();

  nn::TrainConfig tc;
  if (!args.train_config.empty())
    tc = load_json_file(args.train_config).get<nn::TrainConfig>();
  if (args.epochs > 0) tc.max_epochs = args.epochs;
  tc.seed = args.seed;
  tc.log_every = args.log_every;

  auto dataset = dataset_io::load_dataset(args.dataset);
  if (dataset.segments.empty()) throw EmptyDatasetError("train: empty dataset");
  auto split = split_dataset(dataset, {0.72, 0.18, 0.10}, args.seed);
  std::vector<TrajectorySegment> train_segs;
  for (auto id : split.train) train_segs.push_back(dataset.segments[id]);
  auto scaler = FeatureScaler::fit(train_segs);

  const auto w_in = static_cast<std::size_t>(mc.w_in);
  const auto w_out = static_cast<std::size_t>(mc.horizon);
  auto train_windows =
      slide_windows_over(dataset, split.train, w_in, w_out, scaler, args.stride);
  auto val_windows =
      slide_windows_over(dataset, split.validation, w_in, w_out, scaler, w_out);
  if (train_windows.empty() || val_windows.empty())
    throw EmptyDatasetError("train: segments too short for the window sizes");
  std::cout << "train: " << train_windows.size() << " training windows, "
            << val_windows.size() << " validation windows\n";

  ForecastModel<float> model(mc, scaler, true);
  model.set_training(true);
  auto history = nn::fit<float>(model, train_windows, val_windows, tc);
  model.set_training(false);
  if (history.aborted_non_finite)
    std::cout << "train: aborted on non-finite loss; best checkpoint kept\n";

  checkpoint::save(model, history, args.out);
  spit(args.out + ".history.json", history.to_json().dump(2) + "\n");

  json run_config{{"model", json(mc)}, {"train", json(tc)}, {"stride", args.stride},
                  {"split_seed", args.seed}};
  write_manifest(args.out + ".manifest.json", "train", run_config,
                 json::array({input_digest(args.dataset + "/manifest.json")}));
  std::cout << "train: best epoch " << history.best_epoch << ", val mse "
            << (history.epochs.empty()
                    ? 0.0
                    : history.epochs[history.best_epoch].val_mse)
            << ", checkpoint " << args.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string ckpt;
  std::string dataset;
  std::string out;
  std::vector<std::int64_t> horizons;
  std::string split = "test";
  std::uint64_t seed = 0;
  std::size_t stride = 0;  // 0 = horizon (non-overlapping)
  unsigned workers = 1;
  bool scenes = true;
};

struct HorizonScores {
  double model_ade = 0.0, model_fde = 0.0;
  double cv_ade = 0.0, cv_fde = 0.0;
  double cp_ade = 0.0, cp_fde = 0.0;
  std::size_t windows = 0;
};

int run_evaluate(const EvaluateArgs& args) {
  auto loaded = checkpoint::load(args.ckpt);
  auto& model = loaded.model;
  const auto& mc = model.config();
  if (!model.scaler_fitted()) throw StateError("evaluate: checkpoint has no scaler");

  std::vector<std::int64_t> horizons = args.horizons;
  if (horizons.empty()) {
    for (std::int64_t h : {std::int64_t{30}, std::int64_t{60}, std::int64_t{90}})
      if (h <= mc.horizon) horizons.push_back(h);
    if (horizons.empty()) horizons.push_back(mc.horizon);
  }
  for (auto h : horizons)
    if (h < 1 || h > mc.horizon)
      throw ConfigError("evaluate: horizon " + std::to_string(h) +
                        " incompatible with checkpoint horizon " +
                        std::to_string(mc.horizon));

  auto dataset = dataset_io::load_dataset(args.dataset);
  if (dataset.segments.empty()) throw EmptyDatasetError("evaluate: empty dataset");
  auto split = split_dataset(dataset, {0.72, 0.18, 0.10}, args.seed);
  std::vector<std::size_t> ids;
  if (args.split == "test") ids = split.test;
  else if (args.split == "validation") ids = split.validation;
  else if (args.split == "train") ids = split.train;
  else if (args.split == "all")
    for (std::size_t i = 0; i < dataset.segments.size(); ++i) ids.push_back(i);
  else throw ConfigError("evaluate: unknown split " + args.split);

  const auto w_in = static_cast<std::size_t>(mc.w_in);
  const auto H = static_cast<std::size_t>(mc.horizon);
  const std::size_t stride = args.stride > 0 ? args.stride : H;

  // evaluation anchors: (segment id, window start)
  std::vector<std::pair<std::size_t, std::size_t>> anchors;
  for (auto id : ids) {
    const auto& seg = dataset.segments[id];
    if (seg.points.size() < w_in + H) continue;
    for (std::size_t start = 0; start + w_in + H <= seg.points.size();
         start += stride)
      anchors.push_back({id, start});
  }
  if (anchors.empty())
    throw EmptyDatasetError("evaluate: no full windows in the selected split");

  struct WindowScore {
    std::vector<double> model_ade, model_fde, cv_ade, cv_fde, cp_ade, cp_fde;
  };
  std::vector<WindowScore> slots(anchors.size());
  parallel_for(anchors.size(), args.workers, [&](std::size_t i) {
    const auto [id, start] = anchors[i];
    const auto& seg = dataset.segments[id];
    std::span<const TrajectoryPoint> window(seg.points.data() + start, w_in);
    auto pred = model.predict_trajectory(window);
    if (!pred.ok) return;
    auto cv = baselines::constant_velocity(window, mc.horizon, dataset.interval_s);
    auto cp = baselines::constant_position(window, mc.horizon, dataset.interval_s);
    auto& slot = slots[i];
    for (auto h : horizons) {
      const auto hs = static_cast<std::size_t>(h);
      std::vector<geo::GeoPoint> truth(hs);
      for (std::size_t k = 0; k < hs; ++k)
        truth[k] = seg.points[start + w_in + k].position();
      auto take = [&](const std::vector<TimedPosition>& traj) {
        std::vector<geo::GeoPoint> pts(hs);
        for (std::size_t k = 0; k < hs; ++k) pts[k] = traj[k].position;
        return metrics::SampledTrajectory::single(pts);
      };
      auto score = [&](const std::vector<TimedPosition>& traj,
                       std::vector<double>& a, std::vector<double>& f) {
        auto s = take(traj);
        a.push_back(metrics::ade(s, truth));
        f.push_back(metrics::fde(s, truth));
      };
      score(pred.points, slot.model_ade, slot.model_fde);
      score(cv, slot.cv_ade, slot.cv_fde);
      score(cp, slot.cp_ade, slot.cp_fde);
    }
  });

  std::vector<HorizonScores> table(horizons.size());
  for (const auto& slot : slots) {
    if (slot.model_ade.size() != horizons.size()) continue;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      table[h].model_ade += slot.model_ade[h];
      table[h].model_fde += slot.model_fde[h];
      table[h].cv_ade += slot.cv_ade[h];
      table[h].cv_fde += slot.cv_fde[h];
      table[h].cp_ade += slot.cp_ade[h];
      table[h].cp_fde += slot.cp_fde[h];
      ++table[h].windows;
    }
  }
  for (auto& row : table) {
    if (row.windows == 0) continue;
    const double n = static_cast<double>(row.windows);
    row.model_ade /= n;
    row.model_fde /= n;
    row.cv_ade /= n;
    row.cv_fde /= n;
    row.cp_ade /= n;
    row.cp_fde /= n;
  }

  fs::create_directories(args.out);
  std::ostringstream csv;
  csv << "model";
  for (auto h : horizons) {
    const double hours = static_cast<double>(h) * dataset.interval_s / 3600.0;
    csv << ",ade_" << hours << "hr,fde_" << hours << "hr";
  }
  csv << "\n";
  auto emit_row = [&](const std::string& name, auto fade, auto ffde) {
    csv << name;
    for (std::size_t h = 0; h < horizons.size(); ++h)
      csv << ',' << fade(table[h]) << ',' << ffde(table[h]);
    csv << "\n";
  };
  emit_row("forecaster", [](const HorizonScores& s) { return s.model_ade; },
           [](const HorizonScores& s) { return s.model_fde; });
  emit_row("constant-velocity", [](const HorizonScores& s) { return s.cv_ade; },
           [](const HorizonScores& s) { return s.cv_fde; });
  emit_row("constant-position", [](const HorizonScores& s) { return s.cp_ade; },
           [](const HorizonScores& s) { return s.cp_fde; });
  spit((fs::path(args.out) / "metrics.csv").string(), csv.str());

  json metrics_json = json::array();
  for (std::size_t h = 0; h < horizons.size(); ++h)
    metrics_json.push_back({{"horizon_steps", horizons[h]},
                            {"windows", table[h].windows},
                            {"forecaster", {{"ade_m", table[h].model_ade},
                                            {"fde_m", table[h].model_fde}}},
                            {"constant_velocity", {{"ade_m", table[h].cv_ade},
                                                   {"fde_m", table[h].cv_fde}}},
                            {"constant_position", {{"ade_m", table[h].cp_ade},
                                                   {"fde_m", table[h].cp_fde}}}});
  spit((fs::path(args.out) / "metrics.json").string(),
       metrics_json.dump(2) + "\n");
  std::cout << csv.str();

  // joint per-scene metrics over the same split
  if (args.scenes) {
    Dataset eval_set;
    eval_set.interval_s = dataset.interval_s;
    for (auto id : ids) eval_set.segments.push_back(dataset.segments[id]);
    const double lookback_s = static_cast<double>(mc.horizon) * dataset.interval_s;
    const std::size_t hist_steps =
        std::max(w_in, static_cast<std::size_t>(lookback_s / dataset.interval_s) + 1);

    std::ostringstream scene_csv;
    scene_csv << "target,anchor_t,n_vessels,horizon,samples,jade_m,jfde_m\n";
    json scenes_json = json::array();
    for (const auto& seg : eval_set.segments) {
      const std::size_t need = hist_steps + H;
      if (seg.points.size() < need) continue;
      const double anchor_t = seg.points[hist_steps - 1].t;
      auto snap = scene::build_snapshot(eval_set, anchor_t, hist_steps);
      if (!snap.find(seg.mmsi)) continue;
      scene::Scene sc;
      try {
        sc = scene::build_scene(snap, seg.mmsi, lookback_s, w_in);
      } catch (const InvalidInput&) {
        continue;
      }
      sc = scene::predict_scene(sc, model, args.workers);

      std::vector<std::int64_t> mmsis;
      std::vector<metrics::SampledTrajectory> preds;
      std::vector<std::vector<geo::GeoPoint>> truths;
      for (std::size_t v = 0; v < sc.vessels.size(); ++v) {
        if (!sc.forecasts[v].ok) continue;
        const TrajectorySegment* vseg = nullptr;
        for (const auto& cand : eval_set.segments)
          if (cand.mmsi == sc.vessels[v].mmsi && cand.t_start() <= anchor_t &&
              cand.t_end() >= anchor_t + lookback_s) {
            vseg = &cand;
            break;
          }
        if (!vseg) continue;
        std::vector<geo::GeoPoint> truth;
        bool complete = true;
        for (std::size_t k = 1; k <= H; ++k) {
          auto p = scene::detail::sample_segment(
              *vseg, anchor_t + static_cast<double>(k) * dataset.interval_s);
          if (!p) {
            complete = false;
            break;
          }
          truth.push_back(p->position());
        }
        if (!complete) continue;
        std::vector<geo::GeoPoint> pred_pts;
        for (const auto& p : sc.forecasts[v].points) pred_pts.push_back(p.position);
        mmsis.push_back(sc.vessels[v].mmsi);
        preds.push_back(metrics::SampledTrajectory::single(pred_pts));
        truths.push_back(std::move(truth));
      }
      if (preds.empty()) continue;
      auto report = metrics::evaluate_scene(mmsis, preds, truths);
      scene_csv << sc.target_mmsi << ',' << anchor_t << ',' << report.to_csv_row()
                << "\n";
      auto j = report.to_json();
      j["target"] = sc.target_mmsi;
      j["anchor_t"] = anchor_t;
      scenes_json.push_back(std::move(j));
    }
    spit((fs::path(args.out) / "scenes.csv").string(), scene_csv.str());
    spit((fs::path(args.out) / "scenes.json").string(),
         scenes_json.dump(2) + "\n");
  }

  json run_config{{"horizons", horizons}, {"split", args.split},
                  {"split_seed", args.seed}, {"stride", stride},
                  {"workers", args.workers}, {"scenes", args.scenes}};
  write_manifest((fs::path(args.out) / "manifest.json").string(), "evaluate",
                 run_config,
                 json::array({input_digest(args.ckpt),
                              input_digest(args.dataset + "/manifest.json")}));
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string ckpt;
  std::string dataset;
  std::string out;
  std::int64_t target = 0;
  double anchor_t = 0.0;
  bool anchor_auto = true;
  double d_safe_m = 500.0;
  std::string method = "scan";
  double lookback_s = 0.0;  // 0 = horizon
  unsigned workers = 1;
};

int run_simulate(const SimulateArgs& args) {
  auto loaded = checkpoint::load(args.ckpt);
  auto& model = loaded.model;
  const auto& mc = model.config();
  auto dataset = dataset_io::load_dataset(args.dataset);
  if (dataset.segments.empty()) throw EmptyDatasetError("simulate: empty dataset");

  const double lookback_s =
      args.lookback_s > 0.0
          ? args.lookback_s
          : static_cast<double>(mc.horizon) * dataset.interval_s;
  const auto w_in = static_cast<std::size_t>(mc.w_in);
  const std::size_t hist_steps = std::max(
      w_in, static_cast<std::size_t>(lookback_s / dataset.interval_s) + 1);

  double anchor_t = args.anchor_t;
  if (args.anchor_auto) {
    // latest instant at which the target still has a full history
    const TrajectorySegment* best = nullptr;
    for (const auto& seg : dataset.segments)
      if (seg.mmsi == args.target &&
          seg.points.size() >= hist_steps &&
          (!best || seg.t_end() > best->t_end()))
        best = &seg;
    if (!best)
      throw InvalidInput("simulate: insufficient-history for target " +
                         std::to_string(args.target));
    anchor_t = best->t_end();
  }

  auto snap = scene::build_snapshot(dataset, anchor_t, hist_steps);
  if (!snap.find(args.target))
    throw InvalidInput("simulate: insufficient-history for target " +
                       std::to_string(args.target) + " at the anchor time");
  auto sc = scene::build_scene(snap, args.target, lookback_s, w_in);
  sc = scene::predict_scene(sc, model, args.workers);

  risk::RiskConfig rc;
  rc.d_safe_m = args.d_safe_m;
  if (args.method == "scan") rc.method = risk::CpaMethod::kTrajectoryScan;
  else if (args.method == "cv") rc.method = risk::CpaMethod::kConstantVelocity;
  else throw ConfigError("simulate: unknown method " + args.method);
  auto report = risk::assess_scene_risk(sc, rc);

  fs::create_directories(args.out);
  spit((fs::path(args.out) / "scene.geojson").string(),
       scene::scene_geojson(sc).dump(2) + "\n");
  spit((fs::path(args.out) / "risk.json").string(),
       report.to_json().dump(2) + "\n");
  spit((fs::path(args.out) / "risk.csv").string(), report.to_csv());

  json run_config{{"target", args.target},    {"anchor_t", anchor_t},
                  {"d_safe_m", args.d_safe_m}, {"method", args.method},
                  {"lookback_s", lookback_s},  {"workers", args.workers}};
  write_manifest((fs::path(args.out) / "manifest.json").string(), "simulate",
                 run_config,
                 json::array({input_digest(args.ckpt),
                              input_digest(args.dataset + "/manifest.json")}));

  std::cout << "simulate: scene of " << sc.vessels.size() << " vessels, "
            << report.pairs.size() << " pairs";
  std::size_t flagged = 0;
  for (const auto& p : report.pairs) flagged += p.flagged ? 1 : 0;
  std::cout << ", " << flagged << " flagged (d_safe " << rc.d_safe_m << " m)\n";
  for (const auto& p : report.pairs)
    std::cout << "  " << p.mmsi_b << ": dcpa " << p.dcpa_m << " m, tcpa "
              << p.tcpa_s / 60.0 << " min" << (p.flagged ? "  [FLAG]" : "")
              << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vessel trajectory forecasting and collision-risk toolkit"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 ok, 1 unexpected, 2 config, 3 io, 4 schema, "
      "5 empty-dataset, 6 invalid-input, 7 state");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic AIS fleet");
  synth_cmd->add_option("--out", synth_args.out, "output CSV path")->required();
  synth_cmd->add_option("--truth", synth_args.truth, "sidecar truth JSON path");
  synth_cmd->add_option("--config", synth_args.config, "fleet spec JSON");
  synth_cmd->add_option("--seed", synth_args.seed, "generator seed")
      ->each([&](const std::string&) { synth_args.seed_set = true; });
  synth_cmd->add_option("--vessels", synth_args.vessels, "vessel count");
  synth_cmd->add_option("--duration-h", synth_args.duration_h, "track hours");
  synth_cmd->add_option("--noise-pos-m", synth_args.noise_pos_m,
                        "position jitter sigma, meters");

  PreprocessArgs pre_args;
  auto* pre_cmd = app.add_subcommand("preprocess", "AIS csv to trajectory dataset");
  pre_cmd->add_option("--in", pre_args.in, "input AIS CSV")->required();
  pre_cmd->add_option("--out", pre_args.out, "output dataset directory")->required();
  pre_cmd->add_option("--config", pre_args.config, "pipeline config JSON");
  pre_cmd->add_option("--workers", pre_args.workers, "parallel voyage workers");
  pre_cmd->add_option("--min-points", pre_args.min_points, "minimum raw points");
  pre_cmd->add_option("--gap-s", pre_args.gap_s, "trip split threshold, seconds");
  pre_cmd->add_option("--min-duration-s", pre_args.min_duration_s,
                      "minimum segment duration, seconds");
  pre_cmd->add_flag("--no-mmsi-check", pre_args.no_mmsi_check,
                    "skip the structural MMSI filter");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train the forecaster");
  train_cmd->add_option("--dataset", train_args.dataset, "dataset directory")
      ->required();
  train_cmd->add_option("--out", train_args.out, "checkpoint path")->required();
  train_cmd->add_option("--model-config", train_args.model_config,
                        "model config JSON");
  train_cmd->add_option("--train-config", train_args.train_config,
                        "training config JSON");
  train_cmd->add_option("--seed", train_args.seed, "seed for split/init/shuffle");
  train_cmd->add_option("--horizon", train_args.horizon, "prediction steps");
  train_cmd->add_option("--epochs", train_args.epochs, "override max epochs");
  train_cmd->add_option("--stride", train_args.stride, "training window stride");
  train_cmd->add_option("--log-every", train_args.log_every,
                        "epoch logging period (0 silent)");
  train_cmd->add_flag("--toy", train_args.toy, "small architecture preset");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "displacement metric tables");
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--dataset", eval_args.dataset, "dataset directory")
      ->required();
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
  eval_cmd->add_option("--horizons", eval_args.horizons,
                       "horizons in steps (must fit the checkpoint)");
  eval_cmd->add_option("--split", eval_args.split, "test|validation|train|all");
  eval_cmd->add_option("--seed", eval_args.seed, "split seed");
  eval_cmd->add_option("--stride", eval_args.stride,
                       "window stride (default: horizon)");
  eval_cmd->add_option("--workers", eval_args.workers, "parallel workers");
  eval_cmd->add_flag("!--no-scenes", eval_args.scenes, "skip joint scene metrics");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "scene prediction + risk report");
  sim_cmd->add_option("--ckpt", sim_args.ckpt, "checkpoint path")->required();
  sim_cmd->add_option("--dataset", sim_args.dataset, "dataset directory")
      ->required();
  sim_cmd->add_option("--out", sim_args.out, "output directory")->required();
  sim_cmd->add_option("--target", sim_args.target, "target MMSI")->required();
  sim_cmd->add_option("--anchor", sim_args.anchor_t, "anchor epoch seconds")
      ->each([&](const std::string&) { sim_args.anchor_auto = false; });
  sim_cmd->add_option("--d-safe", sim_args.d_safe_m, "safety threshold, meters");
  sim_cmd->add_option("--method", sim_args.method, "scan|cv");
  sim_cmd->add_option("--lookback-s", sim_args.lookback_s,
                      "buffer radius lookback (default: horizon)");
  sim_cmd->add_option("--workers", sim_args.workers, "parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth_args);
    if (*pre_cmd) return run_preprocess(pre_args);
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*sim_cmd) return run_simulate(sim_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kSchema;
  } catch (const EmptyDatasetError& e) {
    std::cerr << "empty dataset: " << e.what() << "\n";
    return kEmptyDataset;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return kState;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUnexpected;
}
