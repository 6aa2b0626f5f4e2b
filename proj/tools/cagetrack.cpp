// cagetrack: simulate -> track -> identify -> eval over JSON-lines files.
//
// Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 config error,
// 4 contract violation.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cagetrack/config.hpp"
#include "cagetrack/errors.hpp"
#include "cagetrack/io.hpp"
#include "cagetrack/pipeline.hpp"

namespace {

using namespace cagetrack;

constexpr int kExitIo = 1;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitContract = 4;

class IoError : public Error {
 public:
  using Error::Error;
};

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "key = value config file (default: $CAGETRACK_CONFIG)");
  for (const auto& key : config_keys()) {
    const std::string name(key.name);
    sub->add_option("--" + name, opts.overrides[name], std::string(key.help))->group("Config overrides");
  }
}

Config build_config(const CommonOptions& opts, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  Config cfg;
  std::string path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("CAGETRACK_CONFIG"); env != nullptr) path = env;
  }
  if (!path.empty()) cfg.load_file(path);
  for (const auto& [key, value] : extra) cfg.set(key, value);
  for (const auto& [key, value] : opts.overrides) {
    if (!value.empty()) cfg.set(key, value);
  }
  return cfg;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

int exit_code_for(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ParseError& e) {
    std::cerr << "ParseError: " << e.what() << '\n';
    return kExitParse;
  } catch (const ConfigError& e) {
    std::cerr << "ConfigError: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "ContractError: " << e.what() << '\n';
    return kExitContract;
  } catch (const NumericError& e) {
    std::cerr << "NumericError: " << e.what() << '\n';
    return kExitContract;
  } catch (const IoError& e) {
    std::cerr << "IoError: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

void run_track_one(const std::string& in_path, const std::string& out_path, const TrackerConfig& cfg) {
  auto in = open_in(in_path);
  auto out = open_out(out_path);
  const std::size_t n = track_stream(in, out, cfg);
  std::cerr << in_path << ": " << n << " tracklets\n";
}

int run_track(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs, unsigned jobs,
              const CommonOptions& opts) {
  if (inputs.size() != outputs.size()) throw ConfigError("--out", "needs one --out per --in");
  const TrackerConfig cfg = tracker_config(build_config(opts));

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  int worst = 0;
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        run_track_one(inputs[i], outputs[i], cfg);
      } catch (...) {
        std::lock_guard lock(err_mu);
        worst = std::max(worst, exit_code_for(std::current_exception()));
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(inputs.size())));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  return worst;
}

int run_identify(const std::string& in_path, const std::string& out_path, const std::string& window,
                 const CommonOptions& opts) {
  std::vector<std::pair<std::string, std::string>> extra;
  if (!window.empty()) extra.emplace_back("mousemap.window_minutes", window);
  const MouseMapConfig cfg = mousemap_config(build_config(opts, extra));
  auto in = open_in(in_path);
  auto out = open_out(out_path);
  const IdentifyResult r = identify_stream(in, out, cfg);
  std::cerr << "objective = " << std::setprecision(17) << r.objective << '\n';
  return 0;
}

int run_eval(const std::string& gt_path, const std::string& hyp_path, const std::string& iou_threshold,
             const std::string& report_path, const CommonOptions& opts) {
  std::vector<std::pair<std::string, std::string>> extra;
  if (!iou_threshold.empty()) extra.emplace_back("eval.iou_threshold", iou_threshold);
  const Config cfg = build_config(opts, extra);
  const double threshold = eval_iou_threshold(cfg);
  const double fps = stream_fps(cfg);
  auto gt = open_in(gt_path);
  auto hyp = open_in(hyp_path);
  const EvalReport report = eval_streams(gt, hyp, fps, threshold);
  std::cout << io::format_report_text(report);
  if (!report_path.empty()) {
    auto out = open_out(report_path);
    out << io::format_report_json(report) << '\n';
  }
  return 0;
}

int run_simulate(const std::string& scene_path, const std::string& prefix, const std::string& seed,
                 const CommonOptions& opts) {
  Config cfg = build_config(opts);
  if (!scene_path.empty()) cfg.load_file(scene_path);
  for (const auto& [key, value] : opts.overrides) {
    if (!value.empty()) cfg.set(key, value);
  }
  if (!seed.empty()) cfg.set("sim.seed", seed);
  const SceneConfig scene = scene_config(cfg);
  auto dets = open_out(prefix + ".detections.jsonl");
  auto gt = open_out(prefix + ".gt.jsonl");
  simulate_streams(scene, dets, gt);
  std::cerr << "seed = " << scene.seed << ", frames = " << scene.frame_count() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-animal tracking and ear-tag identity assignment"};
  app.require_subcommand(1);

  CommonOptions track_opts, identify_opts, eval_opts, sim_opts;

  std::vector<std::string> track_in, track_out;
  unsigned jobs = 1;
  auto* track = app.add_subcommand("track", "link detections into tracklets");
  track->add_option("--in", track_in, "detections JSONL (repeatable)")->required();
  track->add_option("--out", track_out, "tracklets JSONL (one per --in)")->required();
  track->add_option("--jobs", jobs, "concurrent files")->check(CLI::PositiveNumber);
  add_common(track, track_opts);

  std::string identify_in, identify_out, window;
  auto* identify = app.add_subcommand("identify", "assign identities to tracklets");
  identify->add_option("--in", identify_in, "tracklets JSONL")->required();
  identify->add_option("--out", identify_out, "tracklets JSONL with identities")->required();
  identify->add_option("--window-minutes", window, "solve window; 0 for the whole recording");
  add_common(identify, identify_opts);

  std::string gt_path, hyp_path, iou_threshold, report_path;
  auto* eval = app.add_subcommand("eval", "score tracklets against ground truth");
  eval->add_option("--gt", gt_path, "ground-truth JSONL")->required();
  eval->add_option("--hyp", hyp_path, "tracklets JSONL")->required();
  eval->add_option("--iou-threshold", iou_threshold, "IoU needed for a match");
  eval->add_option("--out", report_path, "also write the report as JSON");
  add_common(eval, eval_opts);

  std::string scene_path, prefix, seed;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic scene");
  simulate->add_option("--scene", scene_path, "scene config file");
  simulate->add_option("--out-prefix", prefix, "writes PREFIX.detections.jsonl and PREFIX.gt.jsonl")->required();
  simulate->add_option("--seed", seed, "overrides sim.seed");
  add_common(simulate, sim_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*track) return run_track(track_in, track_out, jobs, track_opts);
    if (*identify) return run_identify(identify_in, identify_out, window, identify_opts);
    if (*eval) return run_eval(gt_path, hyp_path, iou_threshold, report_path, eval_opts);
    if (*simulate) return run_simulate(scene_path, prefix, seed, sim_opts);
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return 0;
}
