#include "mapweld/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mapweld/error.hpp"
#include "mapweld/grid.hpp"
#include "mapweld/io.hpp"
#include "mapweld/labeling.hpp"
#include "mapweld/metrics.hpp"
#include "mapweld/server.hpp"
#include "mapweld/skeleton.hpp"
#include "mapweld/synth.hpp"
#include "mapweld/updater.hpp"

namespace mapweld::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class Log {
 public:
  Log(std::ostream& err, const bool& verbose) : err_(err), verbose_(verbose) {}

  void info(std::string_view event, const ordered_json& fields = ordered_json::object()) const {
    if (verbose_) {
      ordered_json line;
      line["level"] = "info";
      line["event"] = event;
      for (const auto& [k, v] : fields.items()) line[k] = v;
      err_ << line.dump() << "\n";
      return;
    }
    err_ << event;
    for (const auto& [k, v] : fields.items()) {
      err_ << " " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    err_ << "\n";
  }

 private:
  std::ostream& err_;
  const bool& verbose_;
};

void error_line(std::ostream& err, std::string_view code, std::string_view message) {
  ordered_json line;
  line["level"] = "error";
  line["code"] = code;
  line["message"] = message;
  err << line.dump() << "\n";
}

// Output files must land in an existing directory.
const CLI::Validator kWritable(
    [](std::string& value) -> std::string {
      const fs::path parent = fs::path(value).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) {
        return "directory does not exist: " + parent.string();
      }
      return {};
    },
    "WRITABLE");

struct SynthArgs {
  std::string scenario = "straight";
  ScenarioSpec spec;
  NoiseSpec noise;
  double step = 2.0;
  std::vector<std::string> remove;
  std::vector<std::string> shift;
  std::string out_gt, out_frames, out_world, out_poses, out_cloud;
  double pose_step = 0.5;
  CloudParams cloud{1.0, 0.03, 0.0, 5.0, 0.0, 0.0, 0.0, 0};
};

struct LabelArgs {
  std::string poses, cloud, out;
  LabelParams params;
  std::uint64_t seed = 0;
};

struct AccumulateArgs {
  std::string frames, out_dir, map;
  double resolution = 0.5;
  double pad = 5.0;
};

struct MaskArgs {
  std::string grid_dir, out_dir;
  std::uint32_t threshold = 3;
};

struct ExtractArgs {
  std::string grid_dir, mask_dir, out;
  std::uint32_t threshold = 3;
  ExtractParams params;
};

struct EvalArgs {
  std::string pred, gt, out;
  std::vector<double> thresholds = {0.5, 1.0, 1.5};
  double sample_step = 0.1;
  double cell_size = 0.0;
};

struct FlagArgs {
  std::string fresh, map, out;
  FlagParams params;
};

struct DecideArgs {
  std::string proposal, cell, decision, map;
};

struct MergeArgs {
  std::string map, fresh, proposal, out;
  bool accept_all = false;
  bool reject_all = false;
  MergeParams params;
};

struct ServeArgs {
  std::string map, fresh, proposal, grid_dir, ui_dir, merged_out;
  std::string host = "127.0.0.1";
  int port = 8080;
};

ShiftElement parse_shift(const std::string& text) {
  std::stringstream ss(text);
  std::string id, dx, dy;
  if (!std::getline(ss, id, ',') || !std::getline(ss, dx, ',') || !std::getline(ss, dy, ',')) {
    throw CLI::ValidationError("--shift-element", "expected ID,DX,DY");
  }
  try {
    return {id, std::stod(dx), std::stod(dy)};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--shift-element", "expected numeric DX,DY in '" + text + "'");
  }
}

void do_synth(const SynthArgs& a, const Log& log) {
  ScenarioSpec spec = a.spec;
  spec.kind = parse_scenario_kind(a.scenario);
  const Scenario sc = generate_scenario(spec);
  VectorMap world = sc.gt;
  for (const auto& id : a.remove) world = inject_change(world, RemoveElement{id}).map;
  for (const auto& s : a.shift) world = inject_change(world, parse_shift(s)).map;
  const auto frames = simulate_frames(world, sc.drive_path, {}, a.step, a.noise);
  io::save_map(a.out_gt, sc.gt);
  io::save_frames(a.out_frames, frames);
  if (!a.out_world.empty()) io::save_map(a.out_world, world);
  if (!a.out_poses.empty()) io::save_poses(a.out_poses, poses_along(sc.drive_path, a.pose_step));
  if (!a.out_cloud.empty()) {
    const Rect area = sc.gt.bounds;
    io::save_pointcloud(a.out_cloud, synthesize_ground_cloud(area, a.cloud));
  }
  log.info("synth", {{"scenario", a.scenario},
                     {"elements", sc.gt.elements.size()},
                     {"frames", frames.size()},
                     {"out_gt", a.out_gt},
                     {"out_frames", a.out_frames}});
}

void do_label(const LabelArgs& a, const Log& log) {
  const auto poses = io::load_poses(a.poses);
  const auto cloud = io::load_pointcloud(a.cloud);
  LabelParams p = a.params;
  p.ground.ransac.seed = a.seed;
  const VectorMap m = auto_label(poses, cloud, p);
  io::save_map(a.out, m);
  log.info("label", {{"poses", poses.size()}, {"cloud", cloud.size()}, {"out", a.out}});
}

void do_accumulate(const AccumulateArgs& a, const Log& log) {
  const auto frames = io::load_frames(a.frames);
  const GridSpec spec = a.map.empty() ? grid_spec_for(frames, a.resolution, a.pad)
                                      : grid_spec_for(io::load_map(a.map).bounds, a.resolution, a.pad);
  const AccumulationGrid grid = accumulate(frames, spec);
  fs::create_directories(a.out_dir);
  save_grid(a.out_dir, grid);
  ordered_json peaks;
  for (MapClass c : kAllClasses) {
    const auto& layer = grid.layer(c);
    peaks[std::string(to_string(c))] = layer.empty() ? 0u : *std::max_element(layer.begin(), layer.end());
  }
  log.info("accumulate", {{"frames", frames.size()},
                          {"width", spec.width},
                          {"height", spec.height},
                          {"max_count", peaks},
                          {"out_dir", a.out_dir}});
}

void do_mask(const MaskArgs& a, const Log& log) {
  const AccumulationGrid grid = load_grid(a.grid_dir);
  const DenseMask mask = threshold_mask(grid, a.threshold);
  const std::string out = a.out_dir.empty() ? a.grid_dir : a.out_dir;
  fs::create_directories(out);
  save_mask(out, mask);
  log.info("mask", {{"threshold", a.threshold}, {"out_dir", out}});
}

void do_extract(const ExtractArgs& a, const Log& log) {
  VectorMap m;
  if (!a.mask_dir.empty()) {
    m = extract_lines(skeletonize(load_mask(a.mask_dir)), a.params);
  } else {
    m = extract_from_grid(load_grid(a.grid_dir), a.threshold, a.params);
  }
  io::save_map(a.out, m);
  log.info("extract", {{"elements", m.elements.size()}, {"out", a.out}});
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["thresholds"] = r.thresholds;
  j["map"] = r.map;
  std::vector<double> at;
  for (std::size_t t = 0; t < r.thresholds.size(); ++t) at.push_back(r.map_at(t));
  j["map_at"] = at;
  ordered_json classes;
  for (MapClass c : kAllClasses) {
    const auto& cr = r.of(c);
    classes[std::string(to_string(c))] = {{"ap", cr.ap}, {"mean_ap", cr.mean_ap}, {"vacuous", cr.vacuous}};
  }
  j["classes"] = std::move(classes);
  return j;
}

void do_eval(const EvalArgs& a, std::ostream& out, const Log& log) {
  const VectorMap pred = io::load_map(a.pred);
  const VectorMap gt = io::load_map(a.gt);
  ApThresholds th{a.thresholds};
  const ChamferParams cp{a.sample_step};
  const EvalReport report = evaluate(pred, gt, th, cp);
  ordered_json j = report_json(report);
  if (a.cell_size > 0) {
    auto cells = ordered_json::array();
    for (const auto& c : evaluate_per_cell(pred, gt, a.cell_size, th, cp)) {
      ordered_json cj;
      cj["cell_id"] = c.cell_id();
      cj["rect"] = {c.rect.xmin, c.rect.ymin, c.rect.xmax, c.rect.ymax};
      cj["vacuous"] = c.vacuous;
      cj["map"] = c.vacuous ? json(nullptr) : json(c.report.map);
      cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
  }
  const std::string text = j.dump(1) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    io::write_file_atomic(a.out, text);
  }
  log.info("eval", {{"map", report.map}});
}

void do_flag(const FlagArgs& a, const Log& log) {
  const VectorMap fresh = io::load_map(a.fresh);
  const VectorMap existing = io::load_map(a.map);
  const UpdateProposal p = flag_cells(fresh, existing, a.params);
  save_proposal(a.out, p);
  log.info("flag", {{"flagged", p.cells.size()}, {"out", a.out}});
}

void do_decide(const DecideArgs& a, std::ostream& out, const Log& log) {
  UpdateProposal p = a.map.empty() ? load_proposal(a.proposal)
                                   : load_proposal(a.proposal, io::load_map(a.map));
  const ProposalCell& cell = set_decision(p, a.cell, parse_decision(a.decision));
  out << cell_to_string(cell) << "\n";
  save_proposal(a.proposal, p);
  log.info("decide", {{"cell_id", a.cell}, {"decision", a.decision}, {"pending", p.pending()}});
}

void do_merge(const MergeArgs& a, const Log& log) {
  const VectorMap existing = io::load_map(a.map);
  const VectorMap fresh = io::load_map(a.fresh);
  UpdateProposal p = load_proposal(a.proposal);
  if (a.accept_all || a.reject_all) {
    for (auto& c : p.cells) c.decision = a.accept_all ? Decision::kAccepted : Decision::kRejected;
  }
  const MergeResult r = merge(existing, fresh, p, a.params);
  io::save_map(a.out, r.map);
  std::size_t counts[3] = {0, 0, 0};
  for (auto prov : r.provenance) ++counts[static_cast<int>(prov)];
  log.info("merge", {{"elements", r.map.elements.size()},
                     {"kept_old", counts[0]},
                     {"inserted_new", counts[1]},
                     {"stitched", counts[2]},
                     {"out", a.out}});
}

int do_serve(const ServeArgs& a, std::ostream& err, const Log& log) {
  ReviewData data;
  data.existing = io::load_map(a.map);
  data.fresh = io::load_map(a.fresh);
  data.proposal = load_proposal(a.proposal, data.existing);
  data.proposal_path = a.proposal;
  if (!a.grid_dir.empty()) data.grid = load_grid(a.grid_dir);
  if (!a.ui_dir.empty()) data.ui_dir = a.ui_dir;
  if (!a.merged_out.empty()) data.merged_out = a.merged_out;
  ReviewServer server(std::move(data));

  int port = a.port;
  if (port == 0) {
    port = server.bind_any(a.host);
    if (port < 0) {
      error_line(err, "IoError", "cannot bind " + a.host);
      return 1;
    }
  } else if (!server.bind(a.host, port)) {
    error_line(err, "IoError", "cannot bind " + a.host + ":" + std::to_string(port));
    return 1;
  }

  // SIGINT/SIGTERM are taken synchronously by a watcher thread; the server
  // threads inherit the blocked mask.
  sigset_t set, previous;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, &previous);
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  log.info("serve", {{"url", "http://" + a.host + ":" + std::to_string(port)}});
  err.flush();
  server.listen();
  // Unblock the watcher if the server stopped for another reason.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  log.info("serve-stopped");
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  bool verbose = false;
  const Log log(err, verbose);

  CLI::App app{"mapweld: accumulate per-frame map predictions into a global HD map and review "
               "per-cell updates"};
  app.name("mapweld");
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.add_flag("-v,--verbose", verbose, "Structured JSON logs on stderr");
  app.require_subcommand(1);

  std::function<int()> action;

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a scenario and simulated frames");
  synth->add_option("--scenario", sy.scenario, "straight|intersection|loop|roundabout|multilane")
      ->check(CLI::IsMember({"straight", "intersection", "loop", "roundabout", "multilane"}))
      ->capture_default_str();
  synth->add_option("--half-width", sy.spec.half_width, "Lane width, m")->capture_default_str();
  synth->add_option("--lanes", sy.spec.lanes_per_direction, "Lanes per direction")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--length", sy.spec.length, "Straight road length, m")->capture_default_str();
  synth->add_option("--arm-length", sy.spec.arm_length, "Approach arm length, m")
      ->capture_default_str();
  synth->add_option("--corner-radius", sy.spec.corner_radius)->capture_default_str();
  synth->add_option("--loop-straight", sy.spec.loop_straight)->capture_default_str();
  synth->add_option("--loop-radius", sy.spec.loop_radius)->capture_default_str();
  synth->add_option("--radius", sy.spec.radius, "Roundabout radius, m")->capture_default_str();
  synth->add_option("--crosswalk", sy.spec.crosswalk_stations, "Crosswalk station, m (repeatable)");
  synth->add_option("--heading", sy.spec.heading, "Scenario rotation, rad")->capture_default_str();
  synth->add_option("--noise-sigma", sy.noise.point_sigma)->capture_default_str();
  synth->add_option("--dropout", sy.noise.dropout_prob)->capture_default_str();
  synth->add_option("--spurious-rate", sy.noise.spurious_rate)->capture_default_str();
  synth->add_option("--seed", sy.noise.seed)->capture_default_str();
  synth->add_option("--step", sy.step, "Frame spacing along the drive, m")->capture_default_str();
  synth->add_option("--remove-element", sy.remove, "Drop this gt element before simulating");
  synth->add_option("--shift-element", sy.shift, "ID,DX,DY: move an element before simulating");
  synth->add_option("--out-gt", sy.out_gt)->required()->check(kWritable);
  synth->add_option("--out-frames", sy.out_frames)->required()->check(kWritable);
  synth->add_option("--out-world", sy.out_world, "Map after the requested changes")
      ->check(kWritable);
  synth->add_option("--out-poses", sy.out_poses, "Pose trace CSV along the drive")
      ->check(kWritable);
  synth->add_option("--pose-step", sy.pose_step)->capture_default_str();
  synth->add_option("--out-cloud", sy.out_cloud, "Synthetic ground point cloud")->check(kWritable);
  synth->add_option("--cloud-spacing", sy.cloud.spacing)->capture_default_str();
  synth->add_option("--cloud-sigma", sy.cloud.sigma)->capture_default_str();
  synth->add_option("--cloud-slope", sy.cloud.slope_x, "dz/dx of the ground")->capture_default_str();
  synth->add_option("--cloud-outliers", sy.cloud.outlier_fraction)->capture_default_str();
  synth->callback([&] { action = [&] { do_synth(sy, log); return 0; }; });

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Auto-label a 3D map from a pose trace and point cloud");
  label->add_option("--poses", la.poses)->required()->check(CLI::ExistingFile);
  label->add_option("--cloud", la.cloud)->required()->check(CLI::ExistingFile);
  label->add_option("--half-width", la.params.lane.half_width)->capture_default_str();
  label->add_option("--dedup", la.params.dedup_distance)->capture_default_str();
  label->add_option("--smooth-window", la.params.smooth_window)->capture_default_str();
  label->add_option("--tile-size", la.params.ground.tile_size)->capture_default_str();
  label->add_option("--min-inliers", la.params.ground.min_inliers)->capture_default_str();
  label->add_option("--inlier-tol", la.params.ground.ransac.inlier_tol)->capture_default_str();
  label->add_option("--iterations", la.params.ground.ransac.iterations)->capture_default_str();
  label->add_option("--k", la.params.lift.k)->capture_default_str();
  label->add_option("--radius", la.params.lift.radius)->capture_default_str();
  label->add_option("--seed", la.seed)->capture_default_str();
  label->add_option("--out", la.out)->required()->check(kWritable);
  label->callback([&] { action = [&] { do_label(la, log); return 0; }; });

  AccumulateArgs ac;
  auto* accum = app.add_subcommand("accumulate", "Accumulate frames into per-class count grids");
  accum->add_option("--frames", ac.frames)->required()->check(CLI::ExistingFile);
  accum->add_option("--out,--out-dir", ac.out_dir)->required();
  accum->add_option("--resolution", ac.resolution)->check(CLI::PositiveNumber)->capture_default_str();
  accum->add_option("--map", ac.map, "Size the grid from this map's bounds")
      ->check(CLI::ExistingFile);
  accum->add_option("--pad", ac.pad)->capture_default_str();
  accum->callback([&] { action = [&] { do_accumulate(ac, log); return 0; }; });

  MaskArgs ma;
  auto* mask = app.add_subcommand("mask", "Threshold count grids into binary masks");
  mask->add_option("--grid,--grid-dir", ma.grid_dir)->required()->check(CLI::ExistingDirectory);
  mask->add_option("--threshold", ma.threshold, "Keep cells with count > threshold")
      ->capture_default_str();
  mask->add_option("--out,--out-dir", ma.out_dir, "Defaults to the grid directory");
  mask->callback([&] { action = [&] { do_mask(ma, log); return 0; }; });

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Skeletonize and vectorize into map elements");
  auto* grid_opt = extract->add_option("--grid,--grid-dir", ex.grid_dir)->check(CLI::ExistingDirectory);
  auto* mask_opt = extract->add_option("--mask,--mask-dir", ex.mask_dir)->check(CLI::ExistingDirectory);
  grid_opt->excludes(mask_opt);
  extract->add_option("--threshold", ex.threshold)->capture_default_str();
  extract->add_option("--min-length", ex.params.min_length)->capture_default_str();
  extract->add_option("--simplify", ex.params.simplify_tol)->capture_default_str();
  extract->add_option("--spur-length", ex.params.spur_length)->capture_default_str();
  extract->add_option("--out", ex.out)->required()->check(kWritable);
  extract->callback([&] {
    if (ex.grid_dir.empty() && ex.mask_dir.empty()) {
      throw CLI::RequiredError("--grid or --mask");
    }
    action = [&] { do_extract(ex, log); return 0; };
  });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a predicted map against ground truth");
  eval->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev.gt)->required()->check(CLI::ExistingFile);
  eval->add_option("--thresholds", ev.thresholds)->delimiter(',')->capture_default_str();
  eval->add_option("--sample-step", ev.sample_step)->capture_default_str();
  eval->add_option("--per-cell,--cell-size", ev.cell_size, "Also report per-cell mAP at this cell size");
  eval->add_option("--out", ev.out, "Report file; stdout when omitted")->check(kWritable);
  eval->callback([&] { action = [&] { do_eval(ev, out, log); return 0; }; });

  FlagArgs fl;
  auto* flag = app.add_subcommand("flag", "Compare new elements with the map per cell");
  flag->add_option("--new", fl.fresh)->required()->check(CLI::ExistingFile);
  flag->add_option("--map", fl.map)->required()->check(CLI::ExistingFile);
  flag->add_option("--threshold", fl.params.update_threshold)->capture_default_str();
  flag->add_option("--cell-size", fl.params.cell_size)->check(CLI::PositiveNumber)
      ->capture_default_str();
  flag->add_option("--out", fl.out)->required()->check(kWritable);
  flag->callback([&] { action = [&] { do_flag(fl, log); return 0; }; });

  DecideArgs de;
  auto* decide_cmd = app.add_subcommand("decide", "Record a decision for one flagged cell");
  decide_cmd->add_option("--proposal", de.proposal)->required()->check(CLI::ExistingFile);
  decide_cmd->add_option("--cell", de.cell)->required();
  auto* decision_opt = decide_cmd->add_option("--decision", de.decision)
                           ->check(CLI::IsMember({"accepted", "rejected"}));
  bool accept = false, reject = false;
  auto* accept_opt = decide_cmd->add_flag("--accept", accept, "Same as --decision accepted");
  auto* reject_opt = decide_cmd->add_flag("--reject", reject, "Same as --decision rejected");
  accept_opt->excludes(reject_opt)->excludes(decision_opt);
  reject_opt->excludes(decision_opt);
  decide_cmd->add_option("--map", de.map, "Verify the proposal was built from this map")
      ->check(CLI::ExistingFile);
  decide_cmd->callback([&] {
    if (accept) de.decision = "accepted";
    if (reject) de.decision = "rejected";
    if (de.decision.empty()) throw CLI::RequiredError("--decision, --accept or --reject");
    action = [&] { do_decide(de, out, log); return 0; };
  });

  MergeArgs me;
  auto* merge_cmd = app.add_subcommand("merge", "Apply decided cells to the map");
  merge_cmd->add_option("--map", me.map)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--new", me.fresh)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--proposal", me.proposal)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", me.out)->required()->check(kWritable);
  auto* acc = merge_cmd->add_flag("--accept-all", me.accept_all, "Accept every flagged cell");
  auto* rej = merge_cmd->add_flag("--reject-all", me.reject_all, "Reject every flagged cell");
  acc->excludes(rej);
  merge_cmd->add_option("--stitch-tol", me.params.stitch_tolerance)->capture_default_str();
  merge_cmd->callback([&] { action = [&] { do_merge(me, log); return 0; }; });

  ServeArgs se;
  auto* serve = app.add_subcommand("serve", "Host the review API");
  serve->add_option("--map", se.map)->required()->check(CLI::ExistingFile);
  serve->add_option("--new", se.fresh)->required()->check(CLI::ExistingFile);
  serve->add_option("--proposal", se.proposal)->required()->check(CLI::ExistingFile);
  serve->add_option("--grid,--grid-dir", se.grid_dir, "Accumulation grids for /api/heatmap")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--ui-dir", se.ui_dir, "Static UI files served at /")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--merged-out", se.merged_out, "Also write merges here")->check(kWritable);
  serve->add_option("--host", se.host)->capture_default_str();
  serve->add_option("--port", se.port, "0 picks a free port")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve->callback([&] { action = [&] { return do_serve(se, err, log); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    error_line(err, to_string(e.code()), e.what());
  } catch (const CLI::ValidationError& e) {
    error_line(err, "UsageError", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    error_line(err, "IoError", e.what());
  } catch (const std::exception& e) {
    error_line(err, "InternalError", e.what());
  }
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mapweld::cli
