#include "mcseg/cli.hpp"

#include "mcseg/config.hpp"
#include "mcseg/error.hpp"
#include "mcseg/eval.hpp"
#include "mcseg/io.hpp"
#include "mcseg/labels.hpp"
#include "mcseg/manifest.hpp"
#include "mcseg/pipeline.hpp"
#include "mcseg/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

namespace mcseg::cli {
namespace {

// Config sources shared by the pipeline commands: file, then --set, then
// dedicated flags.
struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "config file of `section.key = value` lines");
    cmd->add_option("--set", overrides, "override one key, e.g. --set graph.k1=6");
    cmd->add_option("--seed", seed, "random seed (overrides config)");
  }

  Config resolve() const {
    Config config;
    if (!config_file.empty()) config.merge_file(config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    return config;
  }
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    hooks_.on_begin = [this](std::string_view s) { stage_ = std::string(s); };
    hooks_.on_stage = [this](std::string_view s, double seconds) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", seconds);
      err_ << "[time] " << s << " " << buf << "s\n";
    };
    hooks_.on_warning = [this](std::string_view m) { err_ << "warning: " << m << "\n"; };
  }

  void stage(std::string name) { stage_ = std::move(name); }
  const std::string& stage() const { return stage_; }
  const pipeline::Hooks& hooks() const { return hooks_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::string stage_ = "startup";
  pipeline::Hooks hooks_;
};

struct Inputs {
  PointCloud cloud;
  std::optional<FeatureMatrix> features;
  const FeatureMatrix* features_ptr() const { return features ? &*features : nullptr; }
};

Inputs load_inputs(Session& s, const std::string& input, const std::string& features) {
  Inputs in;
  s.stage("read input");
  in.cloud = io::read_ply(input);
  if (!features.empty()) {
    s.stage("read features");
    in.features = io::read_features(features);
  }
  return in;
}

void record_input(Manifest& m, const std::string& role, const std::string& path) {
  if (path.empty()) return;
  m.inputs[role] = path;
  m.digests[role] = file_sha256(path);
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

// ---------------------------------------------------------------------------
// jobs: fully resolved command invocations, shared by the parsers and rerun

struct SegmentJob {
  std::string input, features, output, export_ply;
  Config config;
  double sigma = 0.0;
};

int run_segment(Session& s, const SegmentJob& job) {
  Inputs in = load_inputs(s, job.input, job.features);
  const auto scene = pipeline::prepare(in.cloud, in.features_ptr(), job.config, s.hooks());
  const LabelMap labels = pipeline::segment(in.cloud, scene, job.sigma, job.config, s.hooks());
  s.stage("write output");
  io::write_labels(labels, job.output);
  if (!job.export_ply.empty()) io::write_ply(in.cloud, labels, job.export_ply);

  Manifest m;
  m.command = "segment";
  record_input(m, "input", job.input);
  record_input(m, "features", job.features);
  m.outputs["labels"] = job.output;
  if (!job.export_ply.empty()) m.outputs["ply"] = job.export_ply;
  m.parameters["sigma"] = job.sigma;
  m.config = job.config;
  m.save(manifest_path(job.output));

  const auto count = pipeline::instance_count(labels);
  if (count == 0) s.err() << "warning: no foreground instances found\n";
  s.out() << "instances " << count << "\n";
  return kOk;
}

struct PseudoJob {
  std::string input, features, prefix, export_ply;
  Config config;
  double sigma_low = 0.0, sigma_high = 0.0;
};

int run_pseudo(Session& s, const PseudoJob& job) {
  Inputs in = load_inputs(s, job.input, job.features);
  const auto scene = pipeline::prepare(in.cloud, in.features_ptr(), job.config, s.hooks());
  const LabelMap base = pipeline::segment(in.cloud, scene, job.sigma_low, job.config, s.hooks());
  const LabelMap under = pipeline::segment(in.cloud, scene, job.sigma_high, job.config, s.hooks());
  s.stage("write output");
  const std::string base_path = job.prefix + ".base.labels";
  const std::string under_path = job.prefix + ".under.labels";
  io::write_labels(base, base_path);
  io::write_labels(under, under_path);
  if (!job.export_ply.empty()) {
    io::write_ply(in.cloud, base, job.export_ply + ".base.ply");
    io::write_ply(in.cloud, under, job.export_ply + ".under.ply");
  }

  Manifest m;
  m.command = "pseudo-labels";
  record_input(m, "input", job.input);
  record_input(m, "features", job.features);
  m.outputs["prefix"] = job.prefix;
  m.outputs["base"] = base_path;
  m.outputs["under"] = under_path;
  if (!job.export_ply.empty()) m.outputs["ply"] = job.export_ply;
  m.parameters["sigma_low"] = job.sigma_low;
  m.parameters["sigma_high"] = job.sigma_high;
  m.config = job.config;
  m.save(manifest_path(job.prefix));

  s.out() << "base_instances " << pipeline::instance_count(base) << "\n";
  s.out() << "under_instances " << pipeline::instance_count(under) << "\n";
  return kOk;
}

struct RefineJob {
  std::string base, under, input, features, output, export_ply;
  Config config;
};

int run_refine(Session& s, const RefineJob& job) {
  Inputs in = load_inputs(s, job.input, job.features);
  s.stage("read labels");
  const LabelMap base = io::read_labels(job.base);
  const LabelMap under = io::read_labels(job.under);
  if (base.size() != in.cloud.size() || under.size() != in.cloud.size()) {
    throw DataError("label files have " + std::to_string(base.size()) + " and " +
                    std::to_string(under.size()) + " entries for " +
                    std::to_string(in.cloud.size()) + " points");
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    if ((base[i] == 0) != (under[i] == 0)) {
      throw DataError("base and under label files disagree on background at point " +
                      std::to_string(i));
    }
  }
  check_cloud(in.cloud);
  const WeightedGraph graph =
      pipeline::consolidation_graph(in.cloud, in.features_ptr(), base, job.config, s.hooks());
  s.stage("consolidate");
  const LabelMap refined = labels::consolidate(base, under, graph, job.config.consolidate_params());
  s.stage("write output");
  io::write_labels(refined, job.output);
  if (!job.export_ply.empty()) io::write_ply(in.cloud, refined, job.export_ply);

  Manifest m;
  m.command = "refine";
  record_input(m, "base", job.base);
  record_input(m, "under", job.under);
  record_input(m, "input", job.input);
  record_input(m, "features", job.features);
  m.outputs["labels"] = job.output;
  if (!job.export_ply.empty()) m.outputs["ply"] = job.export_ply;
  m.config = job.config;
  m.save(manifest_path(job.output));

  s.out() << "instances " << pipeline::instance_count(refined) << "\n";
  return kOk;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int run_eval(Session& s, const std::string& pred_path, const std::string& gt_path, bool kv) {
  s.stage("read labels");
  const LabelMap pred = io::read_labels(pred_path);
  const LabelMap gt = io::read_labels(gt_path);
  if (pred.size() != gt.size()) {
    throw DataError("prediction has " + std::to_string(pred.size()) + " labels, ground truth " +
                    std::to_string(gt.size()));
  }
  s.stage("evaluate");
  const auto report = eval::evaluate(eval::predictions_from_labels(pred), labels::labels_to_masks(gt));
  if (kv) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", report.ap);
    s.out() << "ap=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", report.ap50);
    s.out() << "ap50=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", report.ap25);
    s.out() << "ap25=" << buf << "\n";
    for (std::size_t i = 0; i < eval::kThresholdCount; ++i) {
      std::snprintf(buf, sizeof(buf), "ap@%.2f=%.6f", eval::threshold(i), report.per_threshold[i]);
      s.out() << buf << "\n";
    }
  } else {
    s.out() << "AP " << fixed4(report.ap) << " AP50 " << fixed4(report.ap50) << " AP25 "
            << fixed4(report.ap25) << "\n";
  }
  return kOk;
}

void verify_inputs(const Manifest& m) {
  for (const auto& [role, path] : m.inputs) {
    const std::string digest = file_sha256(path);
    if (digest != m.digests.at(role)) {
      throw DataError("input '" + role + "' (" + path + ") no longer matches the manifest digest");
    }
  }
}

std::string input_or_empty(const Manifest& m, const std::string& role) {
  const auto it = m.inputs.find(role);
  return it == m.inputs.end() ? std::string() : it->second;
}

std::string output_or_empty(const Manifest& m, const std::string& role) {
  const auto it = m.outputs.find(role);
  return it == m.outputs.end() ? std::string() : it->second;
}

int run_rerun(Session& s, const std::string& manifest_file, const std::string& output) {
  s.stage("read manifest");
  const Manifest m = Manifest::load(manifest_file);
  s.stage("verify inputs");
  verify_inputs(m);
  if (m.command == "segment") {
    SegmentJob job{input_or_empty(m, "input"), input_or_empty(m, "features"),
                   output.empty() ? m.outputs.at("labels") : output,
                   output.empty() ? output_or_empty(m, "ply") : std::string(), m.config,
                   m.parameters.at("sigma")};
    return run_segment(s, job);
  }
  if (m.command == "pseudo-labels") {
    PseudoJob job{input_or_empty(m, "input"), input_or_empty(m, "features"),
                  output.empty() ? m.outputs.at("prefix") : output,
                  output.empty() ? output_or_empty(m, "ply") : std::string(), m.config,
                  m.parameters.at("sigma_low"), m.parameters.at("sigma_high")};
    return run_pseudo(s, job);
  }
  if (m.command == "refine") {
    RefineJob job{input_or_empty(m, "base"), input_or_empty(m, "under"),
                  input_or_empty(m, "input"), input_or_empty(m, "features"),
                  output.empty() ? m.outputs.at("labels") : output,
                  output.empty() ? output_or_empty(m, "ply") : std::string(), m.config};
    return run_refine(s, job);
  }
  throw FormatError("manifest: unknown command '" + m.command + "'");
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return kConfig;
    default: return kData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label-free point-cloud instance segmentation by multicut partitioning", "mcseg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mcseg 0.1.0");

  // segment
  auto* seg = app.add_subcommand("segment", "segment one scene at a single sigma level");
  SegmentJob seg_job;
  ConfigArgs seg_cfg;
  std::optional<double> seg_sigma;
  seg->add_option("--input", seg_job.input, "input PLY")->required();
  seg->add_option("--features", seg_job.features, "per-point FPF1 feature file");
  seg->add_option("--sigma", seg_sigma, "affinity shift (default sigma.low)");
  seg->add_option("--output", seg_job.output, "output label file")->required();
  seg->add_option("--export-ply", seg_job.export_ply, "also write a label-colored PLY");
  seg_cfg.attach(seg);

  // pseudo-labels
  auto* pseudo = app.add_subcommand("pseudo-labels", "base and under-segmented labels in one pass");
  PseudoJob pseudo_job;
  ConfigArgs pseudo_cfg;
  std::optional<double> sigma_low, sigma_high;
  pseudo->add_option("--input", pseudo_job.input, "input PLY")->required();
  pseudo->add_option("--features", pseudo_job.features, "per-point FPF1 feature file");
  pseudo->add_option("--sigma-low", sigma_low, "shift for base labels (default sigma.low)");
  pseudo->add_option("--sigma-high", sigma_high, "shift for under labels (default sigma.high)");
  pseudo->add_option("--output", pseudo_job.prefix,
                     "output prefix; writes PREFIX.base.labels and PREFIX.under.labels")
      ->required();
  pseudo->add_option("--export-ply", pseudo_job.export_ply, "prefix for label-colored PLYs");
  pseudo_cfg.attach(pseudo);

  // refine
  auto* refine = app.add_subcommand("refine", "merge base instances inside one coarse instance");
  RefineJob refine_job;
  ConfigArgs refine_cfg;
  refine->add_option("--base", refine_job.base, "base (low sigma) label file")->required();
  refine->add_option("--under", refine_job.under, "under-segmented (high sigma) label file")
      ->required();
  refine->add_option("--input", refine_job.input, "input PLY")->required();
  refine->add_option("--features", refine_job.features, "per-point FPF1 feature file");
  refine->add_option("--output", refine_job.output, "output label file")->required();
  refine->add_option("--export-ply", refine_job.export_ply, "also write a label-colored PLY");
  refine_cfg.attach(refine);

  // eval
  auto* ev = app.add_subcommand("eval", "class-agnostic AP of predicted labels");
  std::string pred_path, gt_path;
  bool kv = false;
  ev->add_option("--pred", pred_path, "predicted label file")->required();
  ev->add_option("--gt", gt_path, "ground-truth label file")->required();
  ev->add_flag("--kv", kv, "print key=value lines");

  // rerun
  auto* rerun = app.add_subcommand("rerun", "repeat a run recorded in a manifest");
  std::string manifest_file, rerun_output;
  rerun->add_option("--manifest", manifest_file, "manifest JSON")->required();
  rerun->add_option("--output", rerun_output, "write to this path/prefix instead");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic blob scene and its ground truth");
  synthetic::BlobSceneParams synth_params;
  std::string synth_out, synth_gt;
  synth->add_option("--output", synth_out, "output PLY")->required();
  synth->add_option("--gt", synth_gt, "ground-truth label file")->required();
  synth->add_option("--seed", synth_params.seed, "scene seed");
  synth->add_option("--blobs", synth_params.blobs, "number of blobs");
  synth->add_option("--points-per-blob", synth_params.points_per_blob, "points per blob");
  synth->add_option("--ground-points", synth_params.ground_points, "ground plane points");
  synth->add_flag("--split", synth_params.split_blobs, "make each blob two touching parts");

  // config
  auto* cfg = app.add_subcommand("config", "print the resolved configuration");
  ConfigArgs cfg_args;
  cfg_args.attach(cfg);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Session session(out, err);
  try {
    if (seg->parsed()) {
      seg_job.config = seg_cfg.resolve();
      seg_job.sigma = seg_sigma.value_or(seg_job.config.sigma_low);
      return run_segment(session, seg_job);
    }
    if (pseudo->parsed()) {
      pseudo_job.config = pseudo_cfg.resolve();
      pseudo_job.sigma_low = sigma_low.value_or(pseudo_job.config.sigma_low);
      pseudo_job.sigma_high = sigma_high.value_or(pseudo_job.config.sigma_high);
      return run_pseudo(session, pseudo_job);
    }
    if (refine->parsed()) {
      refine_job.config = refine_cfg.resolve();
      return run_refine(session, refine_job);
    }
    if (ev->parsed()) return run_eval(session, pred_path, gt_path, kv);
    if (rerun->parsed()) return run_rerun(session, manifest_file, rerun_output);
    if (synth->parsed()) {
      session.stage("synthesize");
      const auto scene = synthetic::planted_blobs(synth_params);
      io::write_ply(scene.cloud, std::nullopt, synth_out);
      io::write_labels(scene.ground_truth, synth_gt);
      out << "points " << scene.cloud.size() << "\n";
      return kOk;
    }
    if (cfg->parsed()) {
      session.stage("resolve config");
      out << cfg_args.resolve().to_text();
      return kOk;
    }
  } catch (const Error& e) {
    err << "mcseg: " << session.stage() << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "mcseg: " << session.stage() << ": " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace mcseg::cli
