/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boxmend/coco.hpp"
#include "boxmend/error.hpp"
#include "boxmend/evaluation.hpp"
#include "boxmend/fmc.hpp"
#include "boxmend/image.hpp"
#include "boxmend/interpolation.hpp"
#include "boxmend/noise.hpp"
#include "boxmend/provider.hpp"
#include "boxmend/synth.hpp"
#include "boxmend/worker.hpp"
#include "cli.hpp"
#include "manifest.hpp"

#ifndef BOXMEND_VERSION
#define BOXMEND_VERSION "0.0.0"
#endif

namespace boxmend::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultSidecarCommand = "python3 -m boxmend_sidecar";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------- providers

struct ProviderOptions {
  std::string provider = "oracle";
  std::string oracle_truth;
  double jitter = 0.0;
  double part_prob = 0.0;
  double leak_prob = 0.0;
  std::uint64_t oracle_seed = 0;
  double temperature = kDefaultLabelTemperature;
  double timeout_seconds = 120.0;
  std::string images;
  int jobs = default_jobs();
};

void add_provider_options(CLI::App* sub, ProviderOptions& o, bool with_truth_flag) {
  sub->add_option("--provider", o.provider, "oracle | worker | worker:<command>")->capture_default_str();
  if (with_truth_flag) {
    sub->add_option("--oracle-truth", o.oracle_truth, "COCO file with instance masks backing the oracle provider");
  }
  sub->add_option("--jitter", o.jitter, "oracle boundary jitter in pixels")->capture_default_str();
  sub->add_option("--part-prob", o.part_prob, "oracle part-mask probability")->capture_default_str();
  sub->add_option("--leak-prob", o.leak_prob, "oracle background-leak probability")->capture_default_str();
  sub->add_option("--oracle-seed", o.oracle_seed, "oracle RNG seed")->capture_default_str();
  sub->add_option("--temperature", o.temperature, "oracle label-score softmax temperature")->capture_default_str();
  sub->add_option("--timeout", o.timeout_seconds, "per-request provider timeout in seconds")->capture_default_str();
  sub->add_option("--images", o.images, "directory holding the image files");
  sub->add_option("--jobs", o.jobs, "images processed in parallel")->capture_default_str();
}

struct ProviderHandle {
  std::unique_ptr<MaskProvider> provider;
  std::function<std::string(const ImageRecord&)> image_ref;
};

ProviderHandle make_provider(const ProviderOptions& o, const Dataset* truth, int candidates) {
  ProviderHandle h;
  if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
  const std::string images = o.images;
  h.image_ref = [images](const ImageRecord& r) {
    return images.empty() ? r.file_path : (fs::path(images) / r.file_path).string();
  };
  if (o.provider == "oracle") {
    if (truth == nullptr) throw UsageError("the oracle provider needs --oracle-truth");
    OracleFidelity f;
    f.boundary_jitter = o.jitter;
    f.part_mask_prob = o.part_prob;
    f.background_leak_prob = o.leak_prob;
    f.candidates_per_prompt = candidates;
    f.seed = o.oracle_seed;
    h.provider = std::make_unique<OracleProvider>(*truth, f, o.temperature);
    return h;
  }
  std::string command;
  if (o.provider == "worker") {
    const char* env = std::getenv("BOXMEND_WORKER");
    command = env != nullptr && *env != '\0' ? env : kDefaultSidecarCommand;
  } else if (o.provider.starts_with("worker:")) {
    command = o.provider.substr(7);
  } else {
    throw UsageError("unknown provider \"" + o.provider + "\" (expected oracle, worker or worker:<command>)");
  }
  if (!(o.timeout_seconds > 0)) throw UsageError("--timeout must be positive");
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(o.timeout_seconds * 1000.0));
  auto pool = std::make_shared<WorkerPool>(WorkerOptions{command}, static_cast<std::size_t>(o.jobs));
  h.provider = std::make_unique<ChannelProvider>(pool, timeout);
  return h;
}

MixingPolicy parse_policy(const std::string& spec, std::vector<fs::path>* inputs) {
  if (spec == "heuristic") return MixingPolicy::heuristic();
  if (spec.starts_with("constant:")) {
    const auto text = spec.substr(9);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw UsageError("bad constant policy \"" + spec + "\"");
    return MixingPolicy::constant_gamma(v);
  }
  if (spec.starts_with("learned:")) {
    const fs::path path = spec.substr(8);
    if (inputs) inputs->push_back(path);
    const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::kParseError, path.string() + " is not valid JSON");
    return MixingPolicy::learned(mlp_from_json(j));
  }
  throw UsageError("unknown policy \"" + spec + "\" (expected constant:<g>, heuristic or learned:<file>)");
}

nlohmann::json load_json(const fs::path& path) {
  auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kParseError, path.string() + " is not valid JSON");
  return j;
}

std::vector<Detection> load_detections(const fs::path& path) {
  const auto j = load_json(path);
  if (j.is_object() && j.contains("annotations")) return detections_from_dataset(parse_coco(j.dump()));
  return detections_from_json(j);
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- commands

struct Command {
  CLI::App* app = nullptr;
  std::string manifest;
  std::function<int(RunManifest&)> run;
  std::function<fs::path()> default_manifest;
};

nlohmann::ordered_json collect_flags(const CLI::App& app) {
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "manifest") continue;
    if (opt->count() > 0) {
      flags[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      flags[name] = opt->get_default_str();
    }
  }
  return flags;
}

fs::path sibling_manifest(const std::string& output) { return fs::path(output + ".manifest.json"); }

struct Cli {
  CLI::App app{"boxmend: bounding-box noise injection, foundation-model correction and evaluation"};
  std::deque<Command> commands;
  std::ostream& out;
  std::ostream& err;

  // Flag storage shared by the subcommands; only one is parsed per run.
  std::string spec_path, out_dir, in_path, out_path, records_path, corrected_path, noisy_path, truth_path;
  std::string dets_path, gts_path, perfs_path, policy = "heuristic", plot_csv, report_csv, variant = "all";
  int count = 1;
  std::optional<std::uint64_t> seed_override;
  double level = 0.0;
  std::uint64_t seed = 0;
  FmcConfig fmc;
  ProviderOptions provider;
  double iou_threshold = 0.5;
  double base_perf = 0.0;
  TrainOptions train;

  Cli(std::ostream& o, std::ostream& e) : out(o), err(e) {
    app.set_version_flag("--version", BOXMEND_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.footer("Every subcommand accepts --config FILE: a JSON object whose keys mirror the long flag names.\n"
               "Flags given on the command line win over the file.\n"
               "Exit codes: 0 success, 1 usage error, 2 data error, 3 provider failure.");
    add_gen_synth();
    add_inject_noise();
    add_correct();
    add_interpolate();
    add_train_gamma();
    add_evaluate();
    add_robustness();
    add_validate();
    add_pipeline();
  }

  Command& add(const std::string& name, const std::string& description) {
    Command c;
    c.app = app.add_subcommand(name, description);
    commands.push_back(std::move(c));
    auto& cmd = commands.back();
    cmd.app->add_option("--manifest", cmd.manifest, "where to write the run manifest");
    return cmd;
  }

  void add_fmc_options(CLI::App* sub) {
    sub->add_option("--alpha", fmc.alpha, "label-score weight in the fused score")->capture_default_str();
    sub->add_option("--lambda", fmc.lambda_iou, "minimum IoU(noisy, corrected) to accept")->capture_default_str();
    sub->add_option("--candidates", fmc.candidates_per_prompt, "candidate masks per prompt")->capture_default_str();
  }

  void add_gen_synth() {
    auto& c = add("gen-synth", "Generate synthetic shape scenes: PNG images plus one COCO file with masks");
    c.app->add_option("--spec", spec_path, "scene spec JSON");
    c.app->add_option("--out-dir", out_dir, "output directory")->required();
    c.app->add_option("--count", count, "number of scenes")->capture_default_str();
    c.app->add_option("--seed", seed_override, "override the spec seed");
    c.default_manifest = [this] { return fs::path(out_dir) / "manifest.json"; };
    c.run = [this](RunManifest& m) {
      SceneSpec spec;
      if (!spec_path.empty()) {
        spec = spec_from_json(load_json(spec_path));
        m.inputs.push_back(spec_path);
      }
      if (seed_override) spec.seed = *seed_override;
      if (count < 1) throw UsageError("--count must be >= 1");
      m.seeds["scene_seed"] = spec.seed;
      const auto scenes = generate_scenes(spec, count);
      for (const auto& s : scenes) {
        const fs::path p = fs::path(out_dir) / s.record.file_path;
        write_png(s.image, p);
        m.outputs.push_back(p);
      }
      const fs::path ann = fs::path(out_dir) / "annotations.json";
      save_coco(scenes_to_dataset(scenes), ann);
      m.outputs.push_back(ann);
      write_json(fs::path(out_dir) / "spec.json", spec_to_json(spec));
      m.outputs.push_back(fs::path(out_dir) / "spec.json");
      err << "wrote " << scenes.size() << " scenes to " << out_dir << "\n";
      return kExitOk;
    };
  }

  void add_inject_noise() {
    auto& c = add("inject-noise", "Perturb every box with uniform shift/scale noise");
    c.app->add_option("--in", in_path, "input COCO file")->required();
    c.app->add_option("--out", out_path, "output COCO file")->required();
    c.app->add_option("--level", level, "noise level in [0,1]")->required();
    c.app->add_option("--seed", seed, "noise seed")->capture_default_str();
    c.default_manifest = [this] { return sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.push_back(in_path);
      m.seeds["noise_seed"] = seed;
      save_coco(inject(load_coco(in_path), NoiseConfig{level, seed}), out_path);
      m.outputs.push_back(out_path);
      return kExitOk;
    };
  }

  void add_correct() {
    auto& c = add("correct", "Correct noisy boxes with the foundation-model correction pipeline");
    c.app->add_option("--in", in_path, "noisy COCO file")->required();
    c.app->add_option("--out", out_path, "corrected COCO file")->required();
    c.app->add_option("--records", records_path, "per-annotation correction records (JSON)");
    add_fmc_options(c.app);
    add_provider_options(c.app, provider, true);
    c.default_manifest = [this] { return sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.push_back(in_path);
      const Dataset noisy = load_coco(in_path);
      std::optional<Dataset> truth;
      if (!provider.oracle_truth.empty()) {
        truth = load_coco(provider.oracle_truth);
        m.inputs.push_back(provider.oracle_truth);
      }
      m.seeds["oracle_seed"] = provider.oracle_seed;
      auto h = make_provider(provider, truth ? &*truth : nullptr, fmc.candidates_per_prompt);
      const auto result = correct_dataset(noisy, *h.provider, fmc, {provider.jobs, h.image_ref});
      save_coco(result.dataset, out_path);
      m.outputs.push_back(out_path);
      if (!records_path.empty()) {
        write_json(records_path, records_to_json(result.records));
        m.outputs.push_back(records_path);
      }
      return summarize(result);
    };
  }

  int summarize(const CorrectionResult& r) {
    const auto accepted = std::count_if(r.records.begin(), r.records.end(), [](const auto& x) { return x.accepted; });
    err << "corrected " << r.records.size() << " annotations: " << accepted << " accepted, "
        << (static_cast<std::ptrdiff_t>(r.records.size()) - accepted) << " kept noisy";
    if (r.failed_images > 0) {
      err << "; provider failed on " << r.failed_images << " image(s)\n";
      for (const auto& rec : r.records) {
        if (rec.reject_reason == RejectReason::kProviderError) {
          err << "  first failure: " << rec.detail << "\n";
          break;
        }
      }
      return kExitProvider;
    }
    err << "\n";
    return kExitOk;
  }

  void add_interpolate() {
    auto& c = add("interpolate", "Mix corrected and noisy boxes: b* = g * corrected + (1 - g) * noisy");
    c.app->add_option("--corrected", corrected_path, "corrected COCO file")->required();
    c.app->add_option("--noisy", noisy_path, "noisy COCO file")->required();
    c.app->add_option("--records", records_path, "correction records (needed by the heuristic policy)");
    c.app->add_option("--policy", policy, "constant:<g> | heuristic | learned:<params.json>")->capture_default_str();
    c.app->add_option("--out", out_path, "output COCO file")->required();
    c.default_manifest = [this] { return sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.insert(m.inputs.end(), {corrected_path, noisy_path});
      const auto pol = parse_policy(policy, &m.inputs);
      std::vector<CorrectionRecord> records;
      if (!records_path.empty()) {
        records = records_from_json(load_json(records_path));
        m.inputs.push_back(records_path);
      } else if (pol.kind == MixingPolicy::Kind::kHeuristic) {
        throw UsageError("the heuristic policy needs --records");
      }
      save_coco(apply_interpolation(load_coco(corrected_path), load_coco(noisy_path), records, pol), out_path);
      m.outputs.push_back(out_path);
      return kExitOk;
    };
  }

  void add_train_gamma() {
    auto& c = add("train-gamma", "Fit the mixing-value network against grid-searched optimal mixing values");
    c.app->add_option("--corrected", corrected_path, "corrected COCO file")->required();
    c.app->add_option("--noisy", noisy_path, "noisy COCO file")->required();
    c.app->add_option("--truth", truth_path, "ground-truth COCO file")->required();
    c.app->add_option("--out", out_path, "parameter file (JSON)")->required();
    c.app->add_option("--seed", train.seed, "initialisation seed")->capture_default_str();
    c.app->add_option("--epochs", train.epochs, "gradient-descent epochs")->capture_default_str();
    c.app->add_option("--step", train.step, "gradient-descent step size")->capture_default_str();
    c.default_manifest = [this] { return sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.insert(m.inputs.end(), {corrected_path, noisy_path, truth_path});
      m.seeds["init_seed"] = train.seed;
      const auto pairs = make_training_pairs(load_coco(corrected_path), load_coco(noisy_path), load_coco(truth_path));
      const auto result = mlp_train(pairs, train);
      auto j = mlp_to_json(result.params);
      j["training"] = {{"pairs", pairs.size()},
                       {"seed", train.seed},
                       {"epochs", train.epochs},
                       {"step", train.step},
                       {"initial_loss", result.initial_loss},
                       {"final_loss", result.final_loss}};
      write_json(out_path, j);
      m.outputs.push_back(out_path);
      err << "trained on " << pairs.size() << " pairs: loss " << result.initial_loss << " -> " << result.final_loss
          << "\n";
      return kExitOk;
    };
  }

  void add_evaluate() {
    auto& c = add("evaluate", "Per-class AP and mAP of detections against ground truth");
    c.app->add_option("--dets", dets_path, "detections (COCO results array, or a COCO file scored at 1.0)")
        ->required();
    c.app->add_option("--gts", gts_path, "ground-truth COCO file")->required();
    c.app->add_option("--iou", iou_threshold, "IoU threshold for a true positive")->capture_default_str();
    c.app->add_option("--out", out_path, "report file (JSON); printed to stdout when omitted");
    c.default_manifest = [this] { return out_path.empty() ? fs::path() : sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.insert(m.inputs.end(), {dets_path, gts_path});
      const auto dets = load_detections(dets_path);
      const auto report = evaluate_detections(dets, load_coco(gts_path), iou_threshold);
      emit(report.to_json(), m);
      return kExitOk;
    };
  }

  void add_robustness() {
    auto& c = add("robustness", "Mean absolute error between a base performance and performance under noise");
    c.app->add_option("--base", base_perf, "no-noise reference performance")->required();
    c.app->add_option("--perfs", perfs_path, "CSV with columns level,perf")->required();
    c.app->add_option("--out", out_path, "profile file (JSON); printed to stdout when omitted");
    c.app->add_option("--plot-csv", plot_csv, "level,perf,drop rows for plotting");
    c.default_manifest = [this] { return out_path.empty() ? fs::path() : sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.push_back(perfs_path);
      const auto profile = robustness_mae(base_perf, parse_levels_csv(read_text_file(perfs_path)));
      emit(profile.to_json(), m);
      if (!plot_csv.empty()) {
        write_text_file(plot_csv, profile.to_csv());
        m.outputs.push_back(plot_csv);
      }
      return kExitOk;
    };
  }

  void add_validate() {
    auto& c = add("validate", "Check a COCO file for integrity problems");
    c.app->add_option("--in", in_path, "COCO file")->required();
    c.app->add_option("--out", out_path, "report file (JSON); printed to stdout when omitted");
    c.default_manifest = [this] { return out_path.empty() ? fs::path() : sibling_manifest(out_path); };
    c.run = [this](RunManifest& m) {
      m.inputs.push_back(in_path);
      const auto report = validate(load_coco(in_path));
      emit(report.to_json(), m);
      err << report.error_count() << " error(s), " << report.warning_count() << " warning(s)\n";
      return report.error_count() > 0 ? kExitData : kExitOk;
    };
  }

  void add_pipeline() {
    auto& c = add("pipeline", "inject -> correct -> interpolate -> evaluate in one run");
    c.app->add_option("--truth", truth_path, "clean COCO file with masks; synthetic scenes are generated when omitted");
    c.app->add_option("--spec", spec_path, "scene spec JSON for generated data");
    c.app->add_option("--count", count, "generated scenes")->capture_default_str();
    c.app->add_option("--level", level, "noise level in [0,1]")->required();
    c.app->add_option("--seed", seed, "noise seed")->capture_default_str();
    c.app->add_option("--policy", policy, "mixing policy for the interpolation variant")->capture_default_str();
    c.app->add_option("--variant", variant, "fmc | fmc+interp | all")->capture_default_str();
    c.app->add_option("--iou", iou_threshold, "IoU threshold for evaluation")->capture_default_str();
    c.app->add_option("--out-dir", out_dir, "output directory")->required();
    add_fmc_options(c.app);
    add_provider_options(c.app, provider, false);
    c.default_manifest = [this] { return fs::path(out_dir) / "manifest.json"; };
    c.run = [this](RunManifest& m) { return run_pipeline(m); };
  }

  int run_pipeline(RunManifest& m) {
    if (variant != "fmc" && variant != "fmc+interp" && variant != "all") {
      throw UsageError("unknown variant \"" + variant + "\"");
    }
    const fs::path dir = out_dir;
    Dataset truth;
    if (!truth_path.empty()) {
      truth = load_coco(truth_path);
      m.inputs.push_back(truth_path);
    } else {
      SceneSpec spec;
      if (!spec_path.empty()) {
        spec = spec_from_json(load_json(spec_path));
        m.inputs.push_back(spec_path);
      }
      if (count < 1) throw UsageError("--count must be >= 1");
      m.seeds["scene_seed"] = spec.seed;
      const auto scenes = generate_scenes(spec, count);
      for (const auto& s : scenes) write_png(s.image, dir / "images" / s.record.file_path);
      if (provider.images.empty()) provider.images = (dir / "images").string();
      truth = scenes_to_dataset(scenes);
      save_coco(truth, dir / "truth.json");
      m.outputs.push_back(dir / "truth.json");
    }
    m.seeds["noise_seed"] = seed;
    m.seeds["oracle_seed"] = provider.oracle_seed;

    const Dataset noisy = inject(truth, NoiseConfig{level, seed});
    save_coco(noisy, dir / "noisy.json");
    m.outputs.push_back(dir / "noisy.json");

    auto h = make_provider(provider, &truth, fmc.candidates_per_prompt);
    const auto result = correct_dataset(noisy, *h.provider, fmc, {provider.jobs, h.image_ref});
    save_coco(result.dataset, dir / "corrected.json");
    write_json(dir / "records.json", records_to_json(result.records));
    m.outputs.insert(m.outputs.end(), {dir / "corrected.json", dir / "records.json"});

    nlohmann::ordered_json report;
    report["noise_level"] = level;
    auto score = [&](const Dataset& d) {
      nlohmann::ordered_json s;
      s["map"] = evaluate_detections(detections_from_dataset(d), truth, iou_threshold).map;
      s["mean_iou"] = mean_iou_against(d, truth);
      return s;
    };
    report["noisy"] = score(noisy);
    report["fmc"] = score(result.dataset);
    const auto correction = correction_report(noisy, result.dataset, truth, result.records);
    report["correction"] = correction.to_json();
    write_text_file(dir / "correction.csv", correction.to_csv());
    m.outputs.push_back(dir / "correction.csv");

    if (variant != "fmc") {
      const auto pol = parse_policy(policy, &m.inputs);
      const auto mixed = apply_interpolation(result.dataset, noisy, result.records, pol);
      save_coco(mixed, dir / "interpolated.json");
      m.outputs.push_back(dir / "interpolated.json");
      report["fmc+interp"] = score(mixed);
      report["fmc+interp"]["policy"] = pol.describe();
    }
    write_json(dir / "report.json", report);
    m.outputs.push_back(dir / "report.json");
    out << report.dump(2) << "\n";
    return summarize(result);
  }

  void emit(const nlohmann::ordered_json& j, RunManifest& m) {
    if (out_path.empty()) {
      out << j.dump(2) << "\n";
    } else {
      write_json(out_path, j);
      m.outputs.push_back(out_path);
    }
  }
};

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  try {
    args = expand_config(args);
  } catch (const Error& e) {
    err << "boxmend: " << e.what() << "\n";
    return kExitUsage;
  }

  Cli cli(out, err);
  std::reverse(args.begin(), args.end());
  try {
    cli.app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& cmd : cli.commands) {
    if (!cmd.app->parsed()) continue;
    RunManifest manifest;
    manifest.tool_version = BOXMEND_VERSION;
    manifest.subcommand = cmd.app->get_name();
    manifest.flags = collect_flags(*cmd.app);
    int code = kExitOk;
    try {
      code = cmd.run(manifest);
    } catch (const UsageError& e) {
      err << "boxmend " << cmd.app->get_name() << ": " << e.what() << "\n" << cmd.app->help();
      return kExitUsage;
    } catch (const Error& e) {
      err << "boxmend " << cmd.app->get_name() << ": " << e.what() << "\n";
      code = is_provider_failure(e.code()) ? kExitProvider : kExitData;
      if (e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kLevelOutOfRange ||
          e.code() == ErrorCode::kGammaOutOfRange) {
        code = kExitUsage;
      }
      return code;
    } catch (const std::exception& e) {
      err << "boxmend " << cmd.app->get_name() << ": " << e.what() << "\n";
      return kExitData;
    }
    const fs::path manifest_path = cmd.manifest.empty() ? cmd.default_manifest() : fs::path(cmd.manifest);
    if (!manifest_path.empty()) {
      try {
        manifest.write(manifest_path);
      } catch (const std::exception& e) {
        err << "boxmend: cannot write manifest: " << e.what() << "\n";
        return kExitData;
      }
    }
    return code;
  }
  return kExitUsage;
}

}  // namespace boxmend::cli
