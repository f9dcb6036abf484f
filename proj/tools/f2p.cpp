#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "f2p/autodiff/gradcheck.hpp"
#include "f2p/cli/checkpoint.hpp"
#include "f2p/cli/config.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/evalkit/evalkit.hpp"
#include "f2p/extractors/extractors.hpp"
#include "f2p/imitator/train.hpp"
#include "f2p/renderer/dataset.hpp"
#include "f2p/renderer/image_io.hpp"
#include "f2p/renderer/render.hpp"
#include "f2p/search/params_file.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace f2p;

namespace {

constexpr int kOk = 0;
constexpr int kThresholdFailed = 1;

/// Config sources shared by every subcommand.
struct ConfigFlags {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "override a configuration key (key=value)");
  }

  /// Defaults, then the file, then --set entries, then flag-specific keys.
  PipelineConfig resolve(const std::vector<std::pair<std::string, std::string>>& flags) const {
    PipelineConfig cfg;
    if (!file.empty()) cfg.apply_file(file);
    for (const auto& entry : overrides) cfg.apply_text(entry);
    for (const auto& [key, value] : flags) cfg.set(key, value);
    cfg.validate();
    return cfg;
  }
};

/// Flag values that were given on the command line, as config keys.
class FlagKeys {
 public:
  void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = slots_.emplace_back(Slot{key, {}});
    cmd->add_option(flag, slot.value, help);
  }

  std::vector<std::pair<std::string, std::string>> given() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : slots_)
      if (s.value) out.emplace_back(s.key, *s.value);
    return out;
  }

 private:
  struct Slot {
    std::string key;
    std::optional<std::string> value;
  };
  std::deque<Slot> slots_;
};

void write_json_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& line : lines) text += line + "\n";
  render::write_file(path, text);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.filename().string() + suffix);
}

void progress(const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); }

struct ModelPaths {
  std::string imitator, f1, f2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--imitator", imitator, "imitator checkpoint")->required();
    cmd->add_option("--f1", f1, "recognizer checkpoint")->required();
    cmd->add_option("--f2", f2, "segmenter checkpoint")->required();
  }
};

struct LoadedModels {
  imitator::Imitator g;
  extractors::Recognizer f1;
  extractors::Segmenter f2;

  explicit LoadedModels(const ModelPaths& p)
      : g(imitator::load_imitator(p.imitator)),
        f1(extractors::load_recognizer(p.f1)),
        f2(extractors::load_segmenter(p.f2)) {}

  evalkit::Models models() const { return {g, f1, f2}; }
};

int cmd_gen_data(const PipelineConfig& cfg, const std::string& out, bool force) {
  const auto data = render::sample_dataset(cfg.data_n, cfg.data_seed);
  render::write_dataset(out, data, force);
  render::write_file(fs::path(out) / "config.json", cfg.json().dump(2) + "\n");
  std::printf("wrote %zu samples (%zu train, %zu validation) to %s\n", data.samples.size(), data.train.size(),
              data.validation.size(), out.c_str());
  return kOk;
}

int cmd_train_imitator(const PipelineConfig& cfg, const std::string& data_dir, const std::string& out) {
  const auto data = render::read_dataset(data_dir);
  imitator::Imitator net(cfg.imitator.seed);
  std::vector<std::string> lines;
  const auto report = imitator::train_imitator(net, data, cfg.imitator, [&](const imitator::EpochRecord& r) {
    lines.push_back(r.json());
    progress(lines.back());
  });
  save_checkpoint(out, net.state());
  const bool ok = report.beats_baseline(0.3);
  lines.push_back(json{{"summary",
                        {{"best_epoch", report.best_epoch},
                         {"best_val_l1", report.best_val_l1},
                         {"baseline_l1", report.baseline_l1},
                         {"ratio", report.best_val_l1 / report.baseline_l1},
                         {"beats_baseline", ok},
                         {"seconds", report.seconds}}},
                       {"config", cfg.json()}}
                      .dump());
  write_json_lines(sibling(out, ".jsonl"), lines);
  std::printf("best val L1 %.5f at epoch %zu; baseline %.5f; ratio %.3f (target < 0.3)\n", report.best_val_l1,
              report.best_epoch, report.baseline_l1, report.best_val_l1 / report.baseline_l1);
  return ok ? kOk : kThresholdFailed;
}

int cmd_train_recognizer(const PipelineConfig& cfg, const std::string& out) {
  const auto corpus = render::sample_identities(cfg.identities, cfg.views, cfg.corpus_seed);
  extractors::Recognizer net(cfg.identities, cfg.recognizer.seed);
  std::vector<std::string> lines;
  const auto report = extractors::train_recognizer(net, corpus, cfg.recognizer, [&](const auto& r) {
    lines.push_back(r.json());
    progress(lines.back());
  });
  save_checkpoint(out, net.state());
  const bool ok = report.heldout_accuracy >= 0.8;
  lines.push_back(json{{"summary", {{"heldout_accuracy", report.heldout_accuracy}, {"seconds", report.seconds}}},
                       {"config", cfg.json()}}
                      .dump());
  write_json_lines(sibling(out, ".jsonl"), lines);
  std::printf("held-out top-1 %.4f over %zu identities (target >= 0.8)\n", report.heldout_accuracy, cfg.identities);
  return ok ? kOk : kThresholdFailed;
}

int cmd_train_segmenter(const PipelineConfig& cfg, const std::string& data_dir, const std::string& out) {
  const auto data = render::read_dataset(data_dir);
  extractors::Segmenter net(cfg.segmenter.seed);
  std::vector<std::string> lines;
  const auto report = extractors::train_segmenter(net, data, cfg.segmenter, [&](const auto& r) {
    lines.push_back(r.json());
    progress(lines.back());
  });
  save_checkpoint(out, net.state());
  const bool ok = report.mean_iou >= 0.5;
  lines.push_back(json{{"summary", {{"mean_iou", report.mean_iou}, {"class_iou", report.class_iou},
                                    {"seconds", report.seconds}}},
                       {"config", cfg.json()}}
                      .dump());
  write_json_lines(sibling(out, ".jsonl"), lines);
  std::printf("validation mean IoU %.4f (target >= 0.5)\n", report.mean_iou);
  return ok ? kOk : kThresholdFailed;
}

render::Image imitator_image(const imitator::Imitator& g, const render::ParamVector& x, double beta) {
  ad::NoGradGuard guard;
  const ad::Tensor raw(ad::Shape{1, render::kDimension}, std::vector<float>(x.values.begin(), x.values.end()));
  return tensor_to_image<float>(g.forward(search::smoothed_input(raw, static_cast<float>(beta)), ad::Mode::eval));
}

int cmd_create(const PipelineConfig& cfg, const std::string& photo, const ModelPaths& paths, const std::string& out) {
  const auto target = render::center_crop_resize(render::read_ppm(photo));
  const LoadedModels loaded(paths);
  const auto result = search::create(target, cfg.search, loaded.models());

  auto doc = search::result_to_json(result);
  doc["config"] = cfg.json();
  search::write_params(out, doc);
  const auto dir = fs::path(out).parent_path();
  render::write_ppm(dir / "preview_imitator.ppm", imitator_image(loaded.g, result.x, cfg.search.beta));
  render::write_ppm(dir / "preview_engine.ppm", evalkit::created_face(result.x));
  std::vector<std::string> lines;
  for (const auto& r : result.trace)
    lines.push_back(json{{"iter", r.iter}, {"l1", r.loss.l1}, {"l2", r.loss.l2}, {"ls", r.loss.ls}, {"lr", r.lr},
                         {"x", r.x.values}}
                        .dump());
  write_json_lines(dir / "trace.jsonl", lines);
  std::printf("L_S %.6f -> %.6f over %zu iterations (%s)\n", result.trace.front().loss.ls,
              result.trace.back().loss.ls, result.trace.size() - 1, search::to_string(result.status).c_str());
  return kOk;
}

int cmd_render(const PipelineConfig& cfg, const std::string& params, const std::string& backend,
               const std::string& imitator_path, const std::string& out) {
  const auto x = search::read_params(params);
  if (backend == "engine") {
    render::write_ppm(out, render::render(render::finalize_params(x)).image);
    return kOk;
  }
  if (imitator_path.empty()) throw Error("--backend imitator requires --imitator");
  render::write_ppm(out, imitator_image(imitator::load_imitator(imitator_path), x, cfg.search.beta));
  return kOk;
}

void write_report(const std::string& path, json doc, const PipelineConfig& cfg) {
  doc["config"] = cfg.json();
  if (!path.empty()) render::write_file(path, doc.dump(2) + "\n");
}

int cmd_recover(const PipelineConfig& cfg, const ModelPaths& paths, std::size_t n, float shift, std::uint64_t seed,
                const std::string& out) {
  const LoadedModels loaded(paths);
  const auto report = evalkit::run_recovery_suite(n, shift, seed, loaded.models(), cfg.search);
  write_report(out, report.json(), cfg);
  std::printf("%s", evalkit::summary_table({{"recover", &report}}).c_str());
  const bool ok = report.mae().mean < 0.15 && report.discrete_accuracy().mean >= 2.0 / 3.0 &&
                  report.descent_rate() >= 0.95 && report.infeasible() == 0;
  return ok ? kOk : kThresholdFailed;
}

int cmd_ablate(const PipelineConfig& cfg, const ModelPaths& paths, std::size_t n, float shift, std::uint64_t seed,
               const std::string& out) {
  const LoadedModels loaded(paths);
  const auto report = evalkit::run_ablation(n, shift, seed, loaded.models(), cfg.search);
  write_report(out, report.json(), cfg);
  std::vector<std::pair<std::string, const evalkit::RecoveryReport*>> rows;
  for (const auto& arm : report.arms) rows.emplace_back(arm.name, &arm.report);
  std::printf("%s", evalkit::summary_table(rows).c_str());
  std::printf("cosine ordering combined >= L2-only >= init: %s\n", report.cosine_ordering_holds() ? "holds" : "fails");
  return report.cosine_ordering_holds() ? kOk : kThresholdFailed;
}

std::vector<render::Image> read_image_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".ppm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(dir + ": no .ppm images");
  std::vector<render::Image> images;
  for (const auto& f : files) images.push_back(render::center_crop_resize(render::read_ppm(f)));
  return images;
}

int cmd_frechet(const PipelineConfig& cfg, const ModelPaths& paths, const std::string& a, const std::string& b,
                std::size_t n, std::size_t reference, float shift, std::uint64_t seed, const std::string& out) {
  if (!a.empty() || !b.empty()) {
    if (a.empty() || b.empty()) throw Error("--a and --b must be given together");
    const auto f1 = extractors::load_recognizer(paths.f1);
    const double d = evalkit::frechet_distance(read_image_dir(a), read_image_dir(b), f1);
    std::printf("%s\n", json(d).dump().c_str());
    write_report(out, json{{"frechet_distance", d}}, cfg);
    return kOk;
  }
  if (paths.imitator.empty() || paths.f2.empty()) throw Error("experiment mode requires --imitator and --f2");
  const LoadedModels loaded(paths);
  const auto result = evalkit::run_frechet(n, reference, shift, seed, loaded.models(), cfg.search);
  write_report(out, result.json(), cfg);
  std::printf("%s\n", result.json().dump(2).c_str());
  return result.direction_holds() ? kOk : kThresholdFailed;
}

int cmd_robust(const PipelineConfig& cfg, const ModelPaths& paths, const std::vector<float>& strengths,
               std::size_t n, std::uint64_t seed, const std::string& out) {
  const LoadedModels loaded(paths);
  const auto rows = evalkit::robustness_sweep(strengths, n, seed, loaded.models(), cfg.search);
  write_report(out, evalkit::robustness_json(rows), cfg);
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back("shift " + std::to_string(r.strength).substr(0, 4));
  std::vector<std::pair<std::string, const evalkit::RecoveryReport*>> table;
  for (std::size_t i = 0; i < rows.size(); ++i) table.emplace_back(names[i], &rows[i].report);
  std::printf("%s", evalkit::summary_table(table).c_str());
  return kOk;
}

int cmd_grad_check(std::uint64_t seed, const std::string& fault) {
  const auto results = ad::run_gradcheck_suite(seed, fault);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-20s max rel error %.3e (tol %.0e) %s\n", r.name.c_str(), r.max_rel_error, r.tolerance,
                r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  return ok ? kOk : kThresholdFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face-to-parameter translation: train an imitator of a procedural face renderer and recover "
               "renderer parameters from a portrait."};
  app.require_subcommand(1);
  ConfigFlags config;

  std::string out, data_dir, photo, params, backend = "engine", imitator_path, fault, dir_a, dir_b;
  bool force = false;
  std::size_t suite_n = 20, reference = 200;
  float shift = 0.0f;
  std::uint64_t eval_seed = 1, check_seed = 0;
  std::vector<float> strengths{0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
  ModelPaths models;
  FlagKeys flags;

  auto* gen = app.add_subcommand("gen-data", "sample and render a dataset");
  gen->add_option("--out", out, "output directory")->required();
  flags.add(gen, "--n", "data.n", "number of samples");
  flags.add(gen, "--seed", "data.seed", "sampling seed");
  gen->add_flag("--force", force, "overwrite a non-empty directory");
  config.attach(gen);

  auto* ti = app.add_subcommand("train-imitator", "train G to clone the renderer");
  ti->add_option("--data", data_dir, "dataset directory")->required();
  ti->add_option("--out", out, "checkpoint path")->required();
  flags.add(ti, "--epochs", "imitator.epochs", "training epochs");
  flags.add(ti, "--lr", "imitator.learning_rate", "learning rate");
  flags.add(ti, "--seed", "imitator.seed", "initialization and shuffling seed");
  config.attach(ti);

  auto* tr = app.add_subcommand("train-recognizer", "train the identity embedder F1 on a synthesized corpus");
  tr->add_option("--out", out, "checkpoint path")->required();
  flags.add(tr, "--epochs", "recognizer.epochs", "training epochs");
  flags.add(tr, "--identities", "recognizer.identities", "number of identities");
  flags.add(tr, "--views", "recognizer.views", "views per identity");
  flags.add(tr, "--seed", "recognizer.corpus_seed", "corpus seed");
  config.attach(tr);

  auto* ts = app.add_subcommand("train-segmenter", "train the face segmenter F2");
  ts->add_option("--data", data_dir, "dataset directory")->required();
  ts->add_option("--out", out, "checkpoint path")->required();
  flags.add(ts, "--epochs", "segmenter.epochs", "training epochs");
  flags.add(ts, "--lr", "segmenter.learning_rate", "learning rate");
  config.attach(ts);

  auto* cr = app.add_subcommand("create", "recover parameters for a portrait");
  cr->add_option("--photo", photo, "P6 portrait")->required()->check(CLI::ExistingFile);
  models.attach(cr);
  cr->add_option("--out", out, "params.json path")->required();
  flags.add(cr, "--alpha", "search.alpha", "identity-loss weight");
  flags.add(cr, "--beta", "search.beta", "softmax smoothing");
  flags.add(cr, "--iters", "search.max_iters", "iterations");
  flags.add(cr, "--lr", "search.learning_rate", "step size");
  config.attach(cr);

  auto* rd = app.add_subcommand("render", "render a parameter file");
  rd->add_option("--params", params, "params.json")->required();
  rd->add_option("--backend", backend, "engine or imitator")->check(CLI::IsMember({"engine", "imitator"}));
  rd->add_option("--imitator", imitator_path, "imitator checkpoint (imitator backend)");
  rd->add_option("--out", out, "output P6 image")->required();
  config.attach(rd);

  auto* ev = app.add_subcommand("eval", "evaluation suites");
  ev->require_subcommand(1);
  auto eval_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "JSON report path");
    cmd->add_option("--seed", eval_seed, "target seed");
    config.attach(cmd);
  };
  auto* rec = ev->add_subcommand("recover", "parameter recovery on engine renders");
  models.attach(rec);
  rec->add_option("--n", suite_n, "targets");
  rec->add_option("--shift", shift, "photo-shift strength");
  eval_common(rec);
  auto* abl = ev->add_subcommand("ablate", "L1-only / L2-only / combined loss ablation");
  models.attach(abl);
  abl->add_option("--n", suite_n, "targets");
  abl->add_option("--shift", shift, "photo-shift strength");
  eval_common(abl);
  auto* fr = ev->add_subcommand("frechet", "Fréchet embedding distance");
  fr->add_option("--imitator", models.imitator, "imitator checkpoint");
  fr->add_option("--f1", models.f1, "recognizer checkpoint")->required();
  fr->add_option("--f2", models.f2, "segmenter checkpoint");
  fr->add_option("--a", dir_a, "directory of .ppm images");
  fr->add_option("--b", dir_b, "directory of .ppm images");
  fr->add_option("--n", suite_n, "targets");
  fr->add_option("--reference", reference, "reference renders");
  fr->add_option("--shift", shift, "photo-shift strength");
  eval_common(fr);
  auto* rob = ev->add_subcommand("robust", "recovery across photo-shift strengths");
  models.attach(rob);
  rob->add_option("--n", suite_n, "targets per strength");
  rob->add_option("--strengths", strengths, "shift strengths")->delimiter(',');
  eval_common(rob);

  auto* gc = app.add_subcommand("grad-check", "finite-difference check of every autodiff op");
  gc->add_option("--seed", check_seed, "input seed");
  gc->add_option("--fault", fault, "corrupt the named op's backward pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gc->parsed()) return cmd_grad_check(check_seed, fault);
    const auto cfg = config.resolve(flags.given());
    if (gen->parsed()) return cmd_gen_data(cfg, out, force);
    if (ti->parsed()) return cmd_train_imitator(cfg, data_dir, out);
    if (tr->parsed()) return cmd_train_recognizer(cfg, out);
    if (ts->parsed()) return cmd_train_segmenter(cfg, data_dir, out);
    if (cr->parsed()) return cmd_create(cfg, photo, models, out);
    if (rd->parsed()) return cmd_render(cfg, params, backend, imitator_path, out);
    if (rec->parsed()) return cmd_recover(cfg, models, suite_n, shift, eval_seed, out);
    if (abl->parsed()) return cmd_ablate(cfg, models, suite_n, shift, eval_seed, out);
    if (fr->parsed()) return cmd_frechet(cfg, models, dir_a, dir_b, suite_n, reference, shift, eval_seed, out);
    if (rob->parsed()) return cmd_robust(cfg, models, strengths, suite_n, eval_seed, out);
  } catch (const Divergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kThresholdFailed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
