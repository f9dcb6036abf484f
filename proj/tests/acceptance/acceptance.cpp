#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "f2p/autodiff/gradcheck.hpp"
#include "f2p/cli/checkpoint.hpp"
#include "f2p/cli/config.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/evalkit/evalkit.hpp"
#include "f2p/renderer/render.hpp"

using namespace f2p;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path sibling(const fs::path& p, const std::string& ext) {
  auto out = p;
  out += ext;
  return out;
}

json read_summary(const fs::path& ckpt) {
  std::ifstream in(sibling(ckpt, ".jsonl"));
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  if (last.empty()) throw Error("missing training report for " + ckpt.string());
  return json::parse(last).at("summary");
}

void write_summary(const fs::path& ckpt, const json& summary) {
  std::ofstream(sibling(ckpt, ".jsonl")) << json{{"summary", summary}}.dump() << "\n";
}

render::Dataset cached_dataset(const fs::path& cache, const PipelineConfig& cfg) {
  const auto dir = cache / "data";
  if (fs::exists(dir / "manifest.json")) return render::read_dataset(dir);
  std::printf("generating %zu samples into %s\n", cfg.data_n, dir.string().c_str());
  auto data = render::sample_dataset(cfg.data_n, cfg.data_seed);
  render::write_dataset(dir, data, true);
  return data;
}

imitator::Imitator cached_imitator(const fs::path& cache, const PipelineConfig& cfg, const render::Dataset& data) {
  const auto path = cache / "imitator.f2pc";
  if (fs::exists(path)) return imitator::load_imitator(path);
  std::printf("training imitator for %zu epochs\n", cfg.imitator.epochs);
  imitator::Imitator net(cfg.imitator.seed);
  const auto r = imitator::train_imitator(net, data, cfg.imitator);
  save_checkpoint(path, net.state());
  write_summary(path, {{"best_val_l1", r.best_val_l1}, {"baseline_l1", r.baseline_l1}, {"seconds", r.seconds}});
  return net;
}

extractors::Recognizer cached_recognizer(const fs::path& cache, const PipelineConfig& cfg,
                                         const render::IdentitySet& corpus) {
  const auto path = cache / "recognizer.f2pc";
  if (fs::exists(path)) return extractors::load_recognizer(path);
  std::printf("training recognizer for %zu epochs\n", cfg.recognizer.epochs);
  extractors::Recognizer net(cfg.identities, cfg.recognizer.seed);
  const auto r = extractors::train_recognizer(net, corpus, cfg.recognizer);
  save_checkpoint(path, net.state());
  write_summary(path, {{"heldout_accuracy", r.heldout_accuracy}, {"seconds", r.seconds}});
  return net;
}

extractors::Segmenter cached_segmenter(const fs::path& cache, const PipelineConfig& cfg,
                                       const render::Dataset& data) {
  const auto path = cache / "segmenter.f2pc";
  if (fs::exists(path)) return extractors::load_segmenter(path);
  std::printf("training segmenter for %zu epochs\n", cfg.segmenter.epochs);
  extractors::Segmenter net(cfg.segmenter.seed);
  const auto r = extractors::train_segmenter(net, data, cfg.segmenter);
  save_checkpoint(path, net.state());
  write_summary(path, {{"mean_iou", r.mean_iou}, {"seconds", r.seconds}});
  return net;
}

template <typename Net>
Net to_double(const auto& source, Net net) {
  ad::copy_state(source.state(), net.state());
  return net;
}

void gradient_suite(const evalkit::Models& models, const PipelineConfig& cfg) {
  const auto start = Clock::now();
  const auto ops = ad::run_gradcheck_suite(1);
  double worst_op = 0;
  std::string failed;
  for (const auto& r : ops) {
    worst_op = std::max(worst_op, r.max_rel_error);
    if (!r.passed) failed += " " + r.name;
  }

  const auto g = to_double(models.g, imitator::ImitatorNet<double>(0));
  const auto f1 = to_double(models.f1, extractors::RecognizerNet<double>(models.f1.identities(), 0));
  const auto f2 = to_double(models.f2, extractors::SegmenterNet<double>(0));
  double worst_composite = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto target = evalkit::make_target(31, i, 0.0f);
    std::mt19937_64 rng(100 + i);
    const auto x = render::sample_params(rng);
    worst_composite =
        std::max(worst_composite, search::composite_gradient_error({g, f1, f2}, x, target.image, cfg.search));
  }
  const double seconds = since(start);
  report(1, failed.empty() && worst_composite <= 1e-2 && seconds <= 120,
         fmt("%zu ops, worst op rel err %.2e (<= 1e-3)%s; composite rel err %.2e (<= 1e-2); %.1f s (<= 120)",
             ops.size(), worst_op, failed.empty() ? "" : (" failed:" + failed).c_str(), worst_composite, seconds));
}

void imitator_fidelity(const imitator::Imitator& g, const render::Dataset& data, double train_seconds) {
  const auto start = Clock::now();
  const std::size_t pixels = render::kImageSize * render::kImageSize * 3;
  std::vector<double> mean(pixels, 0.0);
  for (auto i : data.train)
    for (std::size_t k = 0; k < pixels; ++k) mean[k] += data.samples[i].image.pixels[k];
  for (auto& m : mean) m /= static_cast<double>(data.train.size());

  double baseline = 0, model = 0;
  for (auto i : data.validation) {
    const auto& s = data.samples[i];
    const ad::Tensor x(ad::Shape{1, render::kDimension}, std::vector<float>(s.params.values.begin(), s.params.values.end()));
    const auto out = g.forward(x, ad::Mode::eval);
    const auto y = tensor_to_image(out, 0, false);
    for (std::size_t k = 0; k < pixels; ++k) {
      baseline += std::abs(s.image.pixels[k] - mean[k]);
      model += std::abs(static_cast<double>(y.pixels[k]) - s.image.pixels[k]);
    }
  }
  const double denom = static_cast<double>(data.validation.size() * pixels);
  baseline /= denom;
  model /= denom;
  const double total = train_seconds + since(start);
  report(2, model <= 0.3 * baseline && total <= 1800,
         fmt("%zu held-out: G L1 %.5f, mean-image baseline %.5f, ratio %.3f (<= 0.3); train+eval %.0f s (<= 1800)",
             data.validation.size(), model, baseline, model / baseline, total));
}

void extractor_quality(const extractors::Recognizer& f1, const render::IdentitySet& corpus,
                       const extractors::Segmenter& f2, const render::Dataset& data) {
  const double acc = extractors::recognizer_accuracy(f1, corpus, extractors::heldout_views(corpus));
  std::vector<const render::Image*> images;
  std::vector<const render::LabelMap*> labels;
  for (auto i : data.validation) {
    images.push_back(&data.samples[i].image);
    labels.push_back(&data.samples[i].labels);
  }
  const auto iou = extractors::segmentation_iou(f2, images, labels);
  const auto at = [&](render::Region r) { return iou[static_cast<std::size_t>(r)]; };
  const double eye = at(render::Region::eye), nose = at(render::Region::nose), mouth = at(render::Region::mouth);
  const double mean = extractors::mean_of(iou);
  report(3, acc >= 0.8 && mean >= 0.5 && eye >= 0.4 && nose >= 0.4 && mouth >= 0.4,
         fmt("top-1 %.4f over %zu identities (>= 0.8); mean IoU %.3f (>= 0.5); eye %.3f nose %.3f mouth %.3f (>= 0.4)",
             acc, corpus.prototypes.size(), mean, eye, nose, mouth));
}

void softmax_smoothing() {
  bool uniform = true;
  for (std::size_t d : {3, 4}) {
    const auto s = search::smooth_discrete(ad::TensorD(ad::Shape{d}, 0.7), 100.0);
    for (double v : s.data()) uniform = uniform && v == 1.0 / static_cast<double>(d);
  }
  const ad::TensorD logits(ad::Shape{4}, std::vector<double>{0.1, 0.8, 0.45, 0.79});
  bool monotone = true;
  double previous = 0;
  for (double beta : {1.0, 10.0, 100.0, 1000.0}) {
    const auto s = search::smooth_discrete(logits, beta);
    const double top = *std::max_element(s.data().begin(), s.data().end());
    monotone = monotone && top >= previous;
    previous = top;
  }
  const auto gap = search::smooth_discrete(ad::TensorD(ad::Shape{2}, std::vector<double>{1.0, 0.0}), 100.0);
  const double sep = *std::max_element(gap.data().begin(), gap.data().end());
  report(7, uniform && monotone && sep >= 1 - 1e-6,
         fmt("uniform at equal logits %s; max nondecreasing in beta %s; beta=100 gap max %.9f (>= 1-1e-6)",
             uniform ? "yes" : "no", monotone ? "yes" : "no", sep));
}

void formats(const fs::path& cache, const imitator::Imitator& g) {
  const auto bytes = encode_checkpoint(g.state());
  const auto path = cache / "roundtrip.f2pc";
  save_checkpoint(path, g.state());
  const bool ckpt_ok = encode_checkpoint(imitator::load_imitator(path).state()) == bytes;
  fs::remove(path);

  const auto data = render::sample_dataset(12, 77);
  const auto dir = cache / "roundtrip_data";
  render::write_dataset(dir, data, true);
  const auto back = render::read_dataset(dir);
  bool data_ok = back.samples.size() == data.samples.size() && back.train == data.train &&
                 back.validation == data.validation;
  for (std::size_t i = 0; data_ok && i < data.samples.size(); ++i) {
    const auto &a = data.samples[i], &b = back.samples[i];
    data_ok = a.params == b.params && a.image.pixels == b.image.pixels && a.labels.classes == b.labels.classes;
  }
  fs::remove_all(dir);

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pos(0, bytes.size() - 1);
  std::uniform_int_distribution<int> bit(0, 7);
  std::size_t detected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto corrupted = bytes;
    corrupted[pos(rng)] ^= static_cast<char>(1 << bit(rng));
    try {
      decode_checkpoint(corrupted);
    } catch (const Error&) {
      ++detected;
    }
  }
  report(9, ckpt_ok && data_ok && detected == 100,
         fmt("checkpoint round trip %s; dataset round trip %s; %zu/100 single-bit flips detected",
             ckpt_ok ? "exact" : "differs", data_ok ? "exact" : "differs", detected));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks, one line per criterion"};
  std::string cache = "acceptance_cache";
  std::size_t suite = 20;
  app.add_option("--cache", cache, "directory holding datasets and checkpoints; missing ones are trained");
  app.add_option("--n", suite, "targets per suite");
  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg;
    fs::create_directories(cache);
    const auto data = cached_dataset(cache, cfg);
    const auto corpus = render::sample_identities(cfg.identities, cfg.views, cfg.corpus_seed);
    const auto g = cached_imitator(cache, cfg, data);
    const auto f1 = cached_recognizer(cache, cfg, corpus);
    const auto f2 = cached_segmenter(cache, cfg, data);
    const evalkit::Models models{g, f1, f2};

    gradient_suite(models, cfg);
    imitator_fidelity(g, data, read_summary(fs::path(cache) / "imitator.f2pc").at("seconds").get<double>());
    extractor_quality(f1, corpus, f2, data);

    const auto recovery = evalkit::run_recovery_suite(suite, 0.0f, 1, models, cfg.search);
    report(4,
           recovery.mae().mean < 0.15 && recovery.discrete_accuracy().mean >= 2.0 / 3.0 &&
               recovery.descent_rate() >= 0.95 && recovery.seconds().mean <= 10,
           fmt("%zu targets: continuous MAE %.4f (< 0.15); discrete accuracy %.3f (>= 0.667); L_S descent %.2f "
               "(>= 0.95); %.2f s per target (<= 10)",
               recovery.rows.size(), recovery.mae().mean, recovery.discrete_accuracy().mean,
               recovery.descent_rate(), recovery.seconds().mean));

    const auto ablation = evalkit::run_ablation(suite, 0.5f, 1, models, cfg.search);
    const auto& combined = ablation.arm("combined");
    report(5, ablation.cosine_ordering_holds(),
           fmt("mean cosine combined %.4f >= L2-only %.4f >= init %.4f", combined.final_cosine().mean,
               ablation.arm("l2_only").final_cosine().mean, combined.init_cosine().mean));

    std::size_t infeasible = recovery.infeasible(), coordinates = recovery.coordinates();
    for (const auto& arm : ablation.arms) {
      infeasible += arm.report.infeasible();
      coordinates += arm.report.coordinates();
    }
    report(6, infeasible == 0, fmt("%zu of %zu iterate coordinates outside [0,1]", infeasible, coordinates));

    softmax_smoothing();

    std::vector<evalkit::Embedding> cloud;
    for (std::size_t i = 0; i < 40; ++i) cloud.push_back(evalkit::embed_all({evalkit::make_target(5, i, 0.0f).image}, f1)[0]);
    const double self = evalkit::frechet_distance(cloud, cloud);
    const auto fr = evalkit::run_frechet(suite, 100, 0.5f, 1, models, cfg.search);
    report(8, self <= 1e-6 && fr.direction_holds(),
           fmt("d(A,A) %.2e (<= 1e-6); created vs reference %.4f < targets vs reference %.4f (noise floor %.4f)",
               self, fr.created_vs_reference, fr.targets_vs_reference, fr.noise_floor));

    formats(cache, g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
