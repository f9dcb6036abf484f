#include "f2p/evalkit/evalkit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "f2p/common/image_tensor.hpp"
#include "f2p/renderer/photo_shift.hpp"
#include "f2p/renderer/render.hpp"
#include "f2p/renderer/seed.hpp"

namespace f2p::evalkit {

namespace {

constexpr std::uint64_t kReferenceStream = 0x7265666572656e63ULL;
constexpr std::uint64_t kFloorStream = 0x666c6f6f72736574ULL;

template <typename Fn>
Aggregate over_rows(const std::vector<RecoveryRow>& rows, Fn&& fn) {
  std::vector<double> values;
  for (const auto& r : rows) values.push_back(fn(r));
  return aggregate(values);
}

nlohmann::json aggregate_json(const Aggregate& a) { return {{"mean", a.mean}, {"std", a.stddev}}; }

std::vector<render::Image> engine_sample(std::size_t n, std::uint64_t seed) {
  std::vector<render::Image> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(render::item_seed(seed, i));
    out.push_back(render::render(render::sample_params(rng)).image);
  }
  return out;
}

}  // namespace

Target make_target(std::uint64_t seed, std::size_t index, float shift_strength) {
  std::mt19937_64 rng(render::item_seed(seed, index));
  Target t{render::sample_params(rng), {}};
  t.image = render::render(t.truth).image;
  const auto shift_seed = rng();
  if (shift_strength > 0.0f) t.image = render::photo_shift(t.image, shift_seed, shift_strength);
  return t;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return a;
}

Aggregate RecoveryReport::mae() const { return over_rows(rows, [](const auto& r) { return r.continuous_mae; }); }
Aggregate RecoveryReport::discrete_accuracy() const {
  return over_rows(rows, [](const auto& r) { return r.discrete_accuracy(); });
}
Aggregate RecoveryReport::init_cosine() const { return over_rows(rows, [](const auto& r) { return r.init_cosine; }); }
Aggregate RecoveryReport::final_cosine() const {
  return over_rows(rows, [](const auto& r) { return r.final_cosine; });
}
Aggregate RecoveryReport::feature_error() const {
  return over_rows(rows, [](const auto& r) { return r.feature_error; });
}
Aggregate RecoveryReport::seconds() const { return over_rows(rows, [](const auto& r) { return r.seconds; }); }

double RecoveryReport::descent_rate() const {
  if (rows.empty()) return 1.0;
  const auto n = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.final_ls < r.init_ls; });
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

std::size_t RecoveryReport::infeasible() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.infeasible;
  return n;
}

std::size_t RecoveryReport::coordinates() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.coordinates;
  return n;
}

nlohmann::json RecoveryReport::json() const {
  nlohmann::json out{{"shift_strength", shift_strength},
                     {"seed", seed},
                     {"n", rows.size()},
                     {"continuous_mae", aggregate_json(mae())},
                     {"discrete_accuracy", aggregate_json(discrete_accuracy())},
                     {"init_cosine", aggregate_json(init_cosine())},
                     {"final_cosine", aggregate_json(final_cosine())},
                     {"feature_error", aggregate_json(feature_error())},
                     {"seconds_per_target", aggregate_json(seconds())},
                     {"descent_rate", descent_rate()},
                     {"infeasible_coordinates", infeasible()},
                     {"checked_coordinates", coordinates()}};
  auto& targets = out["targets"] = nlohmann::json::array();
  for (const auto& r : rows)
    targets.push_back({{"index", r.index},
                       {"continuous_mae", r.continuous_mae},
                       {"discrete_correct", r.discrete_correct},
                       {"init_cosine", r.init_cosine},
                       {"final_cosine", r.final_cosine},
                       {"init_ls", r.init_ls},
                       {"final_ls", r.final_ls},
                       {"feature_error", r.feature_error},
                       {"status", r.status},
                       {"seconds", r.seconds}});
  return out;
}

render::Image created_face(const render::ParamVector& x) { return render::render(render::finalize_params(x)).image; }

double embedding_cosine(const extractors::Recognizer& f1, const render::Image& a, const render::Image& b) {
  ad::NoGradGuard guard;
  return ad::cosine(extractors::embed(f1, a), extractors::embed(f1, b)).item();
}

double feature_error(const extractors::Segmenter& f2, const render::Image& a, const render::Image& b) {
  ad::NoGradGuard guard;
  const auto weighted = [&](const render::Image& img) {
    auto [features, weights] = extractors::content_features(f2, image_to_tensor<float>(img));
    return ad::mul_channels(features, weights);
  };
  return ad::l1_loss(weighted(a), weighted(b)).item();
}

RecoveryRow evaluate_target(const Target& target, std::size_t index, const search::SearchConfig& cfg,
                            const Models& models, search::SearchResult* out) {
  const auto start = std::chrono::steady_clock::now();
  auto result = search::create(target.image, cfg, models);
  RecoveryRow row;
  row.index = index;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  double err = 0;
  for (std::size_t i = 0; i < render::kContinuous; ++i) err += std::abs(result.x[i] - target.truth[i]);
  row.continuous_mae = err / render::kContinuous;
  for (std::size_t g = 0; g < render::kGroups; ++g)
    row.discrete_correct += result.x.selected(g) == target.truth.selected(g);

  const auto init_face = created_face(result.trace.front().x);
  const auto final_face = created_face(result.x);
  row.init_cosine = embedding_cosine(models.f1, init_face, target.image);
  row.final_cosine = embedding_cosine(models.f1, final_face, target.image);
  row.feature_error = feature_error(models.f2, final_face, target.image);
  row.init_ls = result.trace.front().loss.ls;
  row.final_ls = result.trace.back().loss.ls;
  row.status = search::to_string(result.status);
  for (const auto& rec : result.trace)
    for (float v : rec.x.values) {
      ++row.coordinates;
      row.infeasible += !(v >= 0.0f && v <= 1.0f);
    }
  if (out) *out = std::move(result);
  return row;
}

RecoveryReport run_recovery_suite(std::size_t n, float shift_strength, std::uint64_t seed, const Models& models,
                                  const search::SearchConfig& cfg) {
  RecoveryReport report;
  report.shift_strength = shift_strength;
  report.seed = seed;
  for (std::size_t i = 0; i < n; ++i)
    report.rows.push_back(evaluate_target(make_target(seed, i, shift_strength), i, cfg, models));
  return report;
}

const RecoveryReport& AblationReport::arm(const std::string& name) const {
  for (const auto& a : arms)
    if (a.name == name) return a.report;
  throw Error("no ablation arm '" + name + "'");
}

bool AblationReport::cosine_ordering_holds() const {
  const double combined = arm("combined").final_cosine().mean, l2 = arm("l2_only").final_cosine().mean;
  return combined >= l2 && l2 >= arm("l2_only").init_cosine().mean;
}

bool AblationReport::feature_ordering_holds() const {
  const double l1 = arm("l1_only").feature_error().mean;
  return l1 >= arm("l2_only").feature_error().mean && l1 >= arm("combined").feature_error().mean;
}

nlohmann::json AblationReport::json() const {
  nlohmann::json out{{"cosine_ordering_holds", cosine_ordering_holds()},
                     {"feature_ordering_holds", feature_ordering_holds()}};
  for (const auto& a : arms) out["arms"][a.name] = a.report.json();
  return out;
}

AblationReport run_ablation(std::size_t n, float shift_strength, std::uint64_t seed, const Models& models,
                            const search::SearchConfig& base) {
  AblationReport report;
  auto l1_only = base, l2_only = base, combined = base;
  l1_only.use_identity = true;
  l1_only.use_content = false;
  l2_only.use_identity = false;
  l2_only.use_content = true;
  combined.use_identity = combined.use_content = true;
  for (auto& [name, cfg] : std::vector<std::pair<std::string, search::SearchConfig>>{
           {"l1_only", l1_only}, {"l2_only", l2_only}, {"combined", combined}})
    report.arms.push_back({name, run_recovery_suite(n, shift_strength, seed, models, cfg)});
  return report;
}

FrechetStats frechet_stats(std::vector<Embedding> samples) {
  if (samples.size() < 2) throw Error("frechet: need at least 2 samples per set");
  const std::size_t d = samples.front().size();
  for (const auto& s : samples)
    if (s.size() != d) throw Error("frechet: embeddings differ in dimension");
  std::sort(samples.begin(), samples.end());
  FrechetStats st;
  st.dim = d;
  st.mean.assign(d, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < d; ++i) st.mean[i] += s[i];
  for (auto& m : st.mean) m /= static_cast<double>(samples.size());
  st.cov.assign(d * d, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) st.cov[i * d + j] += (s[i] - st.mean[i]) * (s[j] - st.mean[j]);
  for (auto& c : st.cov) c /= static_cast<double>(samples.size() - 1);
  return st;
}

double frechet_distance(const std::vector<Embedding>& a, const std::vector<Embedding>& b) {
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sb < sa) std::swap(sa, sb);
  const auto s1 = frechet_stats(sa), s2 = frechet_stats(sb);
  if (s1.dim != s2.dim) throw Error("frechet: sets differ in embedding dimension");
  const auto d = static_cast<Eigen::Index>(s1.dim);
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Mat c1 = Eigen::Map<const Mat>(s1.cov.data(), d, d) + 1e-6 * Mat::Identity(d, d);
  const Mat c2 = Eigen::Map<const Mat>(s2.cov.data(), d, d) + 1e-6 * Mat::Identity(d, d);

  Eigen::SelfAdjointEigenSolver<Mat> e1(c1);
  if (e1.info() != Eigen::Success || !(e1.eigenvalues().minCoeff() > 0))
    throw Error("frechet: degenerate covariance");
  const Mat root1 = e1.eigenvectors() * e1.eigenvalues().cwiseSqrt().asDiagonal() * e1.eigenvectors().transpose();
  Mat inner = root1 * c2 * root1;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> e2(inner, Eigen::EigenvaluesOnly);
  if (e2.info() != Eigen::Success) throw Error("frechet: eigendecomposition failed");
  const double trace_sqrt = e2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  double mean_term = 0;
  for (std::size_t i = 0; i < s1.dim; ++i) mean_term += (s1.mean[i] - s2.mean[i]) * (s1.mean[i] - s2.mean[i]);
  const double dist = mean_term + c1.trace() + c2.trace() - 2.0 * trace_sqrt;
  if (!std::isfinite(dist)) throw Error("frechet: non-finite distance");
  return std::max(dist, 0.0);
}

std::vector<Embedding> embed_all(const std::vector<render::Image>& images, const extractors::Recognizer& f1) {
  ad::NoGradGuard guard;
  std::vector<Embedding> out;
  for (std::size_t b = 0; b < images.size(); b += 50) {
    std::vector<const render::Image*> batch;
    for (std::size_t i = b; i < std::min(images.size(), b + 50); ++i) batch.push_back(&images[i]);
    const auto e = f1.embed(images_to_tensor<float>(batch), ad::Mode::eval);
    const std::size_t d = e.dim(1);
    for (std::size_t n = 0; n < batch.size(); ++n) {
      const auto row = e.data().subspan(n * d, d);
      out.emplace_back(row.begin(), row.end());
    }
  }
  return out;
}

double frechet_distance(const std::vector<render::Image>& a, const std::vector<render::Image>& b,
                        const extractors::Recognizer& f1) {
  return frechet_distance(embed_all(a, f1), embed_all(b, f1));
}

nlohmann::json FrechetExperiment::json() const {
  return {{"created_vs_reference", created_vs_reference},
          {"targets_vs_reference", targets_vs_reference},
          {"noise_floor", noise_floor},
          {"self_distance", self_distance},
          {"direction_holds", direction_holds()}};
}

FrechetExperiment run_frechet(std::size_t n, std::size_t reference, float shift_strength, std::uint64_t seed,
                              const Models& models, const search::SearchConfig& cfg) {
  const auto ref = embed_all(engine_sample(reference, seed ^ kReferenceStream), models.f1);
  const auto floor = embed_all(engine_sample(reference, seed ^ kFloorStream), models.f1);
  std::vector<render::Image> targets, created;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = make_target(seed, i, shift_strength);
    created.push_back(created_face(search::create(t.image, cfg, models).x));
    targets.push_back(std::move(t.image));
  }
  FrechetExperiment out;
  out.created_vs_reference = frechet_distance(embed_all(created, models.f1), ref);
  out.targets_vs_reference = frechet_distance(embed_all(targets, models.f1), ref);
  out.noise_floor = frechet_distance(floor, ref);
  out.self_distance = frechet_distance(ref, ref);
  return out;
}

std::vector<RobustnessRow> robustness_sweep(const std::vector<float>& strengths, std::size_t n, std::uint64_t seed,
                                            const Models& models, const search::SearchConfig& cfg) {
  std::vector<RobustnessRow> rows;
  for (float s : strengths) {
    if (!(s >= 0.0f && s <= 1.0f)) throw Error("shift strengths must lie in [0,1]");
    rows.push_back({s, run_recovery_suite(n, s, seed, models, cfg)});
  }
  return rows;
}

nlohmann::json robustness_json(const std::vector<RobustnessRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back(r.report.json());
  return out;
}

render::Image contact_sheet(const std::vector<std::vector<render::Image>>& rows) {
  if (rows.empty() || rows.front().empty()) return {};
  const auto& cell = rows.front().front();
  std::size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  render::Image sheet(rows.size() * cell.height, cols * cell.width, cell.channels, 1.0f);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const auto& img = rows[r][c];
      if (img.height != cell.height || img.width != cell.width || img.channels != cell.channels)
        throw Error("contact_sheet: images differ in size");
      for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
          for (std::size_t ch = 0; ch < img.channels; ++ch)
            sheet.at(r * cell.height + y, c * cell.width + x, ch) = img.at(y, x, ch);
    }
  return sheet;
}

std::string summary_table(const std::vector<std::pair<std::string, const RecoveryReport*>>& reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %5s %8s %8s %9s %9s %9s %8s\n", "suite", "n", "mae", "disc", "cos_init",
                "cos_final", "feat_err", "descent");
  out += line;
  for (const auto& [name, r] : reports) {
    std::snprintf(line, sizeof line, "%-12s %5zu %8.4f %8.4f %9.4f %9.4f %9.5f %8.3f\n", name.c_str(), r->rows.size(),
                  r->mae().mean, r->discrete_accuracy().mean, r->init_cosine().mean, r->final_cosine().mean,
                  r->feature_error().mean, r->descent_rate());
    out += line;
  }
  return out;
}

}  // namespace f2p::evalkit
