#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "f2p/extractors/extractors.hpp"
#include "f2p/imitator/train.hpp"
#include "f2p/search/search.hpp"

namespace f2p::evalkit {

using Models = search::Models<float>;

/// Ground-truth parameters and the (optionally shifted) engine render used
/// as the search target for item `index` of a suite.
struct Target {
  render::ParamVector truth;
  render::Image image;
};

Target make_target(std::uint64_t seed, std::size_t index, float shift_strength);

struct RecoveryRow {
  std::size_t index = 0;
  double continuous_mae = 0;
  std::size_t discrete_correct = 0;
  double init_cosine = 0, final_cosine = 0;
  double init_ls = 0, final_ls = 0;
  double feature_error = 0;  // weighted F2 feature L1 of the created face vs the target
  std::size_t coordinates = 0, infeasible = 0;  // over every iterate of the trace
  std::string status;
  double seconds = 0;

  double discrete_accuracy() const { return static_cast<double>(discrete_correct) / render::kGroups; }
};

struct Aggregate {
  double mean = 0, stddev = 0;
};

Aggregate aggregate(const std::vector<double>& values);

struct RecoveryReport {
  float shift_strength = 0;
  std::uint64_t seed = 0;
  std::vector<RecoveryRow> rows;

  Aggregate mae() const;
  Aggregate discrete_accuracy() const;
  Aggregate init_cosine() const;
  Aggregate final_cosine() const;
  Aggregate feature_error() const;
  Aggregate seconds() const;
  /// Fraction of targets whose final L_S is below the initial one.
  double descent_rate() const;
  std::size_t infeasible() const;
  std::size_t coordinates() const;

  nlohmann::json json() const;
};

/// Engine render of finalize_params(x): the created character.
render::Image created_face(const render::ParamVector& x);

/// Cosine between F1 embeddings of two images.
double embedding_cosine(const extractors::Recognizer& f1, const render::Image& a, const render::Image& b);

/// mean |ω(a)·F2(a) − ω(b)·F2(b)|.
double feature_error(const extractors::Segmenter& f2, const render::Image& a, const render::Image& b);

RecoveryRow evaluate_target(const Target& target, std::size_t index, const search::SearchConfig& cfg,
                            const Models& models, search::SearchResult* result = nullptr);

RecoveryReport run_recovery_suite(std::size_t n, float shift_strength, std::uint64_t seed, const Models& models,
                                  const search::SearchConfig& cfg = {});

struct AblationArm {
  std::string name;
  RecoveryReport report;
};

struct AblationReport {
  std::vector<AblationArm> arms;  // l1_only, l2_only, combined

  const RecoveryReport& arm(const std::string& name) const;
  /// combined ≥ L2-only ≥ untouched init, on mean engine-face cosine.
  bool cosine_ordering_holds() const;
  /// L1-only has the largest mean weighted-feature error.
  bool feature_ordering_holds() const;
  nlohmann::json json() const;
};

AblationReport run_ablation(std::size_t n, float shift_strength, std::uint64_t seed, const Models& models,
                            const search::SearchConfig& base = {});

using Embedding = std::vector<double>;

struct FrechetStats {
  std::vector<double> mean;
  std::vector<double> cov;  // row-major d×d
  std::size_t dim = 0;
};

FrechetStats frechet_stats(std::vector<Embedding> samples);

/// ‖μ1−μ2‖² + tr(Σ1+Σ2−2(Σ1Σ2)^{1/2}), clamped at 0. Both covariances get
/// +1e-6·I before the square root. Exactly symmetric and order invariant.
double frechet_distance(const std::vector<Embedding>& a, const std::vector<Embedding>& b);
double frechet_distance(const std::vector<render::Image>& a, const std::vector<render::Image>& b,
                        const extractors::Recognizer& f1);

std::vector<Embedding> embed_all(const std::vector<render::Image>& images, const extractors::Recognizer& f1);

struct FrechetExperiment {
  double created_vs_reference = 0;
  double targets_vs_reference = 0;
  double noise_floor = 0;  // two disjoint engine-render samples
  double self_distance = 0;
  bool direction_holds() const { return created_vs_reference < targets_vs_reference; }
  nlohmann::json json() const;
};

/// Reference set of `reference` engine renders; `n` shifted targets and the
/// characters created from them.
FrechetExperiment run_frechet(std::size_t n, std::size_t reference, float shift_strength, std::uint64_t seed,
                              const Models& models, const search::SearchConfig& cfg = {});

struct RobustnessRow {
  float strength;
  RecoveryReport report;
};

std::vector<RobustnessRow> robustness_sweep(const std::vector<float>& strengths, std::size_t n, std::uint64_t seed,
                                            const Models& models, const search::SearchConfig& cfg = {});
nlohmann::json robustness_json(const std::vector<RobustnessRow>& rows);

/// Rows of equally sized images laid side by side.
render::Image contact_sheet(const std::vector<std::vector<render::Image>>& rows);

/// Fixed-width text table of the main aggregates.
std::string summary_table(const std::vector<std::pair<std::string, const RecoveryReport*>>& reports);

}  // namespace f2p::evalkit
