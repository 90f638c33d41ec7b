#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edca/analyzer.hpp"
#include "edca/dataset.hpp"
#include "edca/genome.hpp"
#include "edca/metrics.hpp"
#include "edca/rng.hpp"

namespace edca {

struct GAConfig {
  std::size_t population_size = 50;
  double p_crossover = 0.7;
  double p_mutation = 0.3;
  std::size_t tournament_size = 3;
  std::size_t elitism = 1;
  std::size_t patience = 5;
  double max_change_fraction = 0.10;
  double time_budget_seconds = 900.0;
  std::optional<std::size_t> max_evaluations;
  bool auto_dr = true;
  bool instance_selection = true;
  bool feature_selection = true;
  double p_dr_gene_init = 0.5;
  std::size_t parallel_jobs = 5;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

nlohmann::ordered_json to_json(const GAConfig& cfg);
/// Reads the keys present in `j` over the defaults in `base`.
GAConfig ga_config_from_json(const nlohmann::ordered_json& j, GAConfig base = {});

struct Evaluation {
  double fitness = 1.0;
  bool failure = false;
};

/// Fitness of one genome. Must be a pure function of (genome, seed) since
/// evaluations of a generation may run concurrently.
using Evaluator = std::function<Evaluation(const Genome&, std::uint64_t seed)>;

struct EvaluatedIndividual {
  Genome genome;
  double fitness = 1.0;
  bool failure = false;
  std::size_t eval_index = 0;
  std::uint64_t eval_seed = 0;
};

struct GenerationStats {
  std::size_t generation = 0;  ///< 1 is the initial population
  double best_fitness = 1.0;
  double mean_fitness = 1.0;
  std::size_t restarts = 0;
  std::size_t evaluations = 0;
};

struct SearchResult {
  EvaluatedIndividual best;
  std::vector<GenerationStats> history;
  std::vector<std::size_t> restart_generations;
  std::size_t total_evaluations = 0;
  std::size_t restarts = 0;
  double wall_time = 0.0;
  DrMode best_mode = DrMode::None;
};

/// Smallest IS gene allowed: max(10, K), capped by the instance count.
std::size_t min_instance_count(const Blueprint& bp);

/// Genome-invariant violations against `bp`; empty when valid.
std::vector<std::string> genome_violations(const Genome& g, const Blueprint& bp);

/// IS gene of uniform size in [10%, 100%] of the instances, one index of
/// every class guaranteed.
IndexSet random_is_gene(const Blueprint& bp, Rng& rng);
IndexSet random_fs_gene(const Blueprint& bp, Rng& rng);

/// Fresh genome: each enabled DR gene present with probability
/// p_dr_gene_init (always when auto_dr is off), steps sampled uniformly.
Genome random_genome(const Blueprint& bp, const GAConfig& cfg, Rng& rng);
std::vector<Genome> init_population(const Blueprint& bp, const GAConfig& cfg, Rng& rng);

/// Lowest fitness among `size` uniform draws; ties go to the lower eval_index.
const EvaluatedIndividual& tournament_select(std::span<const EvaluatedIndividual> pop, std::size_t size, Rng& rng);

/// One-point crossover of two sorted index sets at `cut`, deduplicated.
std::pair<IndexSet, IndexSet> one_point_index_crossover(const IndexSet& a, const IndexSet& b, std::size_t cut);

/// Uniform crossover of non-DR genes, one-point crossover of DR genes both
/// parents carry, direct inheritance otherwise. Offspring are repaired.
std::pair<Genome, Genome> crossover(const Genome& p1, const Genome& p2, const Blueprint& bp, Rng& rng);

enum class DrEdit { Replace, Add, Remove };

/// Applies one index-set edit of `count` indices drawn from [0, max_size).
IndexSet edit_index_set(const IndexSet& gene, std::size_t max_size, DrEdit op, std::size_t count, Rng& rng);

/// Which slot a mutation touched. Slot order: IS, FS, prep genes, model.
struct MutationInfo {
  enum class Slot { Instances, Features, Prep, Model };
  Slot slot = Slot::Model;
  std::size_t prep_index = 0;
  std::string action;  ///< "method", "hyperparameters", "delete", "add", "replace", "grow", "shrink"
};

Genome mutate(const Genome& g, const Blueprint& bp, const GAConfig& cfg, Rng& rng, MutationInfo* info = nullptr);

/// Restores every genome invariant; returns valid input unchanged.
Genome repair(const Genome& g, const Blueprint& bp, Rng& rng);

/// Evaluates genomes with up to `workers` threads; results are in input order.
std::vector<Evaluation> evaluate_all(const std::vector<Genome>& genomes, std::span<const std::uint64_t> seeds,
                                     const Evaluator& evaluator, std::size_t workers);

/// Validation-MCC fitness of pipelines trained on `train_rows`.
Evaluator make_pipeline_evaluator(const Blueprint& bp, const Dataset& ds, RowIndices train_rows, RowIndices val_rows);

SearchResult evolve(const Blueprint& bp, const Evaluator& evaluator, const GAConfig& cfg);
SearchResult evolve(const Blueprint& bp, const Dataset& ds, const RowIndices& train_rows, const RowIndices& val_rows,
                    const GAConfig& cfg);

SearchResult random_search(const Blueprint& bp, const Evaluator& evaluator, const GAConfig& cfg);
SearchResult random_search(const Blueprint& bp, const Dataset& ds, const RowIndices& train_rows,
                           const RowIndices& val_rows, const GAConfig& cfg);

}  // namespace edca
