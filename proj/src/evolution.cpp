#include "edca/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <thread>

#include "edca/errors.hpp"
#include "edca/pipeline.hpp"

namespace edca {

using json = nlohmann::ordered_json;

void GAConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  prob(p_crossover, "p_crossover");
  prob(p_mutation, "p_mutation");
  prob(p_dr_gene_init, "p_dr_gene_init");
  if (population_size == 0 || population_size <= elitism) throw ConfigError("population_size must exceed elitism");
  if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
  if (!(max_change_fraction > 0.0 && max_change_fraction <= 1.0)) {
    throw ConfigError("max_change_fraction must lie in (0, 1]");
  }
  if (!(time_budget_seconds > 0.0)) throw ConfigError("time_budget_seconds must be positive");
  if (parallel_jobs == 0) throw ConfigError("parallel_jobs must be >= 1");
}

json to_json(const GAConfig& c) {
  return {{"population_size", c.population_size},
          {"p_crossover", c.p_crossover},
          {"p_mutation", c.p_mutation},
          {"tournament_size", c.tournament_size},
          {"elitism", c.elitism},
          {"patience", c.patience},
          {"max_change_fraction", c.max_change_fraction},
          {"time_budget_seconds", c.time_budget_seconds},
          {"max_evaluations", c.max_evaluations ? json(*c.max_evaluations) : json(nullptr)},
          {"auto_dr", c.auto_dr},
          {"instance_selection", c.instance_selection},
          {"feature_selection", c.feature_selection},
          {"p_dr_gene_init", c.p_dr_gene_init},
          {"parallel_jobs", c.parallel_jobs},
          {"seed", c.seed}};
}

GAConfig ga_config_from_json(const json& j, GAConfig c) {
  static const std::set<std::string> known{"population_size", "p_crossover", "p_mutation", "tournament_size",
                                           "elitism", "patience", "max_change_fraction", "time_budget_seconds",
                                           "max_evaluations", "auto_dr", "instance_selection", "feature_selection",
                                           "p_dr_gene_init", "parallel_jobs", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown GA setting '" + it.key() + "'");
  }
  try {
    c.population_size = j.value("population_size", c.population_size);
    c.p_crossover = j.value("p_crossover", c.p_crossover);
    c.p_mutation = j.value("p_mutation", c.p_mutation);
    c.tournament_size = j.value("tournament_size", c.tournament_size);
    c.elitism = j.value("elitism", c.elitism);
    c.patience = j.value("patience", c.patience);
    c.max_change_fraction = j.value("max_change_fraction", c.max_change_fraction);
    c.time_budget_seconds = j.value("time_budget_seconds", c.time_budget_seconds);
    if (j.contains("max_evaluations")) {
      c.max_evaluations = j["max_evaluations"].is_null() ? std::nullopt
                                                         : std::optional(j["max_evaluations"].get<std::size_t>());
    }
    c.auto_dr = j.value("auto_dr", c.auto_dr);
    c.instance_selection = j.value("instance_selection", c.instance_selection);
    c.feature_selection = j.value("feature_selection", c.feature_selection);
    c.p_dr_gene_init = j.value("p_dr_gene_init", c.p_dr_gene_init);
    c.parallel_jobs = j.value("parallel_jobs", c.parallel_jobs);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad GA setting: ") + e.what());
  }
  return c;
}

namespace {

std::size_t ceil_fraction(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

const StepSpec& spec_for_prep(const Blueprint& bp, std::size_t i) { return bp.steps.at(i); }

ConfiguredStep sample_step(const StepSpec& spec, Rng& rng) {
  const auto& m = spec.options.at(rng.index(spec.options.size()));
  return {spec.step, m.name, m.sample(rng)};
}

ConfiguredStep repair_step(const ConfiguredStep& s, const StepSpec& spec, Rng& rng) {
  const auto it = std::find_if(spec.options.begin(), spec.options.end(),
                               [&](const MethodSpec& m) { return m.name == s.method; });
  if (s.step != spec.step || it == spec.options.end()) return sample_step(spec, rng);
  ConfiguredStep out{spec.step, s.method, {}};
  for (const auto& p : it->params) {
    const auto found = s.params.find(p.name);
    out.params[p.name] = found == s.params.end() ? p.sample(rng) : p.clamp(found->second);
  }
  return out;
}

std::vector<std::string> step_violations(const ConfiguredStep& s, const StepSpec& spec, const std::string& where) {
  std::vector<std::string> out;
  if (s.step != spec.step) out.push_back(where + ": step id mismatch");
  const auto it = std::find_if(spec.options.begin(), spec.options.end(),
                               [&](const MethodSpec& m) { return m.name == s.method; });
  if (it == spec.options.end()) {
    out.push_back(where + ": unknown method '" + s.method + "'");
    return out;
  }
  if (s.params.size() != it->params.size()) out.push_back(where + ": wrong hyperparameter count");
  for (const auto& p : it->params) {
    const auto found = s.params.find(p.name);
    if (found == s.params.end()) {
      out.push_back(where + ": missing hyperparameter '" + p.name + "'");
    } else if (!p.contains(found->second)) {
      out.push_back(where + ": hyperparameter '" + p.name + "' out of range");
    }
  }
  return out;
}

bool strictly_sorted_within(const IndexSet& s, std::size_t bound) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= bound) return false;
    if (i > 0 && s[i] <= s[i - 1]) return false;
  }
  return true;
}

std::map<int, std::vector<std::size_t>> indices_by_class(const Blueprint& bp) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < bp.instance_labels.size(); ++i) out[bp.instance_labels[i]].push_back(i);
  return out;
}

IndexSet sorted_unique_within(IndexSet s, std::size_t bound) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  s.erase(std::lower_bound(s.begin(), s.end(), bound), s.end());
  return s;
}

IndexSet complement(const IndexSet& s, std::size_t n) {
  IndexSet out;
  out.reserve(n - std::min(n, s.size()));
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < s.size() && s[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

IndexSet merge_sorted(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool better(const EvaluatedIndividual& a, const EvaluatedIndividual& b) {
  return a.fitness < b.fitness || (a.fitness == b.fitness && a.eval_index < b.eval_index);
}

const EvaluatedIndividual& best_of(std::span<const EvaluatedIndividual> pop) {
  return *std::min_element(pop.begin(), pop.end(), better);
}

double mean_fitness(std::span<const EvaluatedIndividual> pop) {
  double s = 0.0;
  for (const auto& p : pop) s += p.fitness;
  return pop.empty() ? 1.0 : s / static_cast<double>(pop.size());
}

class Budget {
 public:
  explicit Budget(const GAConfig& cfg) : cfg_(cfg), start_(std::chrono::steady_clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool time_left() const { return elapsed() < cfg_.time_budget_seconds; }
  /// Evaluations still allowed, or SIZE_MAX when only time limits the run.
  std::size_t evals_left(std::size_t used) const {
    if (!cfg_.max_evaluations) return static_cast<std::size_t>(-1);
    return *cfg_.max_evaluations > used ? *cfg_.max_evaluations - used : 0;
  }

 private:
  const GAConfig& cfg_;
  std::chrono::steady_clock::time_point start_;
};

// Evaluates one batch and stamps evaluation indices and seeds.
std::vector<EvaluatedIndividual> run_batch(std::vector<Genome> genomes, std::size_t batch, const GAConfig& cfg,
                                           const Evaluator& evaluator, std::size_t& total) {
  std::vector<std::uint64_t> seeds(genomes.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(cfg.seed, {batch, i});
  const auto evals = evaluate_all(genomes, seeds, evaluator, cfg.parallel_jobs);
  std::vector<EvaluatedIndividual> out;
  out.reserve(genomes.size());
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    const bool failed = evals[i].failure;
    out.push_back({std::move(genomes[i]), failed ? 1.0 : evals[i].fitness, failed, total + i, seeds[i]});
  }
  total += out.size();
  return out;
}

void finish(SearchResult& res, std::size_t total, const Budget& budget) {
  res.total_evaluations = total;
  res.wall_time = budget.elapsed();
  res.best_mode = dr_mode(res.best.genome);
}

}  // namespace

std::size_t min_instance_count(const Blueprint& bp) {
  return std::min(bp.max_instances, std::max<std::size_t>(10, static_cast<std::size_t>(bp.n_classes)));
}

std::vector<std::string> genome_violations(const Genome& g, const Blueprint& bp) {
  std::vector<std::string> out;
  if (g.is_gene) {
    const auto& s = *g.is_gene;
    if (!strictly_sorted_within(s, bp.max_instances)) out.push_back("IS gene not sorted/unique/in range");
    if (s.size() < min_instance_count(bp)) out.push_back("IS gene below minimum size");
    std::set<int> want(bp.instance_labels.begin(), bp.instance_labels.end());
    std::set<int> have;
    for (auto i : s) {
      if (i < bp.instance_labels.size()) have.insert(bp.instance_labels[i]);
    }
    if (have != want) out.push_back("IS gene misses a class");
  }
  if (g.fs_gene) {
    const auto& s = *g.fs_gene;
    if (!strictly_sorted_within(s, bp.max_features)) out.push_back("FS gene not sorted/unique/in range");
    if (s.empty()) out.push_back("FS gene empty");
  }
  if (g.prep_genes.size() != bp.prep_step_count()) {
    out.push_back("prep gene count mismatch");
  } else {
    for (std::size_t i = 0; i < g.prep_genes.size(); ++i) {
      auto v = step_violations(g.prep_genes[i], spec_for_prep(bp, i), "prep[" + std::to_string(i) + "]");
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  auto v = step_violations(g.model_gene, bp.model_step(), "model");
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

IndexSet random_is_gene(const Blueprint& bp, Rng& rng) {
  const std::size_t n = bp.max_instances;
  const std::size_t lo = std::min(n, std::max(min_instance_count(bp), ceil_fraction(0.1, n)));
  const std::size_t size = rng.uniform_int<std::size_t>(lo, n);
  IndexSet picked;
  for (const auto& [cls, idx] : indices_by_class(bp)) picked.push_back(idx[rng.index(idx.size())]);
  std::sort(picked.begin(), picked.end());
  if (picked.size() < size) picked = merge_sorted(picked, rng.sample(complement(picked, n), size - picked.size()));
  return picked;
}

IndexSet random_fs_gene(const Blueprint& bp, Rng& rng) {
  const std::size_t n = bp.max_features;
  const std::size_t lo = std::min(n, std::max<std::size_t>(1, ceil_fraction(0.1, n)));
  const std::size_t size = rng.uniform_int<std::size_t>(lo, n);
  IndexSet all(n);
  std::iota(all.begin(), all.end(), 0);
  return rng.sample(all, size);
}

Genome random_genome(const Blueprint& bp, const GAConfig& cfg, Rng& rng) {
  Genome g;
  if (cfg.instance_selection && bp.max_instances > 0 && (!cfg.auto_dr || rng.bernoulli(cfg.p_dr_gene_init))) {
    g.is_gene = random_is_gene(bp, rng);
  }
  if (cfg.feature_selection && (!cfg.auto_dr || rng.bernoulli(cfg.p_dr_gene_init))) {
    g.fs_gene = random_fs_gene(bp, rng);
  }
  for (std::size_t i = 0; i < bp.prep_step_count(); ++i) g.prep_genes.push_back(sample_step(spec_for_prep(bp, i), rng));
  g.model_gene = sample_step(bp.model_step(), rng);
  return g;
}

std::vector<Genome> init_population(const Blueprint& bp, const GAConfig& cfg, Rng& rng) {
  if (bp.max_features == 0) throw ConfigError("blueprint has no usable features");
  std::vector<Genome> pop;
  pop.reserve(cfg.population_size);
  for (std::size_t i = 0; i < cfg.population_size; ++i) pop.push_back(random_genome(bp, cfg, rng));
  return pop;
}

const EvaluatedIndividual& tournament_select(std::span<const EvaluatedIndividual> pop, std::size_t size, Rng& rng) {
  std::vector<std::size_t> all(pop.size());
  std::iota(all.begin(), all.end(), 0);
  const auto picks = rng.sample(all, std::max<std::size_t>(1, size));
  const EvaluatedIndividual* best = &pop[picks.front()];
  for (auto i : picks) {
    if (better(pop[i], *best)) best = &pop[i];
  }
  return *best;
}

std::pair<IndexSet, IndexSet> one_point_index_crossover(const IndexSet& a, const IndexSet& b, std::size_t cut) {
  cut = std::min({cut, a.size(), b.size()});
  auto join = [cut](const IndexSet& head, const IndexSet& tail) {
    IndexSet out(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(cut));
    out.insert(out.end(), tail.begin() + static_cast<std::ptrdiff_t>(cut), tail.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  return {join(a, b), join(b, a)};
}

std::pair<Genome, Genome> crossover(const Genome& p1, const Genome& p2, const Blueprint& bp, Rng& rng) {
  Genome c1 = p1, c2 = p2;
  const std::size_t n = std::min(c1.prep_genes.size(), c2.prep_genes.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(0.5)) std::swap(c1.prep_genes[i], c2.prep_genes[i]);
  }
  if (rng.bernoulli(0.5)) std::swap(c1.model_gene, c2.model_gene);

  auto dr = [&rng](const std::optional<IndexSet>& a, const std::optional<IndexSet>& b, std::optional<IndexSet>& out1,
                   std::optional<IndexSet>& out2) {
    if (!a || !b) return;  // inherited unchanged
    auto sa = *a, sb = *b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const auto cut = rng.uniform_int<std::size_t>(0, std::min(sa.size(), sb.size()));
    auto [x, y] = one_point_index_crossover(sa, sb, cut);
    out1 = std::move(x);
    out2 = std::move(y);
  };
  dr(p1.is_gene, p2.is_gene, c1.is_gene, c2.is_gene);
  dr(p1.fs_gene, p2.fs_gene, c1.fs_gene, c2.fs_gene);
  return {repair(c1, bp, rng), repair(c2, bp, rng)};
}

IndexSet edit_index_set(const IndexSet& gene, std::size_t max_size, DrEdit op, std::size_t count, Rng& rng) {
  auto unused = complement(gene, max_size);
  switch (op) {
    case DrEdit::Remove: {
      const auto drop = rng.sample(gene, std::min(count, gene.size()));
      IndexSet out;
      std::set_difference(gene.begin(), gene.end(), drop.begin(), drop.end(), std::back_inserter(out));
      return out;
    }
    case DrEdit::Add:
      return merge_sorted(gene, rng.sample(std::move(unused), std::min(count, unused.size())));
    case DrEdit::Replace: {
      const std::size_t r = std::min({count, gene.size(), unused.size()});
      const auto drop = rng.sample(gene, r);
      const auto add = rng.sample(std::move(unused), r);
      IndexSet kept;
      std::set_difference(gene.begin(), gene.end(), drop.begin(), drop.end(), std::back_inserter(kept));
      return merge_sorted(kept, add);
    }
  }
  return gene;
}

Genome mutate(const Genome& g, const Blueprint& bp, const GAConfig& cfg, Rng& rng, MutationInfo* info) {
  using Slot = MutationInfo::Slot;
  std::vector<std::pair<Slot, std::size_t>> slots;
  if (cfg.instance_selection || g.is_gene) slots.emplace_back(Slot::Instances, 0);
  if (cfg.feature_selection || g.fs_gene) slots.emplace_back(Slot::Features, 0);
  for (std::size_t i = 0; i < g.prep_genes.size(); ++i) slots.emplace_back(Slot::Prep, i);
  slots.emplace_back(Slot::Model, 0);

  MutationInfo local;
  MutationInfo& rec = info ? *info : local;
  const auto [slot, index] = slots[rng.index(slots.size())];
  rec.slot = slot;
  rec.prep_index = index;
  Genome out = g;

  if (slot == Slot::Prep || slot == Slot::Model) {
    ConfiguredStep& step = slot == Slot::Model ? out.model_gene : out.prep_genes[index];
    const StepSpec& spec = slot == Slot::Model ? bp.model_step() : spec_for_prep(bp, index);
    if (rng.bernoulli(0.5)) {
      step = sample_step(spec, rng);
      rec.action = "method";
    } else {
      const auto it = std::find_if(spec.options.begin(), spec.options.end(),
                                   [&](const MethodSpec& m) { return m.name == step.method; });
      step = it == spec.options.end() ? sample_step(spec, rng) : ConfiguredStep{spec.step, it->name, it->sample(rng)};
      rec.action = "hyperparameters";
    }
    return repair(out, bp, rng);
  }

  const bool instances = slot == Slot::Instances;
  std::optional<IndexSet>& gene = instances ? out.is_gene : out.fs_gene;
  const std::size_t max_size = instances ? bp.max_instances : bp.max_features;
  if (!gene) {
    gene = instances ? random_is_gene(bp, rng) : random_fs_gene(bp, rng);
    rec.action = "add";
  } else if (cfg.auto_dr && rng.bernoulli(0.5)) {
    gene.reset();
    rec.action = "delete";
  } else {
    const auto op = static_cast<DrEdit>(rng.index(3));
    const double theta = cfg.max_change_fraction * (1.0 - rng.uniform());
    const std::size_t count = std::max<std::size_t>(1, ceil_fraction(theta, max_size));
    gene = edit_index_set(*gene, max_size, op, count, rng);
    rec.action = op == DrEdit::Replace ? "replace" : op == DrEdit::Add ? "grow" : "shrink";
  }
  return repair(out, bp, rng);
}

Genome repair(const Genome& g, const Blueprint& bp, Rng& rng) {
  Genome out = g;
  if (out.is_gene) {
    auto s = sorted_unique_within(*out.is_gene, bp.max_instances);
    std::set<int> have;
    for (auto i : s) have.insert(bp.instance_labels[i]);
    for (const auto& [cls, idx] : indices_by_class(bp)) {
      if (!have.count(cls)) s = merge_sorted(s, {idx[rng.index(idx.size())]});
    }
    const auto need = min_instance_count(bp);
    if (s.size() < need) s = merge_sorted(s, rng.sample(complement(s, bp.max_instances), need - s.size()));
    out.is_gene = std::move(s);
  }
  if (out.fs_gene) {
    auto s = sorted_unique_within(*out.fs_gene, bp.max_features);
    if (s.empty() && bp.max_features > 0) s.push_back(rng.index(bp.max_features));
    out.fs_gene = std::move(s);
  }
  if (out.prep_genes.size() != bp.prep_step_count()) out.prep_genes.resize(bp.prep_step_count());
  for (std::size_t i = 0; i < out.prep_genes.size(); ++i) {
    out.prep_genes[i] = repair_step(out.prep_genes[i], spec_for_prep(bp, i), rng);
  }
  out.model_gene = repair_step(out.model_gene, bp.model_step(), rng);
  return out;
}

std::vector<Evaluation> evaluate_all(const std::vector<Genome>& genomes, std::span<const std::uint64_t> seeds,
                                     const Evaluator& evaluator, std::size_t workers) {
  std::vector<Evaluation> out(genomes.size());
  auto one = [&](std::size_t i) {
    try {
      out[i] = evaluator(genomes[i], seeds[i]);
      if (!std::isfinite(out[i].fitness)) out[i] = {1.0, true};
    } catch (const std::exception&) {
      out[i] = {1.0, true};
    }
  };
  workers = std::min(std::max<std::size_t>(1, workers), genomes.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < genomes.size(); ++i) one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < genomes.size(); i = next++) one(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

Evaluator make_pipeline_evaluator(const Blueprint& bp, const Dataset& ds, RowIndices train_rows, RowIndices val_rows) {
  auto shared_bp = std::make_shared<const Blueprint>(bp);
  auto train = std::make_shared<const RowIndices>(std::move(train_rows));
  auto val = std::make_shared<const RowIndices>(std::move(val_rows));
  const Dataset* data = &ds;
  return [shared_bp, train, val, data](const Genome& g, std::uint64_t seed) -> Evaluation {
    try {
      const auto fp = fit_pipeline(g, *shared_bp, *data, *train, seed);
      const auto pred = fp.predict(*data, *val);
      std::vector<int> truth;
      truth.reserve(val->size());
      for (auto r : *val) truth.push_back(data->target()[r]);
      return {fitness_from_mcc(mcc(truth, pred, static_cast<std::size_t>(data->n_classes()))), false};
    } catch (const PipelineFailure&) {
      return {1.0, true};
    }
  };
}

SearchResult evolve(const Blueprint& bp, const Evaluator& evaluator, const GAConfig& cfg) {
  cfg.validate();
  if (cfg.max_evaluations && *cfg.max_evaluations == 0) throw SearchError("evaluation budget allows no evaluations");
  const Budget budget(cfg);
  Rng rng(derive_seed(cfg.seed, {0x6a}));
  SearchResult res;
  std::size_t total = 0;

  auto genomes = init_population(bp, cfg, rng);
  genomes.resize(std::min(genomes.size(), budget.evals_left(0)));
  std::size_t generation = 1;
  auto pop = run_batch(std::move(genomes), generation, cfg, evaluator, total);
  res.best = best_of(pop);
  res.history.push_back({generation, res.best.fitness, mean_fitness(pop), 0, total});

  std::size_t stale = 0;
  bool restart_next = false;
  while (budget.time_left() && budget.evals_left(total) >= cfg.population_size) {
    ++generation;
    std::vector<EvaluatedIndividual> elites = pop;
    std::sort(elites.begin(), elites.end(), better);
    elites.resize(std::min(cfg.elitism, elites.size()));

    std::vector<Genome> next;
    next.reserve(cfg.population_size);
    if (restart_next) {
      next = init_population(bp, cfg, rng);
    } else {
      while (next.size() < cfg.population_size) {
        const Genome& a = tournament_select(pop, cfg.tournament_size, rng).genome;
        const Genome& b = tournament_select(pop, cfg.tournament_size, rng).genome;
        auto [c1, c2] = rng.bernoulli(cfg.p_crossover) ? crossover(a, b, bp, rng) : std::pair{a, b};
        for (Genome* c : {&c1, &c2}) {
          if (next.size() == cfg.population_size) break;
          if (rng.bernoulli(cfg.p_mutation)) *c = mutate(*c, bp, cfg, rng);
          next.push_back(repair(*c, bp, rng));
        }
      }
    }
    restart_next = false;

    auto offspring = run_batch(std::move(next), generation, cfg, evaluator, total);
    // Elites replace the worst offspring.
    std::vector<std::size_t> order(offspring.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return better(offspring[b], offspring[a]); });
    for (std::size_t e = 0; e < elites.size() && e < order.size(); ++e) offspring[order[e]] = elites[e];
    pop = std::move(offspring);

    const auto& gen_best = best_of(pop);
    if (gen_best.fitness < res.best.fitness - 1e-12) {
      stale = 0;
    } else {
      ++stale;
    }
    if (better(gen_best, res.best)) res.best = gen_best;
    if (cfg.patience > 0 && stale >= cfg.patience) {
      restart_next = true;
      stale = 0;
      ++res.restarts;
      res.restart_generations.push_back(generation);
    }
    res.history.push_back({generation, res.best.fitness, mean_fitness(pop), res.restarts, total});
  }
  finish(res, total, budget);
  return res;
}

SearchResult random_search(const Blueprint& bp, const Evaluator& evaluator, const GAConfig& cfg) {
  cfg.validate();
  if (cfg.max_evaluations && *cfg.max_evaluations == 0) throw SearchError("evaluation budget allows no evaluations");
  const Budget budget(cfg);
  Rng rng(derive_seed(cfg.seed, {0x6a}));
  SearchResult res;
  std::size_t total = 0;
  bool have_best = false;
  for (std::size_t batch = 1;; ++batch) {
    const std::size_t n = std::min(cfg.population_size, budget.evals_left(total));
    if (n == 0 || (batch > 1 && !budget.time_left())) break;
    std::vector<Genome> genomes;
    genomes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) genomes.push_back(random_genome(bp, cfg, rng));
    const auto pop = run_batch(std::move(genomes), batch, cfg, evaluator, total);
    const auto& b = best_of(pop);
    if (!have_best || better(b, res.best)) res.best = b;
    have_best = true;
    res.history.push_back({batch, res.best.fitness, mean_fitness(pop), 0, total});
  }
  finish(res, total, budget);
  return res;
}

SearchResult evolve(const Blueprint& bp, const Dataset& ds, const RowIndices& train_rows, const RowIndices& val_rows,
                    const GAConfig& cfg) {
  return evolve(bp, make_pipeline_evaluator(bp, ds, train_rows, val_rows), cfg);
}

SearchResult random_search(const Blueprint& bp, const Dataset& ds, const RowIndices& train_rows,
                           const RowIndices& val_rows, const GAConfig& cfg) {
  return random_search(bp, make_pipeline_evaluator(bp, ds, train_rows, val_rows), cfg);
}

}  // namespace edca
