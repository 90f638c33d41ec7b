#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "edca/space.hpp"

namespace edca {

/// Sorted, duplicate-free indices into instances or features.
using IndexSet = std::vector<std::size_t>;

/// One candidate pipeline: optional data-reduction genes, one configured
/// step per blueprint preprocessing step, and the model gene.
struct Genome {
  std::optional<IndexSet> is_gene;
  std::optional<IndexSet> fs_gene;
  std::vector<ConfiguredStep> prep_genes;
  ConfiguredStep model_gene;

  bool operator==(const Genome&) const = default;
};

nlohmann::ordered_json to_json(const Genome& g);
Genome genome_from_json(const nlohmann::ordered_json& j);

}  // namespace edca
