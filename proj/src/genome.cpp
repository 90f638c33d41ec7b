#include "edca/genome.hpp"

namespace edca {

using json = nlohmann::ordered_json;

json to_json(const Genome& g) {
  json prep = json::array();
  for (const auto& s : g.prep_genes) prep.push_back(to_json(s));
  return {{"is_gene", g.is_gene ? json(*g.is_gene) : json(nullptr)},
          {"fs_gene", g.fs_gene ? json(*g.fs_gene) : json(nullptr)},
          {"prep_genes", prep},
          {"model_gene", to_json(g.model_gene)}};
}

Genome genome_from_json(const json& j) {
  Genome g;
  if (!j.at("is_gene").is_null()) g.is_gene = j.at("is_gene").get<IndexSet>();
  if (!j.at("fs_gene").is_null()) g.fs_gene = j.at("fs_gene").get<IndexSet>();
  for (const auto& s : j.at("prep_genes")) g.prep_genes.push_back(configured_step_from_json(s));
  g.model_gene = configured_step_from_json(j.at("model_gene"));
  return g;
}

}  // namespace edca
