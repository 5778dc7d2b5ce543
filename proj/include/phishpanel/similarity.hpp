// Jaccard and simple-matching similarity between scenario code vectors,
// full pairwise matrices, and ranked most-similar pair lists.
#pragma once

#include <string>
#include <vector>

#include "phishpanel/scenario.hpp"

namespace phishpanel {

enum class FeatureLayer { Cues, Education };
enum class SimilarityMetric { Jaccard, Smc };

std::string layer_name(FeatureLayer layer);
std::string metric_name(SimilarityMetric metric);

// Intersection over union of the present indicators. Two all-absent vectors
// have an empty union; that case is defined as 1.0 (identical) and flagged
// via *empty_union when the caller asks.
double jaccard(const ScenarioCode& a, const ScenarioCode& b, FeatureLayer layer,
               bool* empty_union = nullptr);

// Fraction of the layer's indicators that agree, joint absences included.
double smc(const ScenarioCode& a, const ScenarioCode& b, FeatureLayer layer);

struct SimilarityMatrix {
  SimilarityMetric metric;
  FeatureLayer layer;
  std::vector<int> scenario_ids;
  std::vector<std::vector<double>> values;  // square, symmetric, full precision

  double at(int scenario_a, int scenario_b) const;  // by scenario id
};

SimilarityMatrix similarity_matrix(const std::vector<ScenarioCode>& codes,
                                   SimilarityMetric metric, FeatureLayer layer);

struct ScenarioPair {
  int scenario_a, scenario_b;  // scenario_a < scenario_b
  double similarity;
  int shared;      // Jaccard: |intersection|; SMC: number of agreeing indicators
  int union_size;  // Jaccard: |union|; SMC: layer size
};

// Pairs sorted by similarity descending, then shared descending, then ids
// ascending. Requires the codes to recompute the shared/union counts.
std::vector<ScenarioPair> top_pairs(const SimilarityMatrix& matrix,
                                    const std::vector<ScenarioCode>& codes,
                                    std::size_t k);

}  // namespace phishpanel
