#include "phishpanel/similarity.hpp"

#include <algorithm>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

const std::array<int, 5>& layer_bits(const ScenarioCode& code, FeatureLayer layer) {
  return layer == FeatureLayer::Cues ? code.cues : code.education;
}

}  // namespace

std::string layer_name(FeatureLayer layer) {
  return layer == FeatureLayer::Cues ? "cues" : "education";
}

std::string metric_name(SimilarityMetric metric) {
  return metric == SimilarityMetric::Jaccard ? "jaccard" : "smc";
}

double jaccard(const ScenarioCode& a, const ScenarioCode& b, FeatureLayer layer,
               bool* empty_union) {
  const auto& va = layer_bits(a, layer);
  const auto& vb = layer_bits(b, layer);
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    inter += va[i] & vb[i];
    uni += va[i] | vb[i];
  }
  if (empty_union) *empty_union = (uni == 0);
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double smc(const ScenarioCode& a, const ScenarioCode& b, FeatureLayer layer) {
  const auto& va = layer_bits(a, layer);
  const auto& vb = layer_bits(b, layer);
  int match = 0;
  for (std::size_t i = 0; i < va.size(); ++i)
    if (va[i] == vb[i]) ++match;
  return static_cast<double>(match) / static_cast<double>(va.size());
}

double SimilarityMatrix::at(int scenario_a, int scenario_b) const {
  auto index_of = [this](int id) {
    for (std::size_t i = 0; i < scenario_ids.size(); ++i)
      if (scenario_ids[i] == id) return static_cast<int>(i);
    throw ValidationError("scenario " + std::to_string(id) + " not in matrix");
  };
  return values[index_of(scenario_a)][index_of(scenario_b)];
}

SimilarityMatrix similarity_matrix(const std::vector<ScenarioCode>& codes,
                                   SimilarityMetric metric, FeatureLayer layer) {
  if (codes.size() < 2)
    throw ValidationError("similarity matrix needs at least two scenarios");
  SimilarityMatrix m;
  m.metric = metric;
  m.layer = layer;
  for (const auto& code : codes) m.scenario_ids.push_back(code.scenario_id);
  std::size_t n = codes.size();
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = metric == SimilarityMetric::Jaccard
                     ? jaccard(codes[i], codes[j], layer)
                     : smc(codes[i], codes[j], layer);
      m.values[i][j] = v;
      m.values[j][i] = v;
    }
  }
  return m;
}

std::vector<ScenarioPair> top_pairs(const SimilarityMatrix& matrix,
                                    const std::vector<ScenarioCode>& codes,
                                    std::size_t k) {
  if (k < 1) throw ValidationError("top_pairs requires k >= 1");
  std::vector<ScenarioPair> pairs;
  std::size_t n = matrix.scenario_ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const ScenarioCode* a = find_scenario(codes, matrix.scenario_ids[i]);
      const ScenarioCode* b = find_scenario(codes, matrix.scenario_ids[j]);
      if (!a || !b)
        throw ValidationError("matrix scenario missing from code list");
      ScenarioPair p;
      p.scenario_a = std::min(a->scenario_id, b->scenario_id);
      p.scenario_b = std::max(a->scenario_id, b->scenario_id);
      p.similarity = matrix.values[i][j];
      const auto& va = matrix.layer == FeatureLayer::Cues ? a->cues : a->education;
      const auto& vb = matrix.layer == FeatureLayer::Cues ? b->cues : b->education;
      if (matrix.metric == SimilarityMetric::Jaccard) {
        int inter = 0, uni = 0;
        for (std::size_t t = 0; t < va.size(); ++t) {
          inter += va[t] & vb[t];
          uni += va[t] | vb[t];
        }
        p.shared = inter;
        p.union_size = uni;
      } else {
        int match = 0;
        for (std::size_t t = 0; t < va.size(); ++t)
          if (va[t] == vb[t]) ++match;
        p.shared = match;
        p.union_size = static_cast<int>(va.size());
      }
      pairs.push_back(p);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const ScenarioPair& x, const ScenarioPair& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    if (x.shared != y.shared) return x.shared > y.shared;
    if (x.scenario_a != y.scenario_a) return x.scenario_a < y.scenario_a;
    return x.scenario_b < y.scenario_b;
  });
  if (pairs.size() > k) pairs.resize(k);
  return pairs;
}

}  // namespace phishpanel
