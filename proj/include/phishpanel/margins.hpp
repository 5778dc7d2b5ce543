// Average partial effects of a binary treatment with delta-method standard
// errors. Handles treatment-by-moderator interaction columns and evaluation
// on a moderator grid.
#pragma once

#include <optional>
#include <vector>

#include "phishpanel/glm.hpp"

namespace phishpanel {

// How the treatment enters the design. interactions lists columns of the
// form treatment*moderator together with the moderator's own column;
// zero_columns are other treatment arms forced to zero in both
// counterfactuals (used by the engagement split).
struct TreatmentLayout {
  int treatment_column = -1;
  struct Interaction {
    int column = -1;            // the treatment*moderator column
    int moderator_column = -1;  // the moderator's main-effect column
  };
  std::vector<Interaction> interactions;
  std::vector<int> zero_columns;
};

struct ApeEstimate {
  double estimate = 0.0;
  double se = 0.0;
  // Set when this entry was evaluated at a fixed moderator value.
  std::optional<double> moderator_value;
  bool outside_support = false;
};

struct ApeBlock {
  ApeEstimate overall;
  std::vector<ApeEstimate> grid;  // one entry per requested moderator value
  bool weighted_average = true;
};

// Sample-average of link(x'b | treatment on) - link(x'b | treatment off),
// averaged with the model's observation weights when use_weights is set.
// With a grid, the first interaction's moderator (main effect and
// interaction) is additionally pinned to each grid value in both arms.
ApeBlock average_partial_effects(const FitResult& fit, const DesignMatrix& design,
                                 const TreatmentLayout& layout,
                                 const std::vector<double>& moderator_grid = {},
                                 bool use_weights = true);

}  // namespace phishpanel
