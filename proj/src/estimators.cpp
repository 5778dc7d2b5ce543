#include "phishpanel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "phishpanel/encoding.hpp"
#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

struct FeatureRef {
  int layer = 0;  // 0 cues, 1 format, 2 education
  int index = 0;
};

std::optional<FeatureRef> find_feature(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kCueNames[static_cast<std::size_t>(i)]) return FeatureRef{0, i};
  for (int i = 0; i < 2; ++i)
    if (name == kFormatNames[static_cast<std::size_t>(i)]) return FeatureRef{1, i};
  for (int i = 0; i < 5; ++i)
    if (name == kEducationNames[static_cast<std::size_t>(i)]) return FeatureRef{2, i};
  return std::nullopt;
}

double feature_value(const ScenarioCode& code, FeatureRef ref) {
  switch (ref.layer) {
    case 0: return code.cues[ref.index];
    case 1: return code.format[ref.index];
    default: return code.education[ref.index];
  }
}

using TermFn = std::function<double(const Transition&)>;

struct Term {
  std::string name;
  TermFn fn;
  enum Role { Treatment, Main, Interaction } role = Main;
  std::string moderator;  // Interaction only: name of the moderator main column
};

TreatmentLayout layout_from_terms(const std::vector<Term>& terms, int block_start) {
  TreatmentLayout layout;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (terms[j].role == Term::Treatment) {
      if (layout.treatment_column >= 0)
        throw ValidationError("treatment block declares two treatment columns");
      layout.treatment_column = block_start + static_cast<int>(j);
    }
  }
  if (layout.treatment_column < 0)
    throw ValidationError("treatment block declares no treatment column");
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (terms[j].role != Term::Interaction) continue;
    int mod = -1;
    for (std::size_t m = 0; m < terms.size(); ++m)
      if (terms[m].name == terms[j].moderator) mod = block_start + static_cast<int>(m);
    if (mod < 0)
      throw ValidationError("interaction term '" + terms[j].name +
                            "' has no moderator column '" + terms[j].moderator + "'");
    layout.interactions.push_back({block_start + static_cast<int>(j), mod});
  }
  return layout;
}

struct Assembled {
  DesignMatrix design;
  Eigen::VectorXd y;
  std::vector<const Transition*> rows;
  long long n_excluded = 0;
  int block_start = 1;
};

double outcome_value(Outcome outcome, const Transition& t) {
  switch (outcome) {
    case Outcome::Click: return t.click_next;
    case Outcome::Report: return t.report_next;
    default: return t.safe_next;
  }
}

Assembled assemble(const ModelSpec& spec, const PanelDataset& panel,
                   const std::vector<Transition>& transitions, const WeightSet* weights,
                   const CreTerms* cre, const std::vector<Term>& terms, bool drop_buffer,
                   const std::vector<std::string>& cre_drops) {
  Assembled out;
  out.rows.reserve(transitions.size());
  for (const Transition& t : transitions) {
    if (drop_buffer &&
        classify_engagement(t.click_t != 0, t.has_seconds_t, t.education_seconds_t) ==
            Engagement::Buffer) {
      ++out.n_excluded;
      continue;
    }
    out.rows.push_back(&t);
  }
  if (out.rows.empty()) throw ValidationError("estimation sample is empty");

  BaselineEncoding baselines = make_baseline_encoding(panel);
  std::set<int> camp_ids;
  for (const Transition* t : out.rows) camp_ids.insert(t->campaign_next);
  CampaignEncoding campaigns;
  campaigns.campaigns.assign(camp_ids.begin(), camp_ids.end());

  std::vector<std::string> names;
  names.emplace_back("intercept");
  for (const Term& term : terms) names.push_back(term.name);
  campaigns.append_names(names);
  baselines.append_names(names);
  bool with_cre = spec.has_cre();
  std::vector<Eigen::Index> cre_cols;
  if (with_cre) {
    if (!cre) throw ValidationError(estimator_name(spec.kind) + " requires CRE terms");
    if (spec.outcome != Outcome::Click && !cre->includes_initial_report)
      throw ValidationError(
          "report and safe outcomes require CRE terms built with the initial reporting status");
    for (std::size_t j = 0; j < cre->names.size(); ++j) {
      if (std::find(cre_drops.begin(), cre_drops.end(), cre->names[j]) != cre_drops.end())
        continue;
      names.push_back(cre->names[j]);
      cre_cols.push_back(static_cast<Eigen::Index>(j));
    }
  }

  const auto n = static_cast<Eigen::Index>(out.rows.size());
  const auto k = static_cast<Eigen::Index>(names.size());
  out.design.names = std::move(names);
  out.design.X.resize(n, k);
  out.design.cluster.resize(out.rows.size());
  out.design.w.resize(n);
  out.y.resize(n);

  std::vector<double> buf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *out.rows[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    out.design.X(i, c++) = 1.0;
    for (const Term& term : terms) out.design.X(i, c++) = term.fn(t);
    buf.assign(static_cast<std::size_t>(campaigns.width()), 0.0);
    campaigns.fill(t.campaign_next, buf.data());
    for (double v : buf) out.design.X(i, c++) = v;
    buf.assign(static_cast<std::size_t>(baselines.width()), 0.0);
    baselines.fill(panel.employees[static_cast<std::size_t>(t.employee)].baseline, buf.data());
    for (double v : buf) out.design.X(i, c++) = v;
    for (Eigen::Index j : cre_cols) out.design.X(i, c++) = cre->values(t.employee, j);
    out.design.cluster[static_cast<std::size_t>(i)] = t.employee;
    out.design.w[i] = spec.weighted() ? weights->sw_trimmed[t.exp_t] : 1.0;
    out.y[i] = outcome_value(spec.outcome, t);
  }
  return out;
}

std::vector<Term> base_terms() {
  std::vector<Term> terms;
  terms.push_back({"click_t", [](const Transition& t) { return double(t.click_t); },
                   Term::Treatment, ""});
  return terms;
}

EstimateResult fe_lpm_estimate(const ModelSpec& spec, const std::vector<Transition>& transitions,
                               const std::vector<Term>& terms) {
  if (transitions.empty()) throw ValidationError("estimation sample is empty");
  std::set<int> camp_ids;
  for (const Transition& t : transitions) camp_ids.insert(t.campaign_next);
  CampaignEncoding campaigns;
  campaigns.campaigns.assign(camp_ids.begin(), camp_ids.end());

  std::vector<std::string> names;
  for (const Term& term : terms) names.push_back(term.name);
  campaigns.append_names(names);

  const auto n = static_cast<Eigen::Index>(transitions.size());
  const auto k = static_cast<Eigen::Index>(names.size());
  EstimateResult res;
  res.design.names = std::move(names);
  res.design.X.resize(n, k);
  res.design.cluster.resize(transitions.size());
  res.design.w = Eigen::VectorXd::Ones(n);
  res.y.resize(n);
  std::vector<double> buf;
  std::vector<int> units(transitions.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = transitions[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    for (const Term& term : terms) res.design.X(i, c++) = term.fn(t);
    buf.assign(static_cast<std::size_t>(campaigns.width()), 0.0);
    campaigns.fill(t.campaign_next, buf.data());
    for (double v : buf) res.design.X(i, c++) = v;
    res.design.cluster[static_cast<std::size_t>(i)] = t.employee;
    units[static_cast<std::size_t>(i)] = t.employee;
    res.y[i] = outcome_value(spec.outcome, t);
  }
  res.fit = fe_lpm(res.design, res.y, units, spec.fit.cluster_correction);
  res.layout = layout_from_terms(terms, 0);
  // Linear model: the treatment coefficient is itself the average effect.
  res.apes.overall.estimate = res.fit.beta[res.layout.treatment_column];
  res.apes.overall.se = res.fit.se(res.layout.treatment_column);
  res.apes.weighted_average = false;
  return res;
}

EstimateResult fit_terms(const ModelSpec& spec, const PanelDataset& panel,
                         const std::vector<Transition>& transitions, const WeightSet* weights,
                         const CreTerms* cre, std::vector<Term> terms, bool drop_buffer,
                         const std::vector<double>& grid, bool prune_collinear) {
  if (spec.weighted()) {
    if (!weights) throw ValidationError(estimator_name(spec.kind) + " requires stabilized weights");
  }
  if (spec.kind == EstimatorKind::FeLpm) return fe_lpm_estimate(spec, transitions, terms);

  EstimateResult res;
  if (spec.weighted() && !weights->trimmed())
    res.warnings.push_back(
        "stabilized weights are untrimmed; extreme weights can dominate the fit");

  std::vector<std::string> cre_drops;
  for (;;) {
    Assembled a = assemble(spec, panel, transitions, weights, cre, terms, drop_buffer, cre_drops);
    if (spec.has_cre() && cre) {
      // A mean column with no variation across the estimation sample (a code
      // feature absent from the catalog slice, or a fixed exposure count) is
      // redundant with the intercept; drop it before the rank check trips.
      std::vector<std::string> const_drops;
      for (const auto& name : cre->names) {
        int j = a.design.column(name);
        if (j < 0) continue;
        double lo = a.design.X.col(j).minCoeff();
        double hi = a.design.X.col(j).maxCoeff();
        if (hi - lo <= 1e-12 * std::max(1.0, std::fabs(hi))) const_drops.push_back(name);
      }
      if (!const_drops.empty()) {
        for (const auto& name : const_drops) {
          cre_drops.push_back(name);
          res.omitted_collinear.push_back(name);
        }
        continue;
      }
    }
    try {
      res.fit = fit_glm(a.design, a.y, spec.link(), spec.fit);
    } catch (const CollinearityError& err) {
      std::vector<std::string> block_drops;
      for (const auto& col : err.dependent_columns) {
        if (prune_collinear)
          for (const Term& term : terms)
            if (term.name == col) block_drops.push_back(col);
        // Employee-level mean columns are generated machinery, not part of the
        // requested model; a redundant one is dropped rather than fatal.
        if (cre && spec.has_cre() &&
            std::find(cre->names.begin(), cre->names.end(), col) != cre->names.end()) {
          cre_drops.push_back(col);
          block_drops.push_back(col);
        }
      }
      if (block_drops.empty()) throw;
      std::erase_if(terms, [&](const Term& term) {
        return std::find(block_drops.begin(), block_drops.end(), term.name) != block_drops.end();
      });
      // An interaction whose moderator column was dropped cannot keep its
      // layout entry; drop the interaction as well.
      for (;;) {
        auto dangling = std::find_if(terms.begin(), terms.end(), [&](const Term& term) {
          if (term.role != Term::Interaction) return false;
          return std::none_of(terms.begin(), terms.end(),
                              [&](const Term& m) { return m.name == term.moderator; });
        });
        if (dangling == terms.end()) break;
        block_drops.push_back(dangling->name);
        terms.erase(dangling);
      }
      for (const auto& col : block_drops) res.omitted_collinear.push_back(col);
      continue;
    }
    res.layout = layout_from_terms(terms, a.block_start);
    res.apes = average_partial_effects(res.fit, a.design, res.layout, grid, spec.ape_use_weights);
    res.design = std::move(a.design);
    res.y = std::move(a.y);
    res.n_excluded = a.n_excluded;
    return res;
  }
}

Term feature_term(const std::string& feature, FeatureRef ref) {
  return {feature + "_t",
          [ref](const Transition& t) { return feature_value(*t.code_t, ref); }, Term::Main, ""};
}

Term click_by_feature_term(const std::string& feature, FeatureRef ref) {
  return {"click_t:" + feature + "_t",
          [ref](const Transition& t) { return t.click_t * feature_value(*t.code_t, ref); },
          Term::Interaction, feature + "_t"};
}

}  // namespace

std::string outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Click: return "click";
    case Outcome::Report: return "report";
    default: return "safe";
  }
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::FeLpm: return "fe-lpm";
    case EstimatorKind::PooledProbit: return "pooled-probit";
    case EstimatorKind::CreProbit: return "cre-probit";
    case EstimatorKind::MsmProbit: return "msm-probit";
    case EstimatorKind::MsmCre: return "msm-cre";
    default: return "msm-logit";
  }
}

Outcome parse_outcome(const std::string& name) {
  if (name == "click") return Outcome::Click;
  if (name == "report") return Outcome::Report;
  if (name == "safe") return Outcome::Safe;
  throw ValidationError("unknown outcome '" + name + "'; expected click, report, or safe");
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "fe-lpm") return EstimatorKind::FeLpm;
  if (name == "pooled-probit") return EstimatorKind::PooledProbit;
  if (name == "cre-probit") return EstimatorKind::CreProbit;
  if (name == "msm-probit") return EstimatorKind::MsmProbit;
  if (name == "msm-cre") return EstimatorKind::MsmCre;
  if (name == "msm-logit") return EstimatorKind::MsmLogit;
  throw ValidationError("unknown estimator '" + name +
                        "'; expected fe-lpm, pooled-probit, cre-probit, msm-probit, msm-cre, "
                        "or msm-logit");
}

std::string suite_name(Suite suite) {
  switch (suite) {
    case Suite::Similarity: return "similarity";
    case Suite::Design: return "design";
    case Suite::Cues: return "cues";
    case Suite::CueByEducation: return "cue-by-education";
    default: return "engagement";
  }
}

Suite parse_suite(const std::string& name) {
  if (name == "similarity") return Suite::Similarity;
  if (name == "design") return Suite::Design;
  if (name == "cues") return Suite::Cues;
  if (name == "cue-by-education") return Suite::CueByEducation;
  if (name == "engagement") return Suite::Engagement;
  throw ValidationError("unknown suite '" + name +
                        "'; expected similarity, design, cues, cue-by-education, or engagement");
}

CreTerms build_cre_terms(const PanelDataset& panel, const std::vector<Transition>& transitions,
                         const std::vector<ScenarioCode>& codes, bool include_initial_report,
                         const CreOptions& options) {
  std::map<int, const ScenarioCode*> by_id;
  for (const auto& code : codes) by_id.emplace(code.scenario_id, &code);

  struct MeanKind {
    enum { Click, CueSim, Feature } kind;
    FeatureRef ref;
  };
  std::vector<MeanKind> kinds;
  for (const auto& cov : options.mean_covariates) {
    if (cov == "click") {
      kinds.push_back({MeanKind::Click, {}});
    } else if (cov == "cue_sim") {
      kinds.push_back({MeanKind::CueSim, {}});
    } else if (auto ref = find_feature(cov)) {
      kinds.push_back({MeanKind::Feature, *ref});
    } else {
      std::ostringstream msg;
      msg << "unknown CRE mean covariate '" << cov << "'; available: click, cue_sim";
      for (const auto& n : kCueNames) msg << ", " << n;
      for (const auto& n : kFormatNames) msg << ", " << n;
      for (const auto& n : kEducationNames) msg << ", " << n;
      throw ValidationError(msg.str());
    }
  }

  CreTerms cre;
  cre.includes_initial_report = include_initial_report;
  cre.names.push_back("y1_click");
  if (include_initial_report) cre.names.push_back("y1_report");
  for (const auto& cov : options.mean_covariates) cre.names.push_back("mean_" + cov);
  cre.names.push_back("n_exposures");

  const auto n_emp = static_cast<Eigen::Index>(panel.employees.size());
  cre.values.resize(n_emp, static_cast<Eigen::Index>(cre.names.size()));

  // Per-employee transition sums for the covariates averaged over pairs.
  std::vector<double> sim_sum(panel.employees.size(), 0.0);
  std::vector<long long> sim_n(panel.employees.size(), 0);
  for (const Transition& t : transitions) {
    sim_sum[static_cast<std::size_t>(t.employee)] += t.cue_sim;
    ++sim_n[static_cast<std::size_t>(t.employee)];
  }

  for (Eigen::Index e = 0; e < n_emp; ++e) {
    const Employee& emp = panel.employees[static_cast<std::size_t>(e)];
    const Exposure& first = panel.exposures[emp.begin];
    Eigen::Index c = 0;
    cre.values(e, c++) = first.clicked;
    if (include_initial_report) cre.values(e, c++) = first.reported;
    double count = static_cast<double>(emp.end - emp.begin);
    for (const MeanKind& mk : kinds) {
      double value = 0.0;
      switch (mk.kind) {
        case MeanKind::Click: {
          double sum = 0.0;
          for (std::size_t i = emp.begin; i < emp.end; ++i) sum += panel.exposures[i].clicked;
          value = sum / count;
          break;
        }
        case MeanKind::CueSim: {
          auto idx = static_cast<std::size_t>(e);
          value = sim_n[idx] > 0 ? sim_sum[idx] / static_cast<double>(sim_n[idx]) : 0.0;
          break;
        }
        case MeanKind::Feature: {
          double sum = 0.0;
          for (std::size_t i = emp.begin; i < emp.end; ++i) {
            auto it = by_id.find(panel.exposures[i].scenario_id);
            if (it == by_id.end())
              throw ValidationError("no scenario code for scenario id " +
                                    std::to_string(panel.exposures[i].scenario_id) +
                                    " while building CRE means");
            sum += feature_value(*it->second, mk.ref);
          }
          value = sum / count;
          break;
        }
      }
      cre.values(e, c++) = value;
    }
    cre.values(e, c++) = count;
  }
  return cre;
}

EstimateResult estimate(const ModelSpec& spec, const PanelDataset& panel,
                        const std::vector<Transition>& transitions, const WeightSet* weights,
                        const CreTerms* cre) {
  return fit_terms(spec, panel, transitions, weights, cre, base_terms(), false, {}, false);
}

ProgressionReport progression(const PanelDataset& panel,
                              const std::vector<Transition>& transitions,
                              const WeightSet& weights, const CreTerms& cre,
                              const ModelSpec& base) {
  struct ColumnDef {
    EstimatorKind kind;
    bool heterogeneity, feedback;
  };
  const ColumnDef defs[] = {{EstimatorKind::FeLpm, true, false},
                            {EstimatorKind::PooledProbit, false, false},
                            {EstimatorKind::CreProbit, true, false},
                            {EstimatorKind::MsmProbit, false, true},
                            {EstimatorKind::MsmCre, true, true}};
  ProgressionReport report;
  for (const ColumnDef& def : defs) {
    ProgressionColumn col;
    col.kind = def.kind;
    col.name = estimator_name(def.kind);
    col.addresses_heterogeneity = def.heterogeneity;
    col.addresses_feedback = def.feedback;
    ModelSpec spec = base;
    spec.outcome = Outcome::Click;
    spec.kind = def.kind;
    try {
      col.result = estimate(spec, panel, transitions, &weights, &cre);
    } catch (const std::exception& err) {
      col.error = err.what();
    }
    report.columns.push_back(std::move(col));
  }
  return report;
}

SuiteResult interaction_suite(Suite suite, const ModelSpec& spec, const PanelDataset& panel,
                              const std::vector<Transition>& transitions, const WeightSet* weights,
                              const CreTerms* cre) {
  if (spec.kind == EstimatorKind::FeLpm)
    throw ValidationError("moderator suites require a probit or logit estimator");
  SuiteResult out;
  out.suite = suite;

  auto click_term = [] {
    return Term{"click_t", [](const Transition& t) { return double(t.click_t); },
                Term::Treatment, ""};
  };

  switch (suite) {
    case Suite::Similarity: {
      std::vector<Term> terms;
      terms.push_back(click_term());
      terms.push_back({"cue_sim", [](const Transition& t) { return t.cue_sim; }, Term::Main, ""});
      terms.push_back({"click_t:cue_sim",
                       [](const Transition& t) { return t.click_t * t.cue_sim; },
                       Term::Interaction, "cue_sim"});
      std::vector<double> grid = spec.similarity_grid;
      if (grid.empty()) {
        double sum = 0.0;
        for (const Transition& t : transitions) sum += t.cue_sim;
        double mean_sim = sum / static_cast<double>(transitions.size());
        grid = {0.0, 0.25, mean_sim, 0.75, 1.0};
      }
      out.main = fit_terms(spec, panel, transitions, weights, cre, terms, false, grid, false);
      int ix = out.main.fit.column("click_t:cue_sim");
      out.joint_terms = {"click_t:cue_sim"};
      out.joint_interactions = wald_test(out.main.fit, {ix});
      break;
    }
    case Suite::Design: {
      const std::vector<std::string> feats = {"ann_email", "ann_land", "report_pitch",
                                              "emot_heur"};
      std::vector<Term> terms;
      terms.push_back(click_term());
      for (const auto& f : feats) terms.push_back(feature_term(f, *find_feature(f)));
      for (const auto& f : feats) terms.push_back(click_by_feature_term(f, *find_feature(f)));
      out.main = fit_terms(spec, panel, transitions, weights, cre, terms, false, {}, false);
      std::vector<int> idx;
      for (const auto& f : feats) {
        out.joint_terms.push_back("click_t:" + f + "_t");
        idx.push_back(out.main.fit.column("click_t:" + f + "_t"));
      }
      out.joint_interactions = wald_test(out.main.fit, idx);
      break;
    }
    case Suite::Cues: {
      std::vector<std::string> feats(kCueNames.begin(), kCueNames.end());
      feats.insert(feats.end(), kFormatNames.begin(), kFormatNames.end());
      for (const auto& f : feats) {
        std::vector<Term> single = {click_term(), feature_term(f, *find_feature(f)),
                                    click_by_feature_term(f, *find_feature(f))};
        SuiteModel model;
        model.label = f;
        model.result = fit_terms(spec, panel, transitions, weights, cre, single, false, {}, false);
        out.singles.push_back(std::move(model));
      }
      std::vector<Term> terms;
      terms.push_back(click_term());
      for (const auto& f : feats) terms.push_back(feature_term(f, *find_feature(f)));
      for (const auto& f : feats) terms.push_back(click_by_feature_term(f, *find_feature(f)));
      out.main = fit_terms(spec, panel, transitions, weights, cre, terms, false, {}, true);
      std::vector<int> idx;
      for (const auto& f : feats) {
        std::string name = "click_t:" + f + "_t";
        int j = out.main.fit.column(name);
        if (j < 0) continue;  // pruned as collinear
        out.joint_terms.push_back(name);
        idx.push_back(j);
      }
      out.joint_interactions = wald_test(out.main.fit, idx);
      break;
    }
    case Suite::CueByEducation: {
      FeatureRef emot = *find_feature("emot_heur");
      std::vector<Term> terms;
      terms.push_back(click_term());
      terms.push_back(feature_term("emot_heur", emot));
      terms.push_back(click_by_feature_term("emot_heur", emot));
      for (const auto& cue : kCueNames) {
        FeatureRef ref = *find_feature(cue);
        terms.push_back(feature_term(cue, ref));
        terms.push_back({cue + "_t:emot_heur_t",
                         [ref, emot](const Transition& t) {
                           return feature_value(*t.code_t, ref) * feature_value(*t.code_t, emot);
                         },
                         Term::Main, ""});
        terms.push_back(click_by_feature_term(cue, ref));
        terms.push_back({"click_t:" + cue + "_t:emot_heur_t",
                         [ref, emot](const Transition& t) {
                           return t.click_t * feature_value(*t.code_t, ref) *
                                  feature_value(*t.code_t, emot);
                         },
                         Term::Interaction, cue + "_t:emot_heur_t"});
      }
      out.main = fit_terms(spec, panel, transitions, weights, cre, terms, false, {}, true);
      std::vector<int> idx;
      for (const auto& cue : kCueNames) {
        std::string name = "click_t:" + std::string(cue) + "_t:emot_heur_t";
        int j = out.main.fit.column(name);
        if (j < 0) continue;
        out.joint_terms.push_back(name);
        idx.push_back(j);
      }
      if (!idx.empty()) out.joint_interactions = wald_test(out.main.fit, idx);
      break;
    }
    case Suite::Engagement: {
      std::vector<Term> terms;
      terms.push_back({"click_dis_t",
                       [](const Transition& t) {
                         return classify_engagement(t.click_t != 0, t.has_seconds_t,
                                                    t.education_seconds_t) ==
                                        Engagement::Disengaged
                                    ? 1.0
                                    : 0.0;
                       },
                       Term::Treatment, ""});
      terms.push_back({"click_eng_t",
                       [](const Transition& t) {
                         return classify_engagement(t.click_t != 0, t.has_seconds_t,
                                                    t.education_seconds_t) == Engagement::Engaged
                                    ? 1.0
                                    : 0.0;
                       },
                       Term::Main, ""});
      out.main = fit_terms(spec, panel, transitions, weights, cre, terms, true, {}, false);
      int dis = out.main.fit.column("click_dis_t");
      int eng = out.main.fit.column("click_eng_t");
      out.engagement_equality = wald_equality(out.main.fit, dis, eng);

      TreatmentLayout dis_layout;
      dis_layout.treatment_column = dis;
      dis_layout.zero_columns = {eng};
      TreatmentLayout eng_layout;
      eng_layout.treatment_column = eng;
      eng_layout.zero_columns = {dis};
      out.main.layout = dis_layout;
      out.main.apes =
          average_partial_effects(out.main.fit, out.main.design, dis_layout, {}, spec.ape_use_weights);
      out.extra_apes.emplace_back("click_disengaged", out.main.apes);
      out.extra_apes.emplace_back(
          "click_engaged", average_partial_effects(out.main.fit, out.main.design, eng_layout, {},
                                                   spec.ape_use_weights));
      break;
    }
  }
  return out;
}

}  // namespace phishpanel
