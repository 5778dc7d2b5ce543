// Machine-readable result emission: CSV tables with a '#' metadata header
// (tool version, config hash, seed) and versioned JSON documents. Every
// writer is deterministic: identical inputs produce identical bytes.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phishpanel/dgp.hpp"
#include "phishpanel/estimators.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/similarity.hpp"
#include "phishpanel/weights.hpp"

namespace phishpanel {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = 14695981039346656037ull);
std::string hex64(std::uint64_t value);

// FNV-1a digest of a file's bytes; throws ValidationError when unreadable.
std::string file_digest(const std::string& path);

struct RunMeta {
  std::string config_hash;
  std::optional<std::uint64_t> seed;
};

// Stable digest of the effective configuration: sorted key=value pairs plus
// input-file digests.
std::string config_hash(const std::vector<std::pair<std::string, std::string>>& entries);

void write_meta(std::ostream& out, const RunMeta& meta);
nlohmann::json meta_json(const RunMeta& meta);

// Fixed-precision decimal formatting (C locale, no exponent).
std::string format_fixed(double value, int decimals);

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& matrix,
                          const RunMeta& meta);
void write_top_pairs_csv(std::ostream& out, const std::vector<ScenarioPair>& pairs,
                         const RunMeta& meta);
nlohmann::json similarity_json(const SimilarityMatrix& matrix,
                               const std::vector<ScenarioPair>& pairs, const RunMeta& meta);

void write_weights_csv(std::ostream& out, const PanelDataset& panel, const WeightSet& weights,
                       const RunMeta& meta);
void write_weight_diagnostics_csv(std::ostream& out, const WeightDiagnostics& diagnostics,
                                  const RunMeta& meta);
nlohmann::json weight_diagnostics_json(const WeightDiagnostics& diagnostics, const RunMeta& meta);

nlohmann::json fit_json(const FitResult& fit);
nlohmann::json ape_json(const ApeBlock& apes);

void write_estimate_csv(std::ostream& out, const EstimateResult& result, const RunMeta& meta);
nlohmann::json estimate_json(const EstimateResult& result, const RunMeta& meta);

void write_progression_csv(std::ostream& out, const ProgressionReport& report,
                           const RunMeta& meta);
nlohmann::json progression_json(const ProgressionReport& report, const RunMeta& meta);

void write_suite_csv(std::ostream& out, const SuiteResult& suite, const RunMeta& meta);
nlohmann::json suite_json(const SuiteResult& suite, const RunMeta& meta);

nlohmann::json truth_json(const DgpTruth& truth, const DgpConfig& config, const RunMeta& meta);

struct BalanceRow {
  std::string covariate;
  double diff_unweighted = 0.0;  // mean(click=1) - mean(click=0), exposures
  double diff_weighted = 0.0;    // same contrast under the trimmed weights
};

struct PanelSummary {
  long long employees = 0, exposures = 0, transitions = 0;
  double click_rate = 0.0, report_rate = 0.0;
  TransitionRates rates;
  long long engagement_not_clicked = 0, engagement_disengaged = 0, engagement_engaged = 0,
            engagement_buffer = 0;
  long long engagement_unknown = 0;  // clicked rows with no recorded dwell time
};

PanelSummary summarize_panel(const PanelDataset& panel,
                             const std::vector<Transition>& transitions);
std::vector<BalanceRow> balance_table(const PanelDataset& panel, const WeightSet& weights);

void write_diagnose_csv(std::ostream& out, const PanelSummary& summary,
                        const WeightDiagnostics& diagnostics,
                        const std::vector<BalanceRow>& balance, const RunMeta& meta);
nlohmann::json diagnose_json(const PanelSummary& summary, const WeightDiagnostics& diagnostics,
                             const std::vector<BalanceRow>& balance, const RunMeta& meta);

}  // namespace phishpanel
