#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "miace/detectors.hpp"
#include "miace/emdd.hpp"
#include "miace/eval.hpp"
#include "miace/synth.hpp"
#include "miace/train.hpp"
#include "miace/types.hpp"

namespace miace {

// Bag dataset CSV: header `bag_id,label,f0..f{d-1}`, UTF-8, one instance
// per row. Doubles are written with 17 significant digits so a round trip
// is lossless.
void write_bag_csv(const std::filesystem::path& path, const BagSet& bags);
BagSet read_bag_csv(const std::filesystem::path& path);

// Ground-truth sidecar: `instance_id,bag_id,alpha_target,instance_label`,
// aligned with the bag CSV row order.
void write_truth_csv(const std::filesystem::path& path,
                     const SyntheticDataset& data);
struct TruthRow {
  std::string bag_id;
  double alpha_target = 0.0;
  int instance_label = 0;
};
std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path);

// Signature JSON: mode, d, signature (original space), mu_b, sigma_b
// (row-major d*d), iterations, objective.
struct SignatureFile {
  TargetSignature signature;
  int iterations = 0;
  double objective = 0.0;
  bool converged = true;
};
void write_signature_json(const std::filesystem::path& path,
                          const SignatureFile& file);
SignatureFile read_signature_json(const std::filesystem::path& path);

// Reduced form for the generator's true endmember (no statistics).
void write_plain_signature_json(const std::filesystem::path& path,
                                const Eigen::VectorXd& signature);

// EM-DD concept JSON: {point: [...], scales: [...]}.
void write_concept_json(const std::filesystem::path& path,
                        const DDConcept& dd);
DDConcept read_concept_json(const std::filesystem::path& path);

// Scores CSV: `instance_id,score,truth_label` (truth column optional).
struct ScoreRow {
  std::string instance_id;
  double score = 0.0;
  std::optional<int> truth_label;
};
void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// Per-iteration training trace: `iteration,objective,selection_hash`.
void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<IterationRecord>& trace);

// Experiment results: `cell,algorithm,mean,std,mean_runtime_s`.
void write_results_csv(const std::filesystem::path& path,
                       const ExperimentResults& results);

// ROC points: `far,pd`.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

// Plain-text `key = value` config documents; '#' starts a comment.
std::map<std::string, std::string> parse_config_file(
    const std::filesystem::path& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::filesystem::path& path);

// Run manifest: command, resolved configuration, seeds, input/output
// digests, tool version, wall-clock seconds.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  double wall_clock_s = 0.0;
};
void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest);

}  // namespace miace
