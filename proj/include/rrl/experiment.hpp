#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrl/model.hpp"
#include "rrl/rules.hpp"
#include "rrl/train.hpp"

namespace rrl {

// Merged settings for one run; serialized verbatim to config.json so any
// artifact directory can reproduce its run.
struct RunConfig {
    std::string data_path;
    std::string schema_path;
    std::string out_dir;
    RRLConfig model;
    TrainConfig train;
    std::size_t folds = 5;
    std::uint64_t master_seed = 0;

    std::string to_json() const;
};

struct EvalResult {
    double f1 = 0.0;
    double acc = 0.0;
    std::size_t n = 0;
};

struct FoldResult {
    std::size_t fold = 0;
    double f1 = 0.0;
    double acc = 0.0;
    std::size_t edge_count = 0;
    double avg_rule_length = 0.0;
    double final_train_loss = 0.0;
};

struct CrossvalResult {
    std::vector<FoldResult> folds;
    double f1_mean = 0.0, f1_std = 0.0;
    double acc_mean = 0.0, acc_std = 0.0;
    double edges_mean = 0.0, edges_std = 0.0;
    double avg_len_mean = 0.0, avg_len_std = 0.0;

    std::string to_json() const;
};

// Seeds for the per-fold (or single-run) model and trainer, derived from
// the master seed so folds resample bounds independently.
RRLConfig fold_model_config(const RunConfig& cfg, std::size_t fold);
TrainConfig fold_train_config(const RunConfig& cfg, std::size_t fold);

// Trains on the full dataset; writes model.rrl.json, trainlog.csv and
// config.json under cfg.out_dir.
EvalResult run_train(const RunConfig& cfg);

// k-fold cross-validation with per-fold bound resampling; writes per-fold
// artifacts, folds.json, metrics.json and config.json.
CrossvalResult run_crossval(const RunConfig& cfg);

// Loads a checkpoint, refuses on schema-fingerprint mismatch, evaluates the
// discrete model.
EvalResult run_eval(const std::string& model_path, const std::string& data_path,
                    const std::string& schema_path);
std::string eval_to_json(const EvalResult& r);

// Rule report for a trained checkpoint; `data` should be the training data
// (dead-node detection is defined over it). Writes rules.txt / rules.json
// when out_dir is nonempty and returns the text report.
std::string run_explain(const std::string& model_path,
                        const std::string& data_path,
                        const std::string& schema_path, std::size_t top_n,
                        const std::string& out_dir);

}  // namespace rrl
