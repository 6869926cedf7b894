#include "rrl/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "rrl/rng.hpp"

namespace rrl {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

nlohmann::json train_config_json(const TrainConfig& t) {
    return {{"lr", t.lr},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"lr_decay", t.lr_decay},
            {"lr_decay_period", t.lr_decay_period},
            {"lambda", t.lambda},
            {"seed", t.seed},
            {"trainer", t.trainer == TrainerKind::Grafting ? "grafting" : "ste"},
            {"log_every", t.log_every},
            {"valid_fraction", t.valid_fraction}};
}

nlohmann::json model_config_json(const RRLConfig& m) {
    return {{"layer_nodes", m.layer_nodes},
            {"bounds_per_side", m.bounds_per_side},
            {"eps", m.eps},
            {"lambda", m.lambda},
            {"derivative_trick", m.derivative_trick},
            {"seed", m.seed}};
}

EvalResult evaluate(const RRLModel& model, const EncodedDataset& ds) {
    const DiscreteWeights disc = binarize_params(model);
    const std::vector<int> pred = predict(model, disc, ds);
    EvalResult r;
    r.n = ds.size();
    r.f1 = macro_f1(pred, ds.labels, ds.n_classes());
    r.acc = accuracy(pred, ds.labels);
    return r;
}

struct MeanStd {
    double mean = 0.0, sd = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    for (double x : xs) r.sd += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(r.sd / static_cast<double>(xs.size()));
    return r;
}

}  // namespace

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["data"] = data_path;
    j["schema"] = schema_path;
    j["out_dir"] = out_dir;
    j["folds"] = folds;
    j["master_seed"] = master_seed;
    j["model"] = model_config_json(model);
    j["train"] = train_config_json(train);
    return j.dump(1);
}

RRLConfig fold_model_config(const RunConfig& cfg, std::size_t fold) {
    RRLConfig m = cfg.model;
    m.seed = mix_seed(cfg.master_seed, 0x100 + fold);
    return m;
}

TrainConfig fold_train_config(const RunConfig& cfg, std::size_t fold) {
    TrainConfig t = cfg.train;
    t.seed = mix_seed(cfg.master_seed, 0x200 + fold);
    return t;
}

EvalResult run_train(const RunConfig& cfg) {
    const EncodedDataset ds = load_dataset(cfg.data_path, cfg.schema_path);

    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "config.json", cfg.to_json());

    RRLModel model = build(fold_model_config(cfg, 0), ds);
    const TrainLog log = fit(model, ds, fold_train_config(cfg, 0));
    log.to_csv((fs::path(cfg.out_dir) / "trainlog.csv").string());
    save(model, (fs::path(cfg.out_dir) / "model.rrl.json").string());
    return evaluate(model, ds);
}

CrossvalResult run_crossval(const RunConfig& cfg) {
    const EncodedDataset ds = load_dataset(cfg.data_path, cfg.schema_path);
    const FoldPlan plan = stratified_kfold(ds, cfg.folds, cfg.master_seed);

    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "config.json", cfg.to_json());
    write_file(fs::path(cfg.out_dir) / "folds.json", plan.to_json());

    CrossvalResult result;
    for (std::size_t f = 0; f < cfg.folds; ++f) {
        const EncodedDataset train_ds = ds.subset(plan.train[f]);
        const EncodedDataset test_ds = ds.subset(plan.test[f]);

        RRLModel model = build(fold_model_config(cfg, f), train_ds);
        const TrainLog log = fit(model, train_ds, fold_train_config(cfg, f));

        const fs::path fold_dir = fs::path(cfg.out_dir) / ("fold_" + std::to_string(f));
        fs::create_directories(fold_dir);
        log.to_csv((fold_dir / "trainlog.csv").string());
        save(model, (fold_dir / "model.rrl.json").string());

        const EvalResult ev = evaluate(model, test_ds);
        const PruneInfo prune = prune_dead_nodes(model, train_ds);
        const RuleSet rules = eliminate_redundant(extract(model, &prune));
        write_file(fold_dir / "rules.txt", explain(model, rules, 20));
        write_file(fold_dir / "rules.json", ruleset_to_json(model, rules));

        FoldResult fr;
        fr.fold = f;
        fr.f1 = ev.f1;
        fr.acc = ev.acc;
        fr.edge_count = rules.edge_count;
        fr.avg_rule_length = rules.avg_rule_length;
        fr.final_train_loss = log.records.back().loss_discrete;
        result.folds.push_back(fr);
    }

    std::vector<double> f1s, accs, edges, lens;
    for (const auto& fr : result.folds) {
        f1s.push_back(fr.f1);
        accs.push_back(fr.acc);
        edges.push_back(static_cast<double>(fr.edge_count));
        lens.push_back(fr.avg_rule_length);
    }
    const MeanStd f1 = mean_std(f1s), acc = mean_std(accs), ec = mean_std(edges),
                  al = mean_std(lens);
    result.f1_mean = f1.mean;
    result.f1_std = f1.sd;
    result.acc_mean = acc.mean;
    result.acc_std = acc.sd;
    result.edges_mean = ec.mean;
    result.edges_std = ec.sd;
    result.avg_len_mean = al.mean;
    result.avg_len_std = al.sd;

    write_file(fs::path(cfg.out_dir) / "metrics.json", result.to_json());
    return result;
}

std::string CrossvalResult::to_json() const {
    nlohmann::json j;
    nlohmann::json per_fold = nlohmann::json::array();
    for (const auto& fr : folds) {
        per_fold.push_back({{"fold", fr.fold},
                            {"macro_f1", fr.f1},
                            {"accuracy", fr.acc},
                            {"edge_count", fr.edge_count},
                            {"avg_rule_length", fr.avg_rule_length},
                            {"final_train_loss", fr.final_train_loss}});
    }
    j["folds"] = std::move(per_fold);
    j["macro_f1"] = {{"mean", f1_mean}, {"std", f1_std}};
    j["accuracy"] = {{"mean", acc_mean}, {"std", acc_std}};
    j["edge_count"] = {{"mean", edges_mean}, {"std", edges_std}};
    j["avg_rule_length"] = {{"mean", avg_len_mean}, {"std", avg_len_std}};
    return j.dump(1);
}

EvalResult run_eval(const std::string& model_path, const std::string& data_path,
                    const std::string& schema_path) {
    const RRLModel model = load(model_path);
    const EncodedDataset ds = load_dataset(data_path, schema_path);
    if (ds.schema.fingerprint() != model.schema.fingerprint()) {
        throw DataError("schema fingerprint mismatch: checkpoint " + model_path +
                        " was trained against a different schema/vocabulary");
    }
    return evaluate(model, ds);
}

std::string eval_to_json(const EvalResult& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["macro_f1"] = r.f1;
    j["accuracy"] = r.acc;
    return j.dump(1);
}

std::string run_explain(const std::string& model_path,
                        const std::string& data_path,
                        const std::string& schema_path, std::size_t top_n,
                        const std::string& out_dir) {
    const RRLModel model = load(model_path);
    const EncodedDataset ds = load_dataset(data_path, schema_path);
    if (ds.schema.fingerprint() != model.schema.fingerprint()) {
        throw DataError("schema fingerprint mismatch: checkpoint " + model_path +
                        " was trained against a different schema/vocabulary");
    }
    const PruneInfo prune = prune_dead_nodes(model, ds);
    const RuleSet rules = eliminate_redundant(extract(model, &prune));
    const std::string report = explain(model, rules, top_n);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "rules.txt", report);
        write_file(fs::path(out_dir) / "rules.json", ruleset_to_json(model, rules));
    }
    return report;
}

}  // namespace rrl
