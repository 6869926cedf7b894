#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rrl/experiment.hpp"
#include "rrl/kernels.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTrain = 3;

std::vector<std::size_t> parse_structure(const std::string& spec) {
    std::vector<std::size_t> nodes;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string tok = spec.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(tok, &used);
            if (used != tok.size() || v == 0) throw std::invalid_argument(tok);
            nodes.push_back(v);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--structure",
                                       "expected comma-separated node counts, got '" +
                                           spec + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (nodes.empty() || nodes.size() > 3) {
        throw CLI::ValidationError("--structure", "expected 1 to 3 logical layers");
    }
    return nodes;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RRL_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RRL: rule-based representation learner"};
    app.require_subcommand(1);

    rrl::RunConfig cfg;
    cfg.master_seed = default_seed();
    std::string structure = "64";
    std::string trainer = "grafting";
    std::string kernels = "auto";
    std::string model_path;
    std::size_t top_n = 10;

    auto add_data_flags = [&](CLI::App* cmd, bool required) {
        cmd->add_option("--data", cfg.data_path, "CSV data file")->required(required);
        cmd->add_option("--schema", cfg.schema_path, "schema sidecar file")
            ->required(required);
    };
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--structure", structure,
                        "logical layer widths, e.g. 64 or 64,32");
        cmd->add_option("--epochs", cfg.train.epochs, "training epochs");
        cmd->add_option("--lr", cfg.train.lr, "initial learning rate");
        cmd->add_option("--batch", cfg.train.batch_size, "mini-batch size");
        cmd->add_option("--bounds", cfg.model.bounds_per_side,
                        "lower/upper bounds per continuous feature");
        cmd->add_option("--lambda", cfg.model.lambda, "L2 coefficient");
        cmd->add_option("--decay", cfg.train.lr_decay, "lr decay factor");
        cmd->add_option("--decay-period", cfg.train.lr_decay_period,
                        "epochs between lr decays");
        cmd->add_option("--trainer", trainer, "grafting|ste");
        cmd->add_option("--valid-fraction", cfg.train.valid_fraction,
                        "validation holdout fraction (0 trains on 100%)");
        cmd->add_option("--log-every", cfg.train.log_every, "F1 logging cadence");
        cmd->add_flag("--derivative-trick", cfg.model.derivative_trick,
                      "use the slowed projection derivative (wide layers)");
        cmd->add_option("--seed", cfg.master_seed, "master seed (env RRL_SEED)");
        cmd->add_option("--out", cfg.out_dir, "output directory")->required();
    };

    CLI::App* cmd_train = app.add_subcommand("train", "train on the full dataset");
    add_data_flags(cmd_train, true);
    add_train_flags(cmd_train);

    CLI::App* cmd_crossval =
        app.add_subcommand("crossval", "stratified k-fold cross-validation");
    add_data_flags(cmd_crossval, true);
    add_train_flags(cmd_crossval);
    cmd_crossval->add_option("--folds", cfg.folds, "fold count");

    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_data_flags(cmd_eval, true);
    cmd_eval->add_option("--model", model_path, "checkpoint path")->required();
    cmd_eval->add_option("--out", cfg.out_dir, "optional metrics.json directory");

    CLI::App* cmd_explain =
        app.add_subcommand("explain", "print rules of a checkpoint");
    add_data_flags(cmd_explain, true);
    cmd_explain->add_option("--model", model_path, "checkpoint path")->required();
    cmd_explain->add_option("--top", top_n, "rules per class");
    cmd_explain->add_option("--out", cfg.out_dir, "optional rules output directory");

    app.add_option("--kernels", kernels, "kernel backend: auto|scalar|avx2");

    try {
        app.parse(argc, argv);
        cfg.model.layer_nodes = parse_structure(structure);
        if (trainer == "grafting") {
            cfg.train.trainer = rrl::TrainerKind::Grafting;
        } else if (trainer == "ste") {
            cfg.train.trainer = rrl::TrainerKind::Ste;
        } else {
            throw CLI::ValidationError("--trainer", "expected grafting or ste");
        }
        rrl::kernels::select(rrl::kernels::parse_backend(kernels));
        cfg.train.lambda = cfg.model.lambda;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*cmd_train) {
            const rrl::EvalResult r = rrl::run_train(cfg);
            std::cout << "trained on " << r.n << " instances: train macro F1 "
                      << r.f1 << ", accuracy " << r.acc << "\n"
                      << "artifacts in " << cfg.out_dir << "\n";
        } else if (*cmd_crossval) {
            const rrl::CrossvalResult r = rrl::run_crossval(cfg);
            for (const auto& fr : r.folds) {
                std::cout << "fold " << fr.fold << ": macro F1 " << fr.f1
                          << ", accuracy " << fr.acc << ", edges " << fr.edge_count
                          << ", avg rule length " << fr.avg_rule_length << "\n";
            }
            std::cout << "macro F1 " << r.f1_mean << " ± " << r.f1_std
                      << ", accuracy " << r.acc_mean << " ± " << r.acc_std << "\n"
                      << "edges " << r.edges_mean << " ± " << r.edges_std
                      << ", avg rule length " << r.avg_len_mean << " ± "
                      << r.avg_len_std << "\n";
        } else if (*cmd_eval) {
            const rrl::EvalResult r =
                rrl::run_eval(model_path, cfg.data_path, cfg.schema_path);
            const std::string json = rrl::eval_to_json(r);
            std::cout << json << "\n";
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                std::ofstream out(std::filesystem::path(cfg.out_dir) /
                                  "metrics.json");
                out << json;
            }
        } else if (*cmd_explain) {
            std::cout << rrl::run_explain(model_path, cfg.data_path,
                                          cfg.schema_path, top_n, cfg.out_dir);
        }
    } catch (const rrl::TrainError& e) {
        std::cerr << "training failure: " << e.what() << "\n";
        return kExitTrain;
    } catch (const rrl::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const rrl::ModelError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTrain;
    }
    return 0;
}
