// amgae CLI: dataset preparation, training, evaluation, ablations, the
// mask-ratio sweep, and run-directory reports. The heavy lifting lives in the
// library's command layer; this file only parses arguments.

#include "amgae/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Adversarially masked graph autoencoder experiments"};
    app.require_subcommand(1);

    amgae::PrepareOptions prep;
    std::vector<std::string> prep_inputs;
    CLI::App* prepare = app.add_subcommand(
        "prepare", "Convert a raw dataset distribution into the canonical directory layout");
    prepare->add_option("--format", prep.format, "content-cites or tu")->required();
    prepare->add_option("--input", prep_inputs,
                        "content-cites: .content then .cites file; tu: the archive directory")
        ->required();
    prepare->add_option("--out", prep.out_dir, "Dataset directory to create")->required();
    prepare->add_option("--name", prep.name, "TU file prefix (the DS in DS_A.txt)");
    prepare->add_option("--train-per-class", prep.train_per_class,
                        "Stratified split: labeled training nodes per class");
    prepare->add_option("--val-count", prep.val_count, "Stratified split: validation nodes");
    prepare->add_option("--test-count", prep.test_count, "Stratified split: test nodes");
    prepare->add_option("--split-seed", prep.split_seed, "Seed for the split shuffle");

    auto add_run_options = [&app](const char* verb, const char* help, amgae::RunOptions& opt) {
        CLI::App* sub = app.add_subcommand(verb, help);
        sub->add_option("--config", opt.config_path, "Experiment config file")->required();
        sub->add_option("--set", opt.overrides, "Override config entries, key=value");
        sub->add_option("--out", opt.out_dir, "Output directory (overrides the config)");
        return sub;
    };

    amgae::RunOptions train_opt;
    CLI::App* train = add_run_options("train", "Train a model from a config file", train_opt);
    train->add_option("--resume", train_opt.resume, "Checkpoint to continue from");

    amgae::RunOptions eval_opt;
    CLI::App* eval = add_run_options("eval", "Evaluate a checkpoint with the config's protocol",
                                     eval_opt);
    eval->add_option("--checkpoint", eval_opt.checkpoint,
                     "Model to load (default: <out>/checkpoint_best.bin)");

    amgae::RunOptions ablate_opt;
    add_run_options("ablate", "Train and evaluate the full model and its three ablations",
                    ablate_opt);

    amgae::RunOptions sweep_opt;
    CLI::App* sweep = add_run_options("sweep", "Train and evaluate across mask ratios", sweep_opt);
    sweep->add_option("--ratio", sweep_opt.ratios, "Mask ratios to sweep (default 0.1..0.9)");

    amgae::ReportOptions report_opt;
    CLI::App* report = app.add_subcommand("report", "Collate a run directory into summary.json");
    report->add_option("run_dir", report_opt.run_dir, "Directory written by a previous command")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (prepare->parsed()) {
        prep.inputs.assign(prep_inputs.begin(), prep_inputs.end());
        return amgae::cmd_prepare(prep, std::cout, std::cerr);
    }
    if (train->parsed()) return amgae::cmd_train(train_opt, std::cout, std::cerr);
    if (eval->parsed()) return amgae::cmd_eval(eval_opt, std::cout, std::cerr);
    if (app.get_subcommand("ablate")->parsed())
        return amgae::cmd_ablate(ablate_opt, std::cout, std::cerr);
    if (sweep->parsed()) return amgae::cmd_sweep(sweep_opt, std::cout, std::cerr);
    if (report->parsed()) return amgae::cmd_report(report_opt, std::cout, std::cerr);
    return 1;
}
