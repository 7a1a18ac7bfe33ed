#include "amgae/commands.hpp"

#include "amgae/binio.hpp"
#include "amgae/checkpoint.hpp"
#include "amgae/convert.hpp"
#include "amgae/dataset.hpp"
#include "amgae/eval.hpp"
#include "amgae/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace amgae {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message,
                const std::vector<std::pair<std::string, std::string>>& context) {
    json j;
    j["code"] = code;
    j["message"] = message;
    json ctx = json::object();
    for (const auto& [k, v] : context) ctx[k] = v;
    j["context"] = ctx;
    err << j.dump() << '\n';
}

template <typename F>
int run_guarded(std::ostream& err, F&& body) {
    try {
        body();
        return 0;
    } catch (const CommandError& e) {
        emit_error(err, e.code(), e.what(), e.context());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, "error", e.what(), {});
        return 1;
    }
}

// Output precedence: --out flag, then the config's out_dir, then a name
// derived from dataset and task. $AMGAE_OUT_ROOT prefixes relative results.
fs::path resolve_out_dir(const fs::path& cli_out, const RunConfig& cfg) {
    fs::path base = !cli_out.empty() ? cli_out : fs::path(cfg.out_dir);
    if (base.empty())
        base = fs::path("runs") / (fs::path(cfg.dataset).filename().string() + "-" +
                                   task_name(cfg.task));
    if (base.is_relative()) {
        if (const char* root = std::getenv("AMGAE_OUT_ROOT")) base = fs::path(root) / base;
    }
    return base;
}

// Identifies the experiment independently of where its artifacts land.
std::uint64_t experiment_hash(RunConfig cfg) {
    cfg.out_dir.clear();
    return config_hash(cfg);
}

RunConfig load_config(const RunOptions& opt) {
    RunConfig cfg;
    try {
        cfg = parse_run_config(opt.config_path, opt.overrides);
    } catch (const std::exception& e) {
        throw CommandError("config-error", e.what(), {{"config", opt.config_path.string()}});
    }
    cfg.out_dir = resolve_out_dir(opt.out_dir, cfg).string();
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw CommandError("config-error", e.what(), {{"config", opt.config_path.string()}});
    }
    return cfg;
}

struct LoadedData {
    std::optional<Graph> graph;           // node / edge tasks
    std::optional<GraphCollection> coll;  // graph task
};

LoadedData load_data(const RunConfig& cfg) {
    const fs::path dir = cfg.dataset;
    if (!fs::is_directory(dir))
        throw CommandError("dataset-missing", "dataset directory not found: " + dir.string(),
                           {{"dataset", dir.string()},
                            {"hint", "create it with `amgae prepare`"}});
    LoadedData d;
    try {
        if (cfg.task == Task::graph)
            d.coll = load_graph_dataset(dir, cfg.max_degree_onehot);
        else
            d.graph = load_node_dataset(dir);
    } catch (const std::exception& e) {
        throw CommandError("dataset-error", e.what(), {{"dataset", dir.string()}});
    }
    return d;
}

FitResult do_fit(const RunConfig& cfg, const LoadedData& d, const Checkpoint* resume,
                 const EpochCallback& on_epoch) {
    try {
        return d.coll ? fit(cfg, *d.coll, resume, on_epoch) : fit(cfg, *d.graph, resume, on_epoch);
    } catch (const std::exception& e) {
        throw CommandError("train-error", e.what(), {});
    }
}

EvalReport run_eval(const ParamStore& gen, const RunConfig& cfg, const LoadedData& d) {
    RunConfig ecfg = cfg;
    ecfg.out_dir.clear();  // reports hash the experiment, not its location
    try {
        switch (cfg.task) {
            case Task::node:
                return eval_node_classification(gen, ecfg, *d.graph);
            case Task::edge:
                return eval_link_prediction(gen, ecfg, *d.graph);
            default:
                return eval_graph_classification(gen, ecfg, *d.coll);
        }
    } catch (const std::exception& e) {
        throw CommandError("eval-error", e.what(), {});
    }
}

EpochCallback progress_logger(std::ostream& log, const RunConfig& cfg) {
    const auto total = static_cast<long long>(cfg.epochs);
    return [&log, total](const EpochRecord& r) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "epoch %lld/%lld l_rec=%.4f l_gen=%.4f l_g=%.4f l_d=%.4f",
                      static_cast<long long>(r.epoch) + 1, total, r.l_rec, r.l_gen, r.l_g, r.l_d);
        log << buf;
        if (r.val_rec) {
            std::snprintf(buf, sizeof buf, " val_rec=%.4f", *r.val_rec);
            log << buf;
        }
        log << '\n' << std::flush;
    };
}

std::string history_jsonl(const std::vector<EpochRecord>& history) {
    std::string out;
    for (const EpochRecord& r : history) {
        json j;
        j["epoch"] = r.epoch;
        j["l_rec"] = r.l_rec;
        j["l_gen"] = r.l_gen;
        j["l_g"] = r.l_g;
        j["l_d"] = r.l_d;
        j["disc_updates"] = r.disc_updates;
        if (r.val_rec) j["val_rec"] = *r.val_rec;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::int64_t total_disc_updates(const std::vector<EpochRecord>& history) {
    std::int64_t total = 0;
    for (const EpochRecord& r : history) total += r.disc_updates;
    return total;
}

// resolved.config + history.jsonl + final and best checkpoints + manifest.json
void write_train_artifacts(const fs::path& out, const RunConfig& cfg, std::uint64_t hash,
                           const FitResult& fr, double train_seconds) {
    binio::write_file_atomic(out / "resolved.config", serialize_run_config(cfg));
    binio::write_file_atomic(out / "history.jsonl", history_jsonl(fr.state.history));

    Checkpoint final_ck{hash, fr.state.epoch, cfg.master_seed, fr.state.gen, fr.state.disc};
    save_checkpoint(final_ck, out / "checkpoint_final.bin");
    Checkpoint best_ck{hash, fr.best_epoch + 1, cfg.master_seed, fr.best_gen, fr.best_disc};
    save_checkpoint(best_ck, out / "checkpoint_best.bin");

    json m;
    m["command"] = "train";
    m["task"] = task_name(cfg.task);
    m["dataset"] = cfg.dataset;
    m["out_dir"] = cfg.out_dir;
    m["config_hash"] = std::to_string(hash);
    m["epochs"] = fr.state.epoch;
    m["best_epoch"] = fr.best_epoch;
    m["disc_updates"] = total_disc_updates(fr.state.history);
    m["train_seconds"] = train_seconds;
    binio::write_file_atomic(out / "manifest.json", m.dump(2) + "\n");
}

void log_report(std::ostream& log, const EvalReport& rep) {
    for (const MetricResult& m : rep.metrics) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s mean=%.4f std=%.4f over %zu values\n", m.name.c_str(),
                      m.summary.mean, m.summary.stddev, m.raw.size());
        log << buf;
    }
}

struct VariantOutcome {
    std::string name;
    EvalReport report;
    std::int64_t disc_updates = 0;
};

// Full train + eval of one configuration into its own directory; evaluation
// uses the best-validation parameters.
VariantOutcome run_variant(RunConfig cfg, const std::string& name, const fs::path& out,
                           const LoadedData& d, std::ostream& log) {
    fs::create_directories(out);
    cfg.out_dir = out.string();
    const std::uint64_t hash = experiment_hash(cfg);
    log << "[" << name << "] training into " << out.string() << "\n";
    const auto t0 = Clock::now();
    const FitResult fr = do_fit(cfg, d, nullptr, progress_logger(log, cfg));
    write_train_artifacts(out, cfg, hash, fr, seconds_since(t0));

    const EvalReport rep = run_eval(fr.best_gen, cfg, d);
    binio::write_file_atomic(out / "report.json", report_json(rep));
    binio::write_file_atomic(out / "report.csv", report_csv(rep));
    log << "[" << name << "] ";
    log_report(log, rep);

    return VariantOutcome{name, rep, total_disc_updates(fr.state.history)};
}

std::string ratio_label(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", r);
    return buf;
}

int cmd_train_impl(const RunOptions& opt, std::ostream& log) {
    const RunConfig cfg = load_config(opt);
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);
    const std::uint64_t hash = experiment_hash(cfg);
    log << "train task=" << task_name(cfg.task) << " dataset=" << cfg.dataset
        << " out=" << out.string() << " config_hash=" << hash << "\n";

    const LoadedData d = load_data(cfg);

    Checkpoint resume_ck;
    const Checkpoint* resume = nullptr;
    if (!opt.resume.empty()) {
        try {
            resume_ck = load_checkpoint(opt.resume);
        } catch (const std::exception& e) {
            throw CommandError("checkpoint-error", e.what(), {{"checkpoint", opt.resume.string()}});
        }
        if (resume_ck.config_hash != hash)
            log << "note: resume checkpoint was written under config hash "
                << resume_ck.config_hash << ", this run hashes to " << hash << "\n";
        resume = &resume_ck;
        log << "resuming at epoch " << resume_ck.epoch << "\n";
    }

    const auto t0 = Clock::now();
    const FitResult fr = do_fit(cfg, d, resume, progress_logger(log, cfg));
    write_train_artifacts(out, cfg, hash, fr, seconds_since(t0));
    log << "wrote " << (out / "checkpoint_final.bin").string() << " and "
        << (out / "checkpoint_best.bin").string() << " (best epoch " << fr.best_epoch << ")\n";
    return 0;
}

int cmd_eval_impl(const RunOptions& opt, std::ostream& log) {
    const RunConfig cfg = load_config(opt);
    const fs::path out = cfg.out_dir;
    const fs::path ck_path =
        !opt.checkpoint.empty() ? opt.checkpoint : out / "checkpoint_best.bin";
    if (!fs::exists(ck_path))
        throw CommandError("checkpoint-error",
                           "checkpoint not found: " + ck_path.string() +
                               "; train first or pass --checkpoint",
                           {{"checkpoint", ck_path.string()}});
    Checkpoint ck;
    try {
        ck = load_checkpoint(ck_path);
    } catch (const std::exception& e) {
        throw CommandError("checkpoint-error", e.what(), {{"checkpoint", ck_path.string()}});
    }
    if (!ck.gen.has("enc.l0.W"))
        throw CommandError("checkpoint-error", "checkpoint has no encoder parameters",
                           {{"checkpoint", ck_path.string()}});

    const LoadedData d = load_data(cfg);
    const index_t data_df =
        d.coll ? d.coll->graphs.front().feature_dim() : d.graph->feature_dim();
    const index_t ck_df = ck.gen.value("enc.l0.W").rows();
    if (ck_df != data_df)
        throw CommandError("incompatible-checkpoint",
                           "checkpoint encoder expects feature width " + std::to_string(ck_df) +
                               " but dataset '" + cfg.dataset + "' has width " +
                               std::to_string(data_df),
                           {{"checkpoint", ck_path.string()}, {"dataset", cfg.dataset}});

    const std::uint64_t hash = experiment_hash(cfg);
    if (ck.config_hash != hash)
        log << "note: checkpoint was trained under config hash " << ck.config_hash
            << ", this evaluation hashes to " << hash << "\n";

    const EvalReport rep = run_eval(ck.gen, cfg, d);
    fs::create_directories(out);
    binio::write_file_atomic(out / "eval.config", serialize_run_config(cfg));
    binio::write_file_atomic(out / "report.json", report_json(rep));
    binio::write_file_atomic(out / "report.csv", report_csv(rep));
    log << "eval task=" << rep.task << " checkpoint=" << ck_path.string() << "\n";
    log_report(log, rep);
    log << "wrote " << (out / "report.json").string() << "\n";
    return 0;
}

int cmd_ablate_impl(const RunOptions& opt, std::ostream& log) {
    const RunConfig base = load_config(opt);
    const fs::path out = base.out_dir;
    fs::create_directories(out);
    const LoadedData d = load_data(base);

    struct Variant {
        const char* name;
        void (*apply)(RunConfig&);
    };
    const Variant variants[] = {
        {"full", [](RunConfig&) {}},
        {"wo_dis",
         [](RunConfig& c) {
             c.loss.alpha = 0.0;
             c.disc_steps_per_gen = 0;
         }},
        {"wo_rec", [](RunConfig& c) { c.loss.use_rec = false; }},
        {"wo_mask",
         [](RunConfig& c) {
             c.model.mask_ratio = 0.0;
             c.loss.sce_all_nodes = true;  // nothing is masked, reconstruct everything
         }},
    };

    std::vector<VariantOutcome> rows;
    for (const Variant& v : variants) {
        RunConfig cfg = base;
        v.apply(cfg);
        rows.push_back(run_variant(std::move(cfg), v.name, out / v.name, d, log));
    }
    if (rows[1].disc_updates != 0)
        throw CommandError("internal-error",
                           "wo_dis variant performed discriminator updates", {});

    std::string csv = "variant,metric,mean,std\n";
    json table = json::array();
    for (const VariantOutcome& row : rows) {
        const MetricResult& m = row.report.metrics.front();
        csv += row.name + "," + m.name + "," + num17(m.summary.mean) + "," +
               num17(m.summary.stddev) + "\n";
        json r;
        r["variant"] = row.name;
        r["metric"] = m.name;
        r["mean"] = m.summary.mean;
        r["std"] = m.summary.stddev;
        r["raw"] = m.raw;
        r["disc_updates"] = row.disc_updates;
        r["config_hash"] = std::to_string(row.report.config_hash);
        table.push_back(r);
    }
    json summary;
    summary["command"] = "ablate";
    summary["task"] = task_name(base.task);
    summary["dataset"] = base.dataset;
    summary["config_hash"] = std::to_string(experiment_hash(base));
    summary["rows"] = table;

    binio::write_file_atomic(out / "ablate.config", serialize_run_config(base));
    binio::write_file_atomic(out / "ablation.csv", csv);
    binio::write_file_atomic(out / "ablation.json", summary.dump(2) + "\n");
    log << "wrote " << (out / "ablation.csv").string() << "\n";
    return 0;
}

int cmd_sweep_impl(const RunOptions& opt, std::ostream& log) {
    const RunConfig base = load_config(opt);
    const fs::path out = base.out_dir;

    std::vector<double> ratios = opt.ratios;
    if (ratios.empty())
        for (int i = 1; i <= 9; ++i) ratios.push_back(static_cast<double>(i) / 10.0);
    for (double r : ratios)
        if (!(r >= 0.0) || !(r < 1.0))
            throw CommandError("usage-error", "sweep ratio out of [0, 1): " + ratio_label(r), {});

    fs::create_directories(out);
    const LoadedData d = load_data(base);

    std::string csv = "ratio,metric,mean,std\n";
    json table = json::array();
    for (double r : ratios) {
        RunConfig cfg = base;
        cfg.model.mask_ratio = r;
        const std::string name = "ratio_" + ratio_label(r);
        const VariantOutcome row = run_variant(std::move(cfg), name, out / name, d, log);
        const MetricResult& m = row.report.metrics.front();
        csv += ratio_label(r) + "," + m.name + "," + num17(m.summary.mean) + "," +
               num17(m.summary.stddev) + "\n";
        json j;
        j["ratio"] = r;
        j["metric"] = m.name;
        j["mean"] = m.summary.mean;
        j["std"] = m.summary.stddev;
        j["raw"] = m.raw;
        table.push_back(j);
    }
    json summary;
    summary["command"] = "sweep";
    summary["task"] = task_name(base.task);
    summary["dataset"] = base.dataset;
    summary["config_hash"] = std::to_string(experiment_hash(base));
    summary["rows"] = table;

    binio::write_file_atomic(out / "sweep.config", serialize_run_config(base));
    binio::write_file_atomic(out / "sweep.csv", csv);
    binio::write_file_atomic(out / "sweep.json", summary.dump(2) + "\n");
    log << "wrote " << (out / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_prepare_impl(const PrepareOptions& opt, std::ostream& log) {
    json stats;
    stats["format"] = opt.format;
    if (opt.format == "content-cites") {
        if (opt.inputs.size() != 2)
            throw CommandError("usage-error",
                               "content-cites needs two inputs: the .content file then the "
                               ".cites file",
                               {});
        ContentCitesStats s;
        try {
            s = convert_content_cites(opt.inputs[0], opt.inputs[1], opt.out_dir,
                                      opt.train_per_class, opt.val_count, opt.test_count,
                                      opt.split_seed);
        } catch (const std::exception& e) {
            throw CommandError("dataset-error", e.what(),
                               {{"content", opt.inputs[0].string()},
                                {"cites", opt.inputs[1].string()}});
        }
        stats["num_nodes"] = s.num_nodes;
        stats["num_edges"] = s.num_edges;
        stats["feature_dim"] = s.feature_dim;
        stats["num_classes"] = s.num_classes;
        stats["dangling_citations"] = s.dangling_citations;
        stats["train_per_class"] = opt.train_per_class;
        stats["val_count"] = opt.val_count;
        stats["test_count"] = opt.test_count;
        stats["split_seed"] = opt.split_seed;
        log << "prepared " << s.num_nodes << " nodes, " << s.num_edges << " edges, "
            << s.feature_dim << " features, " << s.num_classes << " classes\n";
    } else if (opt.format == "tu") {
        if (opt.inputs.size() != 1 || opt.name.empty())
            throw CommandError("usage-error",
                               "tu needs one input directory and --name for the file prefix",
                               {});
        TuStats s;
        try {
            s = convert_tu(opt.inputs[0], opt.name, opt.out_dir);
        } catch (const std::exception& e) {
            throw CommandError("dataset-error", e.what(), {{"input", opt.inputs[0].string()}});
        }
        stats["name"] = opt.name;
        stats["num_graphs"] = s.num_graphs;
        stats["num_classes"] = s.num_classes;
        stats["total_nodes"] = s.total_nodes;
        stats["total_edges"] = s.total_edges;
        stats["avg_nodes"] = s.avg_nodes;
        stats["has_features"] = s.has_features;
        log << "prepared " << s.num_graphs << " graphs, " << s.num_classes << " classes, avg "
            << s.avg_nodes << " nodes\n";
    } else {
        throw CommandError("usage-error",
                           "unknown prepare format '" + opt.format +
                               "' (expected content-cites or tu)",
                           {});
    }
    binio::write_file_atomic(opt.out_dir / "prepare_stats.json", stats.dump(2) + "\n");
    log << "wrote dataset to " << opt.out_dir.string() << "\n";
    return 0;
}

// Collates whatever artifacts a run directory holds; nothing is recomputed.
int cmd_report_impl(const ReportOptions& opt, std::ostream& log) {
    const fs::path dir = opt.run_dir;
    if (!fs::is_directory(dir))
        throw CommandError("not-found", "run directory not found: " + dir.string(),
                           {{"run_dir", dir.string()}});

    auto parse_file = [&](const fs::path& p) {
        try {
            return json::parse(binio::read_file(p));
        } catch (const std::exception& e) {
            throw CommandError("report-error", e.what(), {{"file", p.string()}});
        }
    };

    json summary;
    summary["run_dir"] = dir.string();
    bool found = false;

    if (fs::exists(dir / "manifest.json")) {
        summary["manifest"] = parse_file(dir / "manifest.json");
        found = true;
    }
    if (fs::exists(dir / "history.jsonl")) {
        json train;
        std::istringstream lines(binio::read_file(dir / "history.jsonl"));
        json last;
        std::int64_t epochs = 0, disc_updates = 0;
        std::optional<double> best_val;
        std::int64_t best_epoch = -1;
        for (std::string line; std::getline(lines, line);) {
            if (line.empty()) continue;
            try {
                last = json::parse(line);
            } catch (const std::exception& e) {
                throw CommandError("report-error", e.what(),
                                   {{"file", (dir / "history.jsonl").string()}});
            }
            ++epochs;
            disc_updates += last.value("disc_updates", std::int64_t{0});
            if (last.contains("val_rec")) {
                const double v = last["val_rec"].get<double>();
                if (!best_val || v < *best_val) {
                    best_val = v;
                    best_epoch = last.value("epoch", std::int64_t{0});
                }
            }
        }
        train["epochs"] = epochs;
        train["disc_updates"] = disc_updates;
        if (!last.is_null()) train["final"] = last;
        if (best_val) {
            train["best_val_rec"] = *best_val;
            train["best_epoch"] = best_epoch;
        }
        summary["train"] = train;
        found = true;
    }
    if (fs::exists(dir / "report.json")) {
        summary["eval"] = parse_file(dir / "report.json");
        found = true;
    }
    if (fs::exists(dir / "ablation.json")) {
        summary["ablation"] = parse_file(dir / "ablation.json")["rows"];
        found = true;
    }
    if (fs::exists(dir / "sweep.json")) {
        summary["sweep"] = parse_file(dir / "sweep.json")["rows"];
        found = true;
    }
    // one level of variant / ratio subdirectories
    json variants = json::object();
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "report.json"))
            subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const fs::path& sub : subdirs) {
        variants[sub.filename().string()] = parse_file(sub / "report.json");
        found = true;
    }
    if (!variants.empty()) summary["variants"] = variants;

    if (!found)
        throw CommandError("not-a-run", "no run artifacts found in " + dir.string(),
                           {{"run_dir", dir.string()}});

    binio::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");

    if (summary.contains("eval"))
        for (const auto& [name, m] : summary["eval"]["metrics"].items()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s mean=%.4f std=%.4f\n", name.c_str(),
                          m["mean"].get<double>(), m["std"].get<double>());
            log << buf;
        }
    if (summary.contains("train"))
        log << "trained " << summary["train"]["epochs"].get<std::int64_t>() << " epochs\n";
    log << "wrote " << (dir / "summary.json").string() << "\n";
    return 0;
}

}  // namespace

int cmd_prepare(const PrepareOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_prepare_impl(opt, log); });
}

int cmd_train(const RunOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_train_impl(opt, log); });
}

int cmd_eval(const RunOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_eval_impl(opt, log); });
}

int cmd_ablate(const RunOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_ablate_impl(opt, log); });
}

int cmd_sweep(const RunOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_sweep_impl(opt, log); });
}

int cmd_report(const ReportOptions& opt, std::ostream& log, std::ostream& err) {
    return run_guarded(err, [&] { return cmd_report_impl(opt, log); });
}

}  // namespace amgae
