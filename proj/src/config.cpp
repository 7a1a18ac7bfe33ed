#include "amgae/config.hpp"

#include "amgae/binio.hpp"
#include "amgae/rng.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <stdexcept>

namespace amgae {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return std::string(s.substr(a, b - a));
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

double parse_double(const std::string& where, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) fail(where, "expected a real number, got '" + v + "'");
    return out;
}

index_t parse_index(const std::string& where, const std::string& v) {
    index_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) fail(where, "expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& where, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end)
        fail(where, "expected a non-negative integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& where, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(where, "expected true or false, got '" + v + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string& where, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
    const char* name;
    Setter set;
    Getter get;
};

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        {"task",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             if (v == "node") c.task = Task::node;
             else if (v == "edge") c.task = Task::edge;
             else if (v == "graph") c.task = Task::graph;
             else fail(w, "task must be node, edge, or graph; got '" + v + "'");
         },
         [](const RunConfig& c) { return task_name(c.task); }},
        {"dataset",
         [](RunConfig& c, const std::string&, const std::string& v) { c.dataset = v; },
         [](const RunConfig& c) { return c.dataset; }},
        {"out_dir",
         [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
         [](const RunConfig& c) { return c.out_dir; }},
        {"master_seed",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.master_seed = parse_u64(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.master_seed); }},
        {"epochs",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.epochs = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.epochs); }},
        {"batch_size",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.batch_size = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.batch_size); }},
        {"disc_steps_per_gen",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.disc_steps_per_gen = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.disc_steps_per_gen); }},
        {"sampler_restart_prob",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.sampler.restart_prob = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.sampler.restart_prob); }},
        {"sampler_target_size",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.sampler.target_size = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.sampler.target_size); }},
        {"sampler_max_steps",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.sampler.max_steps = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.sampler.max_steps); }},
        {"sampler_seed_count",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.sampler.seed_count = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.sampler.seed_count); }},
        {"model_d_h",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.d_h = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.model.d_h); }},
        {"model_enc_layers",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.enc_layers = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.model.enc_layers); }},
        {"model_dec_layers",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.dec_layers = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.model.dec_layers); }},
        {"model_disc_layers",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.disc_layers = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.model.disc_layers); }},
        {"model_readout",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             if (v == "mean") c.model.readout = ops::Readout::mean;
             else if (v == "max") c.model.readout = ops::Readout::max;
             else if (v == "sum") c.model.readout = ops::Readout::sum;
             else fail(w, "model_readout must be mean, max, or sum; got '" + v + "'");
         },
         [](const RunConfig& c) -> std::string {
             switch (c.model.readout) {
                 case ops::Readout::mean: return "mean";
                 case ops::Readout::max: return "max";
                 default: return "sum";
             }
         }},
        {"model_mask_ratio",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.mask_ratio = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.model.mask_ratio); }},
        {"model_remask_decoder",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.remask_decoder = parse_bool(w, v);
         },
         [](const RunConfig& c) { return c.model.remask_decoder ? "true" : "false"; }},
        {"model_prelu_slope",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.model.prelu_slope = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.model.prelu_slope); }},
        {"loss_gamma",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.loss.gamma = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.loss.gamma); }},
        {"loss_alpha",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.loss.alpha = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.loss.alpha); }},
        {"loss_sce_scope",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             if (v == "masked_only") c.loss.sce_all_nodes = false;
             else if (v == "all_nodes") c.loss.sce_all_nodes = true;
             else fail(w, "loss_sce_scope must be masked_only or all_nodes; got '" + v + "'");
         },
         [](const RunConfig& c) {
             return std::string(c.loss.sce_all_nodes ? "all_nodes" : "masked_only");
         }},
        {"loss_use_rec",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.loss.use_rec = parse_bool(w, v);
         },
         [](const RunConfig& c) { return c.loss.use_rec ? "true" : "false"; }},
        {"opt_lr_gen",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.lr_gen = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.lr_gen); }},
        {"opt_lr_disc",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.lr_disc = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.lr_disc); }},
        {"opt_beta1",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.beta1 = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.beta1); }},
        {"opt_beta2",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.beta2 = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.beta2); }},
        {"opt_eps",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.eps = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.eps); }},
        {"eval_seeds",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.eval_seeds = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.eval_seeds); }},
        {"eval_probe_epochs",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.probe_epochs = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.probe_epochs); }},
        {"eval_probe_lr",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.probe_lr = parse_double(w, v);
         },
         [](const RunConfig& c) { return fmt_double(c.probe_lr); }},
        {"eval_val_every",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.val_every = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.val_every); }},
        {"edge_split_seed",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.edge_split_seed = parse_u64(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.edge_split_seed); }},
        {"eval_folds",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.folds = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.folds); }},
        {"max_degree_onehot",
         [](RunConfig& c, const std::string& w, const std::string& v) {
             c.max_degree_onehot = parse_index(w, v);
         },
         [](const RunConfig& c) { return std::to_string(c.max_degree_onehot); }},
    };
    return keys;
}

const Key* find_key(const std::string& name) {
    for (const auto& k : key_table())
        if (name == k.name) return &k;
    return nullptr;
}

void apply_line(RunConfig& cfg, const std::string& line, const std::string& where) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(where, "empty key");
    const Key* k = find_key(key);
    if (!k) fail(where, "unknown config key '" + key + "'");
    k->set(cfg, where, value);
}

}  // namespace

std::string task_name(Task t) {
    switch (t) {
        case Task::node: return "node";
        case Task::edge: return "edge";
        default: return "graph";
    }
}

void RunConfig::validate() const {
    if (dataset.empty()) throw std::invalid_argument("config: dataset is required");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (disc_steps_per_gen < 0)
        throw std::invalid_argument("config: disc_steps_per_gen must be >= 0");
    if (!(lr_gen > 0.0) || !(lr_disc > 0.0))
        throw std::invalid_argument("config: learning rates must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("config: betas must lie in [0,1)");
    if (eps <= 0.0) throw std::invalid_argument("config: opt_eps must be > 0");
    if (eval_seeds < 1) throw std::invalid_argument("config: eval_seeds must be >= 1");
    if (probe_epochs < 0) throw std::invalid_argument("config: eval_probe_epochs must be >= 0");
    if (probe_lr <= 0.0) throw std::invalid_argument("config: eval_probe_lr must be > 0");
    if (val_every < 0) throw std::invalid_argument("config: eval_val_every must be >= 0");
    if (folds < 2) throw std::invalid_argument("config: eval_folds must be >= 2");
    if (max_degree_onehot < 1)
        throw std::invalid_argument("config: max_degree_onehot must be >= 1");
    sampler.validate();
    // d_f is filled from the dataset later; validate the rest of the model
    ModelConfig m = model;
    m.d_f = m.d_f > 0 ? m.d_f : 1;
    m.validate();
    loss.validate();
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin,
                                const std::vector<std::string>& overrides) {
    RunConfig cfg;
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        std::string line = end == std::string::npos ? text.substr(start)
                                                    : text.substr(start, end - start);
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (!line.empty()) apply_line(cfg, line, origin + ":" + std::to_string(line_no));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    for (std::size_t i = 0; i < overrides.size(); ++i)
        apply_line(cfg, overrides[i], "--set[" + std::to_string(i) + "]");
    return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides) {
    return parse_run_config_text(binio::read_file(file), file.string(), overrides);
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : key_table()) {
        out += k.name;
        out += " = ";
        out += k.get(cfg);
        out += '\n';
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(serialize_run_config(cfg)); }

}  // namespace amgae
