#pragma once

#include "amgae/config.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amgae {

// Command failure with a stable machine-readable code and key/value context;
// the command wrappers render it as one JSON line {code, message, context}.
class CommandError : public std::runtime_error {
public:
    CommandError(std::string code, const std::string& message,
                 std::vector<std::pair<std::string, std::string>> context = {})
        : std::runtime_error(message), code_(std::move(code)), context_(std::move(context)) {}

    const std::string& code() const { return code_; }
    const std::vector<std::pair<std::string, std::string>>& context() const { return context_; }

private:
    std::string code_;
    std::vector<std::pair<std::string, std::string>> context_;
};

struct PrepareOptions {
    std::string format;  // "content-cites" or "tu"
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_dir;
    std::string name;  // TU archive prefix (the DS in DS_A.txt)
    index_t train_per_class = 20;
    index_t val_count = 500;
    index_t test_count = 1000;
    std::uint64_t split_seed = 1;
};

struct RunOptions {
    std::filesystem::path config_path;
    std::vector<std::string> overrides;  // key=value, applied after the file
    std::filesystem::path out_dir;       // overrides the config's out_dir
    std::filesystem::path checkpoint;    // eval: model to load
    std::filesystem::path resume;        // train: checkpoint to continue from
    std::vector<double> ratios;          // sweep: mask ratios; empty -> 0.1..0.9
};

struct ReportOptions {
    std::filesystem::path run_dir;
};

// Each command returns a process exit code: 0 when every requested run
// completed, otherwise 1 after writing the error JSON to `err`. Progress and
// summaries go to `log`. Output files are written atomically (temp + rename),
// under $AMGAE_OUT_ROOT when it is set and the output dir is relative.
int cmd_prepare(const PrepareOptions& opt, std::ostream& log, std::ostream& err);
int cmd_train(const RunOptions& opt, std::ostream& log, std::ostream& err);
int cmd_eval(const RunOptions& opt, std::ostream& log, std::ostream& err);
int cmd_ablate(const RunOptions& opt, std::ostream& log, std::ostream& err);
int cmd_sweep(const RunOptions& opt, std::ostream& log, std::ostream& err);
int cmd_report(const ReportOptions& opt, std::ostream& log, std::ostream& err);

}  // namespace amgae
