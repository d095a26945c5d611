#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "goal/config.hpp"
#include "goal/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitInfeasible = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string preset;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

goal::RunConfig load_config(const CommonOpts& opts) {
    goal::RunConfig cfg = goal::parse_config_file(opts.config_path);
    if (!opts.preset.empty()) goal::apply_preset(cfg, opts.preset);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (key=value lines)")->required();
    cmd->add_option("--out", opts.out_dir, "Output directory (overrides config)");
    cmd->add_option("--preset", opts.preset, "Preset: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](std::uint64_t v) {
            opts.seed = v;
            opts.seed_set = true;
        },
        "Seed (overrides config)");
}

int run_diag(const std::string& frame_path, const std::string& embeddings_path) {
    nlohmann::ordered_json j;
    goal::EtfFrame frame = goal::EtfFrame::load_csv(frame_path);
    const goal::Matrix gram = goal::matmul_tn(frame.prototypes(), frame.prototypes());
    const double dev = goal::max_abs_diff(gram, goal::ideal_gram(frame.num_prototypes()));
    j["frame"] = {{"d", frame.dim()},
                  {"K", frame.num_prototypes()},
                  {"seed", frame.seed()},
                  {"gram_max_deviation", dev}};

    if (!embeddings_path.empty()) {
        const auto stream = goal::load_embeddings(embeddings_path);
        // pool every row; labels are taken at face value and bound to frame
        // columns smallest-free in sorted order, classifier = prototypes
        std::size_t n = 0;
        for (const auto& s : stream) n += s.train_inputs.rows + s.test_inputs.rows;
        if (n == 0) throw std::runtime_error("diag: embedding file has no rows");
        const std::size_t d = stream.front().train_inputs.cols;
        if (d != frame.dim()) throw std::runtime_error("diag: embedding dim differs from frame dim");
        goal::Matrix e(n, d);
        std::vector<int> labels;
        std::size_t row = 0;
        for (const auto& s : stream) {
            for (std::size_t i = 0; i < s.train_inputs.rows; ++i, ++row) {
                for (std::size_t c = 0; c < d; ++c) e(row, c) = s.train_inputs(i, c);
                labels.push_back(s.train_labels[i]);
            }
            for (std::size_t i = 0; i < s.test_inputs.rows; ++i, ++row) {
                for (std::size_t c = 0; c < d; ++c) e(row, c) = s.test_inputs(i, c);
                labels.push_back(s.test_labels[i]);
            }
        }
        goal::AllocationLedger ledger(frame.num_prototypes());
        std::set<int> classes(labels.begin(), labels.end());
        for (int c : classes) ledger.assign(c);
        goal::Matrix w(d, classes.size());
        {
            std::size_t col = 0;
            for (int c : classes) {
                const auto p = frame.prototype(ledger.column_of(c));
                for (std::size_t i = 0; i < d; ++i) w(i, col) = p[i];
                ++col;
            }
        }
        const goal::NcDiagnostics nc = goal::nc_diagnostics(e, labels, frame, ledger, w);
        j["nc"] = {{"nc1", nc.nc1}, {"nc2", nc.nc2}, {"nc3", nc.nc3}, {"nc4", nc.nc4}};
    }
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continual category discovery with a fixed ETF classifier"};
    app.require_subcommand(1);

    CommonOpts run_opts, ablate_opts, sweep_opts;
    std::size_t ablate_seeds = 5, sweep_seeds = 3;
    std::vector<double> alphas{0.7};
    std::string diag_frame, diag_embeddings;

    auto* cmd_run = app.add_subcommand("run", "Run the full protocol and write reports");
    add_common(cmd_run, run_opts);

    auto* cmd_ablate =
        app.add_subcommand("ablate", "4-cell supervised/unsupervised alignment ablation grid");
    add_common(cmd_ablate, ablate_opts);
    cmd_ablate->add_option("--seeds", ablate_seeds, "Seeds per cell")->check(CLI::PositiveNumber);

    auto* cmd_sweep = app.add_subcommand("sweep-alpha", "Sweep the confidence fraction alpha");
    add_common(cmd_sweep, sweep_opts);
    cmd_sweep->add_option("--alphas", alphas, "Alpha values in (0, 1]")->expected(-1);
    cmd_sweep->add_option("--seeds", sweep_seeds, "Seeds per alpha")->check(CLI::PositiveNumber);

    auto* cmd_diag = app.add_subcommand("diag", "Frame and embedding diagnostics");
    cmd_diag->add_option("--frame", diag_frame, "Stored frame CSV to verify")->required();
    cmd_diag->add_option("--embeddings", diag_embeddings, "Embedding table for NC diagnostics");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            const goal::RunConfig cfg = load_config(run_opts);
            goal::run_and_write(cfg, cfg.output_dir);
        } else if (cmd_ablate->parsed()) {
            const goal::RunConfig cfg = load_config(ablate_opts);
            goal::ablate_and_write(cfg, cfg.output_dir, ablate_seeds);
        } else if (cmd_sweep->parsed()) {
            const goal::RunConfig cfg = load_config(sweep_opts);
            goal::sweep_alpha_and_write(cfg, alphas, cfg.output_dir, sweep_seeds);
        } else if (cmd_diag->parsed()) {
            return run_diag(diag_frame, diag_embeddings);
        }
        return kExitOk;
    } catch (const goal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const goal::InfeasibleSpecError& e) {
        std::cerr << "infeasible spec: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
