#pragma once

#include <string>
#include <vector>

#include "goal/config.hpp"
#include "goal/session.hpp"

namespace goal {

// One full protocol run for (config, seed): stream, frame, encoder, session.
ProtocolResult run_single(const RunConfig& cfg, std::uint64_t seed);

// Executes the protocol and writes stages.csv, summary.json, nc_trace.csv.
void run_and_write(const RunConfig& cfg, const std::string& out_dir);

// 4-cell {sup on/off} x {unsup on/off} grid over n_seeds; writes ablation.csv
// with per-cell means over incremental stages and seeds.
void ablate_and_write(const RunConfig& cfg, const std::string& out_dir, std::size_t n_seeds);

// One protocol run per alpha (averaged over n_seeds); writes alpha_sweep.csv.
void sweep_alpha_and_write(const RunConfig& cfg, const std::vector<double>& alphas,
                           const std::string& out_dir, std::size_t n_seeds);

struct AblationCell {
    bool sup = false;
    bool unsup = false;
    double mean_all = 0.0;
    double mean_old = 0.0;
    double mean_new = 0.0;
};
std::vector<AblationCell> run_ablation_grid(const RunConfig& cfg, std::size_t n_seeds);

struct AlphaPoint {
    double alpha = 0.0;
    double mean_all = 0.0;
    double mean_old = 0.0;
    double mean_new = 0.0;
};
std::vector<AlphaPoint> run_alpha_sweep(const RunConfig& cfg, const std::vector<double>& alphas,
                                        std::size_t n_seeds);

}  // namespace goal
