#pragma once

#include <optional>
#include <vector>

#include "goal/data.hpp"
#include "goal/discovery.hpp"
#include "goal/encoder.hpp"
#include "goal/etf.hpp"
#include "goal/eval.hpp"
#include "goal/losses.hpp"

namespace goal {

struct SessionConfig {
    LossConfig loss;
    SgdConfig sgd;                       // learning rate / momentum / batch size
    std::size_t base_epochs = 30;
    std::size_t incremental_epochs = 10;
    double alpha = 0.7;                  // confident-subset fraction
    // additive-noise augmentation; stronger than the synthetic class noise so
    // the contrastive term groups by class instead of memorizing instances
    double sigma_aug = 0.15;
    bool sup_etf_align = true;
    bool unsup_etf_align = true;
    // Align every confident sample to a free column (ignoring old-class
    // pseudo-labels), instead of routing old pseudo-labels to their
    // already-assigned columns.
    bool literal_unassigned_only = false;
    bool recompute_match_per_epoch = false;
    std::size_t nc_checkpoints = 5;      // checkpoint count during the base session

    void validate() const;
};

struct StageReport {
    std::size_t t = 0;
    AccuracyTriple acc;
    std::vector<double> loss_trace;          // per-epoch mean objective
    std::optional<NcDiagnostics> nc;
    std::vector<NcDiagnostics> nc_trace;     // base-session checkpoints
    std::size_t confident_count = 0;
    double confident_mean_entropy = 0.0;
    double kmeans_inertia = 0.0;
    double match_objective = 0.0;
};

// The protocol state machine: one base session, then incremental sessions
// against a frozen frame. Single-threaded, single-writer.
class Session {
public:
    Session(EtfFrame frame, Encoder encoder, SessionConfig cfg, std::uint64_t seed);

    StageReport run_base(const StageData& stage);
    StageReport run_incremental(const StageData& stage, std::size_t k_new);

    std::size_t stage_index() const { return t_; }
    std::size_t num_classes() const { return w_.cols; }
    std::size_t first_new_class() const { return first_new_class_; }
    const EtfFrame& frame() const { return frame_; }
    const AllocationLedger& ledger() const { return ledger_; }
    const Encoder& encoder() const { return encoder_; }
    const Matrix& classifier() const { return w_; }

private:
    Matrix embed(const Matrix& inputs, Encoder::Cache* cache = nullptr) const;
    std::vector<int> predict(const Matrix& inputs) const;
    AccuracyTriple evaluate(const StageData& stage) const;
    NcDiagnostics diagnose(const Matrix& inputs, const std::vector<int>& session_labels) const;

    EtfFrame frame_;
    Encoder encoder_;
    SessionConfig cfg_;
    AllocationLedger ledger_;
    Matrix w_;  // d x |C^t|
    Rng rng_;
    std::size_t t_ = 0;
    std::size_t first_new_class_ = 0;  // class-id boundary of the current session
    std::vector<int> old_truth_;       // true labels seen before the current stage
};

struct ProtocolResult {
    std::vector<StageReport> stages;
    std::optional<double> m_f;
    std::optional<double> m_d;
};

ProtocolResult run_protocol(const std::vector<StageData>& stream, const EtfFrame& frame,
                            const Encoder& encoder_init, const SessionConfig& cfg,
                            std::uint64_t seed);

}  // namespace goal
