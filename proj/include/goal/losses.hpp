#pragma once

#include <vector>

#include "goal/etf.hpp"
#include "goal/matrix.hpp"

namespace goal {

struct LossConfig {
    double tau = 0.07;           // contrastive temperature
    double lambda_rep = 0.35;    // supervised-contrastive mix weight
    double lambda_a = 0.7;       // alignment weight in the incremental objective
    double epsilon = 2.0;        // mean-entropy regularization weight
    double teacher_temp = 0.05;  // sharpening temperature for the target distribution
    // Keep the positive pair out of the contrastive denominator (the
    // formula as written, which admits negative loss values). Off by
    // default: the denominator includes the positive term.
    bool literal_eq5_denominator = false;

    void validate() const;
};

struct LossResult {
    double value = 0.0;
    Matrix grad_embeddings;  // w.r.t. the first (or only) input matrix
    Matrix grad_view_b;      // w.r.t. the second view, when one exists
    Matrix grad_weights;     // w.r.t. W, when W is an input
};

// -(1/N) sum <e_i/||e_i||, p_{y_i}>, gradient taken through the
// normalization. Labels must already have ledger columns.
LossResult supervised_alignment(const Matrix& embeddings, const std::vector<int>& labels,
                                const EtfFrame& frame, const AllocationLedger& ledger);

// Same alignment form with explicit per-row frame columns.
LossResult unsup_alignment(const Matrix& embeddings, const std::vector<std::size_t>& prototype_cols,
                           const EtfFrame& frame);

// InfoNCE over two augmented views; rows are expected l2-normalized and the
// gradients are w.r.t. the rows as given.
LossResult unsup_contrastive(const Matrix& view_a, const Matrix& view_b, const LossConfig& cfg);

// Supervised contrastive over one view; anchors without positives are
// skipped. Throws if every anchor lacks positives.
LossResult sup_contrastive(const Matrix& view_a, const std::vector<int>& labels,
                           const LossConfig& cfg);

// (1 - lambda_rep) * unsup + lambda_rep * sup (sup taken on view_a).
LossResult base_rep(const Matrix& view_a, const Matrix& view_b, const std::vector<int>& labels,
                    const LossConfig& cfg);

// Mean cross-entropy of softmax(E W) against integer labels.
LossResult cls_cross_entropy(const Matrix& embeddings, const std::vector<int>& labels,
                             const Matrix& w);

// Pseudo-label classification loss: mean H(z_j, s_j) - epsilon * H(s_bar),
// z = softmax(teacher / teacher_temp) with no gradient through the teacher.
// grad_embeddings holds the gradient w.r.t. the student logits.
LossResult unsup_cls(const Matrix& student_logits, const Matrix& teacher_logits,
                     const LossConfig& cfg);

// L_Base = align + rep + cls (values and any shape-matching gradients).
LossResult base_total(const LossResult& align, const LossResult& rep, const LossResult& cls);

// L_Inc = lambda_A * align + rep + cls.
LossResult incremental_total(const LossResult& align, const LossResult& rep,
                             const LossResult& cls, const LossConfig& cfg);

}  // namespace goal
