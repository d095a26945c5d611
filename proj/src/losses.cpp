#include "goal/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "goal/numkit.hpp"

namespace goal {

void LossConfig::validate() const {
    if (tau <= 0.0) throw std::invalid_argument("LossConfig: tau must be > 0");
    if (teacher_temp <= 0.0) throw std::invalid_argument("LossConfig: teacher_temp must be > 0");
    if (epsilon < 0.0) throw std::invalid_argument("LossConfig: epsilon must be >= 0");
    if (lambda_rep < 0.0 || lambda_rep > 1.0)
        throw std::invalid_argument("LossConfig: lambda_rep must be in [0, 1]");
    if (lambda_a < 0.0) throw std::invalid_argument("LossConfig: lambda_A must be >= 0");
}

namespace {

LossResult alignment_impl(const Matrix& embeddings, const std::vector<std::size_t>& cols,
                          const EtfFrame& frame) {
    const std::size_t n = embeddings.rows, d = embeddings.cols;
    if (n == 0) throw std::invalid_argument("alignment: empty batch");
    if (d != frame.dim()) throw std::invalid_argument("alignment: dimension mismatch");
    if (cols.size() != n) throw std::invalid_argument("alignment: one column index per row");

    const Matrix& p = frame.prototypes();
    LossResult res;
    res.grad_embeddings = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        if (cols[i] >= frame.num_prototypes())
            throw std::out_of_range("alignment: prototype column out of range");
        const auto e = embeddings.row(i);
        const double nrm = norm2(e);
        if (nrm == 0.0) throw std::invalid_argument("alignment: zero embedding row");
        double cosv = 0.0;
        for (std::size_t j = 0; j < d; ++j) cosv += e[j] / nrm * p(j, cols[i]);
        res.value -= cosv / n;
        // d/de <e/||e||, p> = (p - e_hat <e_hat, p>) / ||e||
        for (std::size_t j = 0; j < d; ++j) {
            const double ehat = e[j] / nrm;
            res.grad_embeddings(i, j) = -(p(j, cols[i]) - ehat * cosv) / (nrm * n);
        }
    }
    return res;
}

void add_scaled_row(Matrix& m, std::size_t row, double alpha, std::span<const double> v) {
    for (std::size_t j = 0; j < v.size(); ++j) m(row, j) += alpha * v[j];
}

}  // namespace

LossResult supervised_alignment(const Matrix& embeddings, const std::vector<int>& labels,
                                const EtfFrame& frame, const AllocationLedger& ledger) {
    if (labels.size() != embeddings.rows)
        throw std::invalid_argument("supervised_alignment: one label per row");
    std::vector<std::size_t> cols(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) cols[i] = ledger.column_of(labels[i]);
    return alignment_impl(embeddings, cols, frame);
}

LossResult unsup_alignment(const Matrix& embeddings, const std::vector<std::size_t>& prototype_cols,
                           const EtfFrame& frame) {
    return alignment_impl(embeddings, prototype_cols, frame);
}

LossResult unsup_contrastive(const Matrix& view_a, const Matrix& view_b, const LossConfig& cfg) {
    cfg.validate();
    if (!view_a.same_shape(view_b))
        throw std::invalid_argument("unsup_contrastive: view shapes differ");
    const std::size_t b = view_a.rows, d = view_a.cols;
    if (b < 2) throw std::invalid_argument("unsup_contrastive: batch size must be >= 2");

    LossResult res;
    res.grad_embeddings = Matrix(b, d);
    res.grad_view_b = Matrix(b, d);

    std::vector<double> terms;  // [positive?, negatives...]
    std::vector<double> pi;
    for (std::size_t i = 0; i < b; ++i) {
        const double t_pos = dot(view_a.row(i), view_b.row(i)) / cfg.tau;
        terms.clear();
        if (!cfg.literal_eq5_denominator) terms.push_back(t_pos);
        for (std::size_t j = 0; j < b; ++j)
            if (j != i) terms.push_back(dot(view_a.row(i), view_a.row(j)) / cfg.tau);
        const double lse = log_sum_exp(terms);
        res.value += (-t_pos + lse) / b;

        pi.resize(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t) pi[t] = std::exp(terms[t] - lse);

        const double inv = 1.0 / (cfg.tau * b);
        std::size_t t = 0;
        double pi_pos = 0.0;
        if (!cfg.literal_eq5_denominator) pi_pos = pi[t++];
        // d(-t_pos)/da_i and the positive's denominator share
        add_scaled_row(res.grad_embeddings, i, (pi_pos - 1.0) * inv, view_b.row(i));
        add_scaled_row(res.grad_view_b, i, (pi_pos - 1.0) * inv, view_a.row(i));
        for (std::size_t j = 0; j < b; ++j) {
            if (j == i) continue;
            const double w = pi[t++] * inv;
            add_scaled_row(res.grad_embeddings, i, w, view_a.row(j));
            add_scaled_row(res.grad_embeddings, j, w, view_a.row(i));
        }
    }
    return res;
}

LossResult sup_contrastive(const Matrix& view_a, const std::vector<int>& labels,
                           const LossConfig& cfg) {
    cfg.validate();
    const std::size_t b = view_a.rows, d = view_a.cols;
    if (labels.size() != b) throw std::invalid_argument("sup_contrastive: one label per row");
    if (b < 2) throw std::invalid_argument("sup_contrastive: batch size must be >= 2");

    std::size_t valid_anchors = 0;
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j)
            if (j != i && labels[j] == labels[i]) {
                ++valid_anchors;
                break;
            }
    if (valid_anchors == 0)
        throw std::invalid_argument("sup_contrastive: no anchor has a positive (all labels unique)");

    LossResult res;
    res.grad_embeddings = Matrix(b, d);

    std::vector<double> terms(b - 1);
    std::vector<double> pi(b - 1);
    for (std::size_t i = 0; i < b; ++i) {
        std::vector<std::size_t> positives;
        for (std::size_t j = 0; j < b; ++j)
            if (j != i && labels[j] == labels[i]) positives.push_back(j);
        if (positives.empty()) continue;  // skipped anchor

        std::size_t t = 0;
        for (std::size_t j = 0; j < b; ++j)
            if (j != i) terms[t++] = dot(view_a.row(i), view_a.row(j)) / cfg.tau;
        const double lse = log_sum_exp(terms);
        for (std::size_t k = 0; k < terms.size(); ++k) pi[k] = std::exp(terms[k] - lse);

        const double inv_h = 1.0 / positives.size();
        for (std::size_t h : positives) {
            const double s_ih = dot(view_a.row(i), view_a.row(h)) / cfg.tau;
            res.value += inv_h * (-s_ih + lse) / valid_anchors;
            add_scaled_row(res.grad_embeddings, i, -inv_h / (cfg.tau * valid_anchors),
                           view_a.row(h));
            add_scaled_row(res.grad_embeddings, h, -inv_h / (cfg.tau * valid_anchors),
                           view_a.row(i));
        }
        // denominator gradient, once per anchor
        std::size_t k = 0;
        for (std::size_t j = 0; j < b; ++j) {
            if (j == i) continue;
            const double w = pi[k++] / (cfg.tau * valid_anchors);
            add_scaled_row(res.grad_embeddings, i, w, view_a.row(j));
            add_scaled_row(res.grad_embeddings, j, w, view_a.row(i));
        }
    }
    return res;
}

LossResult base_rep(const Matrix& view_a, const Matrix& view_b, const std::vector<int>& labels,
                    const LossConfig& cfg) {
    LossResult u = unsup_contrastive(view_a, view_b, cfg);
    if (cfg.lambda_rep == 0.0) return u;

    // a batch can end up with all-unique labels; the supervised term is
    // simply absent then instead of aborting training
    bool any_positive = false;
    for (std::size_t i = 0; i < view_a.rows && !any_positive; ++i)
        for (std::size_t j = i + 1; j < view_a.rows; ++j)
            if (labels[i] == labels[j]) {
                any_positive = true;
                break;
            }
    if (!any_positive) return u;

    LossResult s = sup_contrastive(view_a, labels, cfg);
    LossResult res;
    res.value = (1.0 - cfg.lambda_rep) * u.value + cfg.lambda_rep * s.value;
    res.grad_embeddings = u.grad_embeddings;
    scale(res.grad_embeddings, 1.0 - cfg.lambda_rep);
    axpy(res.grad_embeddings, cfg.lambda_rep, s.grad_embeddings);
    res.grad_view_b = u.grad_view_b;
    scale(res.grad_view_b, 1.0 - cfg.lambda_rep);
    return res;
}

LossResult cls_cross_entropy(const Matrix& embeddings, const std::vector<int>& labels,
                             const Matrix& w) {
    const std::size_t b = embeddings.rows, d = embeddings.cols, k = w.cols;
    if (w.rows != d) throw std::invalid_argument("cls_cross_entropy: W must be d x K");
    if (labels.size() != b) throw std::invalid_argument("cls_cross_entropy: one label per row");
    if (b == 0) throw std::invalid_argument("cls_cross_entropy: empty batch");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw std::out_of_range("cls_cross_entropy: label out of range");

    Matrix logits = matmul(embeddings, w);  // B x K
    Matrix grad_logits(b, k);
    LossResult res;
    std::vector<double> p(k);
    for (std::size_t i = 0; i < b; ++i) {
        softmax_inplace(logits.row(i), 1.0, p);
        res.value -= std::log(std::max(p[labels[i]], 1e-300)) / b;
        for (std::size_t j = 0; j < k; ++j)
            grad_logits(i, j) = (p[j] - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0)) / b;
    }
    res.grad_embeddings = matmul_nt(grad_logits, w);       // B x d
    res.grad_weights = matmul_tn(embeddings, grad_logits); // d x K
    return res;
}

LossResult unsup_cls(const Matrix& student_logits, const Matrix& teacher_logits,
                     const LossConfig& cfg) {
    cfg.validate();
    if (!student_logits.same_shape(teacher_logits))
        throw std::invalid_argument("unsup_cls: logit shapes differ");
    const std::size_t b = student_logits.rows, k = student_logits.cols;
    if (b == 0 || k == 0) throw std::invalid_argument("unsup_cls: empty input");

    Matrix s(b, k), z(b, k);
    for (std::size_t i = 0; i < b; ++i) {
        softmax_inplace(student_logits.row(i), 1.0, s.row(i));
        softmax_inplace(teacher_logits.row(i), cfg.teacher_temp, z.row(i));
    }

    std::vector<double> s_bar(k, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < k; ++j) s_bar[j] += s(i, j) / b;

    LossResult res;
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (z(i, j) > 0.0) res.value -= z(i, j) * std::log(std::max(s(i, j), 1e-300)) / b;
    res.value -= cfg.epsilon * entropy(s_bar);

    // cross-entropy part: (s - z)/B through each student softmax
    res.grad_embeddings = Matrix(b, k);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < k; ++j)
            res.grad_embeddings(i, j) = (s(i, j) - z(i, j)) / b;

    if (cfg.epsilon > 0.0) {
        // -eps * H(s_bar): dH/ds_bar_k = -(log s_bar_k + 1), chained through
        // the softmax Jacobian of each row
        std::vector<double> g(k);
        for (std::size_t j = 0; j < k; ++j)
            g[j] = (std::log(std::max(s_bar[j], 1e-300)) + 1.0) * cfg.epsilon / b;
        for (std::size_t i = 0; i < b; ++i) {
            double inner = 0.0;
            for (std::size_t j = 0; j < k; ++j) inner += g[j] * s(i, j);
            for (std::size_t j = 0; j < k; ++j)
                res.grad_embeddings(i, j) += s(i, j) * (g[j] - inner);
        }
    }
    return res;
}

namespace {

void accumulate(LossResult& acc, double weight, const LossResult& term) {
    acc.value += weight * term.value;
    auto add = [&](Matrix& dst, const Matrix& src) {
        if (src.data.empty()) return;
        if (dst.data.empty()) {
            dst = src;
            scale(dst, weight);
        } else {
            if (!dst.same_shape(src))
                throw std::invalid_argument("loss combination: gradient shape mismatch");
            axpy(dst, weight, src);
        }
    };
    add(acc.grad_embeddings, term.grad_embeddings);
    add(acc.grad_view_b, term.grad_view_b);
    add(acc.grad_weights, term.grad_weights);
}

}  // namespace

LossResult base_total(const LossResult& align, const LossResult& rep, const LossResult& cls) {
    LossResult res;
    accumulate(res, 1.0, align);
    accumulate(res, 1.0, rep);
    accumulate(res, 1.0, cls);
    return res;
}

LossResult incremental_total(const LossResult& align, const LossResult& rep,
                             const LossResult& cls, const LossConfig& cfg) {
    cfg.validate();
    LossResult res;
    accumulate(res, cfg.lambda_a, align);
    accumulate(res, 1.0, rep);
    accumulate(res, 1.0, cls);
    return res;
}

}  // namespace goal
