#include "goal/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "goal/hungarian.hpp"
#include "goal/numkit.hpp"

namespace goal {

void SessionConfig::validate() const {
    loss.validate();
    sgd.validate();
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("SessionConfig: alpha must be in (0, 1]");
    if (sigma_aug < 0.0) throw std::invalid_argument("SessionConfig: sigma_aug must be >= 0");
}

namespace {

Matrix add_noise(const Matrix& inputs, double sigma, Rng& rng) {
    Matrix out = inputs;
    if (sigma > 0.0)
        for (double& v : out.data) v += sigma * rng.gaussian();
    return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    return idx;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(rows[i], j);
    return out;
}

int argmax_row(std::span<const double> v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Session::Session(EtfFrame frame, Encoder encoder, SessionConfig cfg, std::uint64_t seed)
    : frame_(std::move(frame)),
      encoder_(std::move(encoder)),
      cfg_(std::move(cfg)),
      ledger_(frame_.num_prototypes()),
      rng_(seed) {
    cfg_.validate();
    if (encoder_.output_dim() != frame_.dim())
        throw std::invalid_argument("Session: encoder output dim must match frame dim");
}

Matrix Session::embed(const Matrix& inputs, Encoder::Cache* cache) const {
    return encoder_.forward(inputs, cache);
}

std::vector<int> Session::predict(const Matrix& inputs) const {
    const Matrix logits = matmul(embed(inputs), w_);
    std::vector<int> pred(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) pred[i] = argmax_row(logits.row(i));
    return pred;
}

AccuracyTriple Session::evaluate(const StageData& stage) const {
    std::set<int> old_set(old_truth_.begin(), old_truth_.end());
    if (old_set.empty()) old_set.insert(stage.classes.begin(), stage.classes.end());
    return hungarian_accuracy(predict(stage.test_inputs), stage.test_labels, old_set);
}

NcDiagnostics Session::diagnose(const Matrix& inputs, const std::vector<int>& session_labels) const {
    return nc_diagnostics(normalize_rows(embed(inputs)), session_labels, frame_, ledger_, w_);
}

StageReport Session::run_base(const StageData& stage) {
    if (t_ != 0) throw std::logic_error("run_base: base session already completed");
    if (!stage.labeled) throw std::invalid_argument("run_base: stage-0 data must be labeled");
    const std::size_t n = stage.train_inputs.rows;
    if (n == 0) throw std::invalid_argument("run_base: empty base session");

    // map true base labels to session class ids 0..C0-1 and bind columns
    std::map<int, int> truth_to_session;
    for (int y : stage.train_labels)
        if (!truth_to_session.count(y)) truth_to_session[y] = 0;
    {
        int next = 0;
        for (auto& [truth, sid] : truth_to_session) {
            sid = next++;
            ledger_.assign(sid);  // smallest-free policy for base classes
        }
    }
    for (int y : stage.train_labels)
        if (!truth_to_session.count(y))
            throw std::invalid_argument("run_base: label outside the base class set");

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = truth_to_session.at(stage.train_labels[i]);

    const std::size_t c0 = truth_to_session.size();
    Rng winit = rng_.split(1);
    w_ = gaussian_matrix(frame_.dim(), c0, winit, 1.0 / std::sqrt((double)frame_.dim()));

    SgdState state = SgdState::for_encoder(encoder_);
    Rng epoch_rng = rng_.split(2);

    StageReport report;
    report.t = 0;

    const std::size_t epochs = cfg_.base_epochs;
    const std::size_t ckpt_every =
        epochs > 0 && cfg_.nc_checkpoints > 1
            ? std::max<std::size_t>(1, epochs / (cfg_.nc_checkpoints - 1))
            : epochs + 1;
    auto checkpoint = [&] {
        try {
            report.nc_trace.push_back(diagnose(stage.train_inputs, labels));
        } catch (const std::invalid_argument&) {
            // degenerate class sizes; skip the snapshot
        }
    };
    checkpoint();

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const auto order = shuffled_indices(n, epoch_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg_.sgd.batch_size) {
            const std::size_t len = std::min(cfg_.sgd.batch_size, n - start);
            if (len < 2) break;
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + start + len);
            const Matrix inputs = gather_rows(stage.train_inputs, batch);
            std::vector<int> ybatch(len);
            for (std::size_t i = 0; i < len; ++i) ybatch[i] = labels[batch[i]];

            const Matrix xa = add_noise(inputs, cfg_.sigma_aug, epoch_rng);
            const Matrix xb = add_noise(inputs, cfg_.sigma_aug, epoch_rng);
            Encoder::Cache ca, cb;
            const Matrix ea = encoder_.forward(xa, &ca);
            const Matrix eb = encoder_.forward(xb, &cb);
            const Matrix na = normalize_rows(ea);
            const Matrix nb = normalize_rows(eb);

            LossResult align;
            if (cfg_.sup_etf_align) align = supervised_alignment(ea, ybatch, frame_, ledger_);
            LossResult rep = base_rep(na, nb, ybatch, cfg_.loss);
            LossResult cls = cls_cross_entropy(ea, ybatch, w_);

            epoch_loss += align.value + rep.value + cls.value;
            ++batches;

            Matrix grad_ea = normalize_rows_backward(ea, rep.grad_embeddings);
            Matrix grad_eb = normalize_rows_backward(eb, rep.grad_view_b);
            if (cfg_.sup_etf_align) axpy(grad_ea, 1.0, align.grad_embeddings);
            axpy(grad_ea, 1.0, cls.grad_embeddings);

            Encoder::Grads ga = encoder_.backward(ca, grad_ea);
            const Encoder::Grads gb = encoder_.backward(cb, grad_eb);
            for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
                axpy(ga.d_weights[l], 1.0, gb.d_weights[l]);
                axpy(ga.d_biases[l], 1.0, gb.d_biases[l]);
            }
            sgd_step(encoder_, ga, cfg_.sgd, state);
            sgd_step_matrix(w_, cls.grad_weights, cfg_.sgd, state.v_extra);
        }
        if (batches > 0) report.loss_trace.push_back(epoch_loss / batches);
        if ((epoch + 1) % ckpt_every == 0 || epoch + 1 == epochs) checkpoint();
    }

    if (!report.nc_trace.empty()) report.nc = report.nc_trace.back();
    report.acc = evaluate(stage);

    old_truth_ = stage.classes;
    first_new_class_ = c0;
    t_ = 1;
    return report;
}

StageReport Session::run_incremental(const StageData& stage, std::size_t k_new) {
    if (t_ == 0) throw std::logic_error("run_incremental: base session has not run");
    const std::size_t n = stage.train_inputs.rows;
    if (n == 0) throw std::invalid_argument("run_incremental: empty session");
    if (k_new > ledger_.free_columns().size())
        throw std::invalid_argument("run_incremental: k_new exceeds free frame columns");

    const std::size_t c_old = w_.cols;
    first_new_class_ = c_old;

    StageReport report;
    report.t = t_;

    Rng stage_rng = rng_.split(1000 + t_);

    // cluster-guided classifier expansion
    if (k_new > 0) {
        const Matrix e0 = embed(stage.train_inputs);
        const std::size_t k_exp = std::min(c_old + k_new, n);
        Rng km_rng = stage_rng.split(1);
        ClusterResult clusters = kmeans(e0, k_exp, km_rng);
        report.kmeans_inertia = clusters.inertia;
        w_ = expand_classifier(w_, clusters, k_new);
    }

    SgdState state = SgdState::for_encoder(encoder_);
    Rng epoch_rng = stage_rng.split(2);

    // routing state, frozen at the first epoch unless told otherwise
    bool routing_ready = false;
    Matrix routing_centroids;
    PrototypeMatch match;

    // per-sample routed frame column for the current epoch's confident set
    std::vector<std::ptrdiff_t> routed_col;  // -1 when not confident / unroutable

    auto compute_routing = [&](const Matrix& e_full, const Matrix& probs) {
        routed_col.assign(n, -1);
        const ConfidentSubset subset = select_confident(probs, cfg_.alpha);
        report.confident_count = subset.indices.size();
        report.confident_mean_entropy =
            subset.entropies.empty()
                ? 0.0
                : std::accumulate(subset.entropies.begin(), subset.entropies.end(), 0.0) /
                      subset.entropies.size();

        std::vector<int> pseudo(subset.indices.size());
        for (std::size_t i = 0; i < subset.indices.size(); ++i)
            pseudo[i] = argmax_row(probs.row(subset.indices[i]));

        // which confident samples go to free prototypes
        std::vector<std::size_t> new_rows;
        for (std::size_t i = 0; i < subset.indices.size(); ++i)
            if (cfg_.literal_unassigned_only || pseudo[i] >= static_cast<int>(c_old))
                new_rows.push_back(subset.indices[i]);

        if (k_new > 0 && !new_rows.empty()) {
            if (!routing_ready || cfg_.recompute_match_per_epoch) {
                const std::size_t k_conf = std::min(k_new, new_rows.size());
                Rng km_rng = stage_rng.split(3);
                const ClusterResult cr = kmeans(gather_rows(e_full, new_rows), k_conf, km_rng);
                routing_centroids = cr.centers;
                match = match_prototypes(routing_centroids, frame_, ledger_);
                report.match_objective = match.objective;
                routing_ready = true;
            }
            // nearest stored centroid per confident-new sample
            const Matrix e_norm = normalize_rows(gather_rows(e_full, new_rows));
            for (std::size_t i = 0; i < new_rows.size(); ++i) {
                std::size_t best = 0;
                double best_d = std::numeric_limits<double>::lowest();
                for (std::size_t c = 0; c < routing_centroids.rows; ++c) {
                    const double s = dot(e_norm.row(i), routing_centroids.row(c));
                    if (s > best_d) {
                        best_d = s;
                        best = c;
                    }
                }
                routed_col[new_rows[i]] = static_cast<std::ptrdiff_t>(match.phi.at(best));
            }
        }
        if (!cfg_.literal_unassigned_only) {
            for (std::size_t i = 0; i < subset.indices.size(); ++i)
                if (pseudo[i] < static_cast<int>(c_old))
                    routed_col[subset.indices[i]] =
                        static_cast<std::ptrdiff_t>(ledger_.column_of(pseudo[i]));
        }
    };

    for (std::size_t epoch = 0; epoch < cfg_.incremental_epochs; ++epoch) {
        const Matrix e_full = embed(stage.train_inputs);
        Matrix probs = matmul(e_full, w_);
        for (std::size_t i = 0; i < probs.rows; ++i)
            softmax_inplace(probs.row(i), 1.0, probs.row(i));
        compute_routing(e_full, probs);

        const auto order = shuffled_indices(n, epoch_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg_.sgd.batch_size) {
            const std::size_t len = std::min(cfg_.sgd.batch_size, n - start);
            if (len < 2) break;
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + start + len);
            const Matrix inputs = gather_rows(stage.train_inputs, batch);

            const Matrix xa = add_noise(inputs, cfg_.sigma_aug, epoch_rng);
            const Matrix xb = add_noise(inputs, cfg_.sigma_aug, epoch_rng);
            Encoder::Cache ca, cb;
            const Matrix ea = encoder_.forward(xa, &ca);
            const Matrix eb = encoder_.forward(xb, &cb);

            // pseudo-label classification: student on view a, sharpened
            // teacher on view b, no gradient through the teacher
            const Matrix student_logits = matmul(ea, w_);
            const Matrix teacher_logits = matmul(eb, w_);
            const LossResult cls = unsup_cls(student_logits, teacher_logits, cfg_.loss);
            Matrix grad_ea = matmul_nt(cls.grad_embeddings, w_);
            Matrix grad_w = matmul_tn(ea, cls.grad_embeddings);

            const Matrix na = normalize_rows(ea);
            const Matrix nb = normalize_rows(eb);
            const LossResult rep = unsup_contrastive(na, nb, cfg_.loss);
            axpy(grad_ea, 1.0, normalize_rows_backward(ea, rep.grad_embeddings));
            const Matrix grad_eb = normalize_rows_backward(eb, rep.grad_view_b);

            double align_value = 0.0;
            if (cfg_.unsup_etf_align) {
                std::vector<std::size_t> conf_rows;
                std::vector<std::size_t> conf_cols;
                for (std::size_t i = 0; i < len; ++i)
                    if (routed_col[batch[i]] >= 0) {
                        conf_rows.push_back(i);
                        conf_cols.push_back(static_cast<std::size_t>(routed_col[batch[i]]));
                    }
                if (!conf_rows.empty()) {
                    const LossResult align =
                        unsup_alignment(gather_rows(ea, conf_rows), conf_cols, frame_);
                    align_value = align.value;
                    for (std::size_t i = 0; i < conf_rows.size(); ++i)
                        for (std::size_t j = 0; j < ea.cols; ++j)
                            grad_ea(conf_rows[i], j) +=
                                cfg_.loss.lambda_a * align.grad_embeddings(i, j);
                }
            }

            epoch_loss += cfg_.loss.lambda_a * align_value + rep.value + cls.value;
            ++batches;

            Encoder::Grads ga = encoder_.backward(ca, grad_ea);
            const Encoder::Grads gb = encoder_.backward(cb, grad_eb);
            for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
                axpy(ga.d_weights[l], 1.0, gb.d_weights[l]);
                axpy(ga.d_biases[l], 1.0, gb.d_biases[l]);
            }
            sgd_step(encoder_, ga, cfg_.sgd, state);
            sgd_step_matrix(w_, grad_w, cfg_.sgd, state.v_extra);
        }
        if (batches > 0) report.loss_trace.push_back(epoch_loss / batches);
    }

    // bind the session's novel classes to frame columns
    if (k_new > 0) {
        if (routing_ready && routing_centroids.rows > 0) {
            // pair each new classifier column with the routed column of the
            // most compatible centroid
            const std::size_t kn = std::min<std::size_t>(k_new, routing_centroids.rows);
            Matrix cost(kn, routing_centroids.rows);
            for (std::size_t i = 0; i < kn; ++i) {
                std::vector<double> wc(w_.rows);
                for (std::size_t j = 0; j < w_.rows; ++j) wc[j] = w_(j, c_old + i);
                const double nrm = std::max(norm2(std::span<const double>(wc)), 1e-300);
                for (std::size_t c = 0; c < routing_centroids.rows; ++c)
                    cost(i, c) =
                        1.0 - dot(std::span<const double>(wc), routing_centroids.row(c)) / nrm;
            }
            const auto pairing = min_cost_assignment_lex(cost);
            for (std::size_t i = 0; i < kn; ++i)
                ledger_.commit(static_cast<int>(c_old + i), match.phi.at(pairing[i]));
            // leftover new classes (centroid-starved session): smallest free
            for (std::size_t i = kn; i < k_new; ++i)
                ledger_.assign(static_cast<int>(c_old + i));
        } else {
            // no routing happened (alignment disabled or no confident-new
            // samples): match the new weight columns to free prototypes
            Matrix wn(k_new, w_.rows);
            for (std::size_t i = 0; i < k_new; ++i)
                for (std::size_t j = 0; j < w_.rows; ++j) wn(i, j) = w_(j, c_old + i);
            const PrototypeMatch m = match_prototypes(wn, frame_, ledger_);
            for (std::size_t i = 0; i < k_new; ++i)
                ledger_.commit(static_cast<int>(c_old + i), m.phi.at(i));
        }
    }

    report.acc = evaluate(stage);
    try {
        report.nc = nc_diagnostics(normalize_rows(embed(stage.test_inputs)),
                                   predict(stage.test_inputs), frame_, ledger_, w_);
    } catch (const std::invalid_argument&) {
        // predicted classes too sparse for a snapshot
    }

    old_truth_ = stage.classes;
    ++t_;
    return report;
}

ProtocolResult run_protocol(const std::vector<StageData>& stream, const EtfFrame& frame,
                            const Encoder& encoder_init, const SessionConfig& cfg,
                            std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("run_protocol: empty stream");
    Session session(frame, encoder_init, cfg, seed);

    ProtocolResult result;
    result.stages.push_back(session.run_base(stream.front()));
    std::vector<AccuracyTriple> inc;
    for (std::size_t t = 1; t < stream.size(); ++t) {
        StageReport r = session.run_incremental(stream[t], stream[t].new_classes.size());
        inc.push_back(r.acc);
        result.stages.push_back(std::move(r));
    }
    if (!inc.empty()) {
        result.m_f = forgetting_rate(inc, result.stages.front().acc.all);
        result.m_d = discovery_rate(inc);
    }
    return result;
}

}  // namespace goal
