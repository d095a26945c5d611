#include "goal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "goal/hungarian.hpp"
#include "goal/numkit.hpp"

namespace goal {

AccuracyTriple hungarian_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                                  const std::set<int>& old_set) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("hungarian_accuracy: pred/truth length mismatch");
    const std::size_t n = pred.size();
    if (n == 0) throw std::invalid_argument("hungarian_accuracy: empty input");

    std::map<int, std::size_t> pred_ids, truth_ids;
    for (int p : pred)
        if (!pred_ids.count(p)) pred_ids[p] = pred_ids.size();
    for (int t : truth)
        if (!truth_ids.count(t)) truth_ids[t] = truth_ids.size();

    const std::size_t side = std::max(pred_ids.size(), truth_ids.size());
    Matrix contingency(side, side);  // zero-padded square
    for (std::size_t i = 0; i < n; ++i)
        contingency(pred_ids[pred[i]], truth_ids[truth[i]]) += 1.0;

    // maximize matches == minimize (n - count)
    Matrix cost(side, side);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) cost(i, j) = n - contingency(i, j);
    const auto assignment = min_cost_assignment(cost);

    // relabel predictions to matched truth columns
    std::vector<int> truth_of_col(side, -1);
    for (const auto& [t, col] : truth_ids) truth_of_col[col] = t;

    AccuracyTriple acc;
    std::size_t hit_all = 0, hit_old = 0, hit_new = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool hit = truth_of_col[assignment[pred_ids[pred[i]]]] == truth[i];
        const bool is_old = old_set.count(truth[i]) > 0;
        ++acc.n_all;
        if (is_old)
            ++acc.n_old;
        else
            ++acc.n_new;
        if (hit) {
            ++hit_all;
            (is_old ? hit_old : hit_new)++;
        }
    }
    acc.all = 100.0 * hit_all / acc.n_all;
    acc.old_acc = acc.n_old ? 100.0 * hit_old / acc.n_old : 0.0;
    acc.new_acc = acc.n_new ? 100.0 * hit_new / acc.n_new : 0.0;
    return acc;
}

double forgetting_rate(const std::vector<AccuracyTriple>& incremental_reports, double stage0_all) {
    if (incremental_reports.empty())
        throw std::invalid_argument("forgetting_rate: needs at least one incremental stage");
    return stage0_all - incremental_reports.back().old_acc;
}

double discovery_rate(const std::vector<AccuracyTriple>& incremental_reports) {
    if (incremental_reports.empty())
        throw std::invalid_argument("discovery_rate: needs at least one incremental stage");
    double s = 0.0;
    for (const auto& r : incremental_reports) s += r.new_acc;
    return s / incremental_reports.size();
}

NcDiagnostics nc_diagnostics(const Matrix& embeddings, const std::vector<int>& labels,
                             const EtfFrame& frame, const AllocationLedger& ledger,
                             const Matrix& w) {
    const std::size_t n = embeddings.rows, d = embeddings.cols;
    if (labels.size() != n) throw std::invalid_argument("nc_diagnostics: one label per row");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    if (by_class.size() < 2)
        throw std::invalid_argument("nc_diagnostics: needs at least two classes");
    for (const auto& [c, idx] : by_class)
        if (idx.size() < 2)
            throw std::invalid_argument("nc_diagnostics: every class needs >= 2 samples");

    // class means and global mean
    std::map<int, std::vector<double>> mu;
    std::vector<double> mu_g(d, 0.0);
    for (const auto& [c, idx] : by_class) {
        std::vector<double> m(d, 0.0);
        for (std::size_t i : idx)
            for (std::size_t j = 0; j < d; ++j) m[j] += embeddings(i, j) / idx.size();
        mu[c] = std::move(m);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu_g[j] += embeddings(i, j) / n;

    // traces of within- and between-class scatter (average outer products)
    double tr_w = 0.0, tr_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = mu[labels[i]];
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = embeddings(i, j) - m[j];
            tr_w += dv * dv / n;
        }
    }
    for (const auto& [c, m] : mu) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = m[j] - mu_g[j];
            tr_b += dv * dv / by_class.size();
        }
    }

    NcDiagnostics out;
    out.nc1 = tr_b > 0.0 ? tr_w / tr_b : 0.0;

    // centered, normalized class means
    const std::size_t kc = by_class.size();
    Matrix mhat(kc, d);
    std::vector<int> class_of_row;
    {
        std::size_t r = 0;
        for (const auto& [c, m] : mu) {
            double nrm = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                mhat(r, j) = m[j] - mu_g[j];
                nrm += mhat(r, j) * mhat(r, j);
            }
            nrm = std::sqrt(nrm);
            if (nrm > 0.0)
                for (std::size_t j = 0; j < d; ++j) mhat(r, j) /= nrm;
            class_of_row.push_back(c);
            ++r;
        }
    }
    const Matrix gram = matmul_nt(mhat, mhat);
    out.nc2 = max_abs_diff(gram, ideal_gram(kc));

    // mean cosine against assigned prototypes
    const Matrix& p = frame.prototypes();
    double cos_sum = 0.0;
    for (std::size_t r = 0; r < kc; ++r) {
        const std::size_t col = ledger.column_of(class_of_row[r]);
        double cv = 0.0;
        for (std::size_t j = 0; j < d; ++j) cv += mhat(r, j) * p(j, col);
        cos_sum += cv;
    }
    out.nc3 = cos_sum / kc;

    // nearest-class-mean vs linear-head argmax agreement
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int best_mean = class_of_row[0];
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& [c, m] : mu) {
            double dd = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double dv = embeddings(i, j) - m[j];
                dd += dv * dv;
            }
            if (dd < best_d) {
                best_d = dd;
                best_mean = c;
            }
        }
        int best_head = 0;
        double best_s = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < w.cols; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += w(j, c) * embeddings(i, j);
            if (s > best_s) {
                best_s = s;
                best_head = static_cast<int>(c);
            }
        }
        if (best_mean == best_head) ++agree;
    }
    out.nc4 = static_cast<double>(agree) / n;
    return out;
}

}  // namespace goal
