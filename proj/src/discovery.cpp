#include "goal/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "goal/hungarian.hpp"
#include "goal/numkit.hpp"

namespace goal {

ConfidentSubset select_confident(const Matrix& probabilities, double alpha) {
    const std::size_t n = probabilities.rows;
    if (n == 0) throw std::invalid_argument("select_confident: empty input");
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("select_confident: alpha must be in (0, 1]");

    std::vector<double> ent(n);
    for (std::size_t i = 0; i < n; ++i) ent[i] = entropy(probabilities.row(i));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ent[a] != ent[b]) return ent[a] < ent[b];
        return a < b;
    });

    const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(alpha * n));
    ConfidentSubset out;
    out.alpha = alpha;
    out.indices.assign(order.begin(), order.begin() + count);
    std::sort(out.indices.begin(), out.indices.end());
    out.entropies.reserve(count);
    for (std::size_t idx : out.indices) out.entropies.push_back(ent[idx]);
    return out;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, std::size_t k, Rng& rng, std::size_t max_iters) {
    const std::size_t n = points.rows, d = points.cols;
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");

    const Matrix x = normalize_rows(points);

    // k-means++ seeding
    Matrix centers(k, d);
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = rng.uniform_index(n);
        for (std::size_t j = 0; j < d; ++j) centers(0, j) = x(first, j);
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dist2[i] = std::min(dist2[i], sq_dist(x.row(i), centers.row(c - 1)));
                total += dist2[i];
            }
            std::size_t pick = 0;
            if (total <= 0.0) {
                pick = rng.uniform_index(n);
            } else {
                const double r = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += dist2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            }
            for (std::size_t j = 0; j < d; ++j) centers(c, j) = x(pick, j);
        }
    }

    ClusterResult res;
    res.assignment.assign(n, 0);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // assignment step; ties go to the lowest center index
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(x.row(i), centers.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double dd = sq_dist(x.row(i), centers.row(c));
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
            inertia += best_d;
        }
        res.inertia_trace.push_back(inertia);
        res.inertia = inertia;
        if (!changed && iter > 0) break;

        // update step
        centers = Matrix(k, d);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[res.assignment[i]];
            for (std::size_t j = 0; j < d; ++j) centers(res.assignment[i], j) += x(i, j);
        }
        std::vector<std::size_t> empties;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0)
                empties.push_back(c);
            else
                for (std::size_t j = 0; j < d; ++j) centers(c, j) /= counts[c];
        }
        // re-seed empty clusters with the point farthest from its own center
        for (std::size_t c : empties) {
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[res.assignment[i]] <= 1) continue;
                const double dd = sq_dist(x.row(i), centers.row(res.assignment[i]));
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            for (std::size_t j = 0; j < d; ++j) centers(c, j) = x(far, j);
        }
    }

    // unit-norm centers
    for (std::size_t c = 0; c < k; ++c) {
        double nrm = norm2(centers.row(c));
        if (nrm < 1e-12) {
            // degenerate symmetric mean; fall back to a member point
            for (std::size_t i = 0; i < n; ++i)
                if (res.assignment[i] == c) {
                    for (std::size_t j = 0; j < d; ++j) centers(c, j) = x(i, j);
                    break;
                }
            nrm = norm2(centers.row(c));
        }
        for (std::size_t j = 0; j < d; ++j) centers(c, j) /= nrm;
    }
    res.centers = std::move(centers);
    return res;
}

Matrix expand_classifier(const Matrix& w_old, const ClusterResult& centers, std::size_t c_new) {
    if (c_new == 0) return w_old;
    const std::size_t k = centers.centers.rows, d = w_old.rows;
    if (k < c_new) throw std::invalid_argument("expand_classifier: not enough cluster centers");
    if (centers.centers.cols != d)
        throw std::invalid_argument("expand_classifier: center dimension mismatch");

    // max cosine similarity of each center against the old columns
    std::vector<double> score(k, -std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < w_old.cols; ++j) {
            double num = 0.0, wn = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                num += centers.centers(c, i) * w_old(i, j);
                wn += w_old(i, j) * w_old(i, j);
            }
            const double cn = norm2(centers.centers.row(c));
            const double cosv = num / std::max(std::sqrt(wn) * cn, 1e-300);
            score[c] = std::max(score[c], cosv);
        }
        if (w_old.cols == 0) score[c] = 0.0;
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });

    std::vector<std::size_t> picked(order.begin(), order.begin() + c_new);
    std::sort(picked.begin(), picked.end());

    Matrix w(d, w_old.cols + c_new);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < w_old.cols; ++j) w(i, j) = w_old(i, j);
    for (std::size_t t = 0; t < c_new; ++t)
        for (std::size_t i = 0; i < d; ++i)
            w(i, w_old.cols + t) = centers.centers(picked[t], i);
    return w;
}

PrototypeMatch match_prototypes(const Matrix& centroids, const EtfFrame& frame,
                                const AllocationLedger& ledger) {
    const std::size_t k = centroids.rows;
    const auto& free = ledger.free_columns();
    if (k > free.size()) throw std::invalid_argument("match_prototypes: more centroids than free columns");
    if (centroids.cols != frame.dim())
        throw std::invalid_argument("match_prototypes: dimension mismatch");

    PrototypeMatch out;
    if (k == 0) return out;

    std::vector<std::size_t> free_cols(free.begin(), free.end());
    const Matrix& p = frame.prototypes();

    // minimize 1 - cosine; costs bounded in [0, 2]
    Matrix cost(k, free_cols.size());
    for (std::size_t i = 0; i < k; ++i) {
        const double cn = norm2(centroids.row(i));
        for (std::size_t j = 0; j < free_cols.size(); ++j) {
            double num = 0.0;
            for (std::size_t t = 0; t < centroids.cols; ++t)
                num += centroids(i, t) * p(t, free_cols[j]);
            cost(i, j) = 1.0 - num / std::max(cn, 1e-300);
        }
    }

    const auto assignment = min_cost_assignment_lex(cost);
    for (std::size_t i = 0; i < k; ++i) {
        out.phi[i] = free_cols[assignment[i]];
        out.objective += 1.0 - cost(i, assignment[i]);
    }
    return out;
}

std::vector<std::size_t> route_alignment_targets(const ConfidentSubset& subset,
                                                 const std::vector<int>& pseudo_labels,
                                                 int first_new_class,
                                                 const AllocationLedger& ledger,
                                                 const PrototypeMatch& match,
                                                 const std::vector<std::size_t>& cluster_assignment) {
    const std::size_t m = subset.indices.size();
    if (pseudo_labels.size() != m || cluster_assignment.size() != m)
        throw std::invalid_argument("route_alignment_targets: per-sample inputs must match subset size");

    std::vector<std::size_t> cols(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (pseudo_labels[i] < first_new_class) {
            cols[i] = ledger.column_of(pseudo_labels[i]);
        } else {
            auto it = match.phi.find(cluster_assignment[i]);
            if (it == match.phi.end())
                throw std::invalid_argument("route_alignment_targets: cluster has no matched column");
            cols[i] = it->second;
        }
    }
    return cols;
}

}  // namespace goal
