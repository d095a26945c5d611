#pragma once

#include <map>
#include <vector>

#include "goal/etf.hpp"
#include "goal/matrix.hpp"
#include "goal/rng.hpp"

namespace goal {

struct ConfidentSubset {
    std::vector<std::size_t> indices;  // ascending sample index
    std::vector<double> entropies;     // entropy per selected sample, in nats
    double alpha = 0.0;
};

struct ClusterResult {
    Matrix centers;                   // k x d, unit-norm rows
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    std::vector<double> inertia_trace;  // one entry per Lloyd iteration
};

struct PrototypeMatch {
    std::map<std::size_t, std::size_t> phi;  // cluster id -> frame column
    double objective = 0.0;                  // total cosine similarity
};

// floor(alpha*N) lowest-entropy rows (at least one); ties broken by index.
ConfidentSubset select_confident(const Matrix& probabilities, double alpha);

// Lloyd's algorithm with k-means++ seeding over l2-normalized points;
// centers are renormalized to unit length after convergence.
ClusterResult kmeans(const Matrix& points, std::size_t k, Rng& rng, std::size_t max_iters = 100);

// Append the c_new cluster centers least similar (max cosine) to columns of
// w_old; ties broken by ascending center index.
Matrix expand_classifier(const Matrix& w_old, const ClusterResult& centers, std::size_t c_new);

// Hungarian matching of centroids to free frame columns, maximizing total
// cosine similarity; lexicographically smallest assignment among optima.
PrototypeMatch match_prototypes(const Matrix& centroids, const EtfFrame& frame,
                                const AllocationLedger& ledger);

// Frame column per confident sample: old pseudo-labels use their ledger
// column, new pseudo-labels use the matched column of their cluster.
// A pseudo-label is "new" when it is >= first_new_class.
std::vector<std::size_t> route_alignment_targets(const ConfidentSubset& subset,
                                                 const std::vector<int>& pseudo_labels,
                                                 int first_new_class,
                                                 const AllocationLedger& ledger,
                                                 const PrototypeMatch& match,
                                                 const std::vector<std::size_t>& cluster_assignment);

}  // namespace goal
