#pragma once

#include <set>
#include <vector>

#include "goal/etf.hpp"
#include "goal/matrix.hpp"

namespace goal {

struct AccuracyTriple {
    double all = 0.0;  // percent
    double old_acc = 0.0;
    double new_acc = 0.0;
    std::size_t n_all = 0;
    std::size_t n_old = 0;
    std::size_t n_new = 0;
};

struct NcDiagnostics {
    double nc1 = 0.0;  // trace(Sigma_W) / trace(Sigma_B)
    double nc2 = 0.0;  // max deviation of the centered class-mean Gram from the ideal
    double nc3 = 0.0;  // mean cosine between centered class means and assigned prototypes
    double nc4 = 0.0;  // nearest-class-mean vs linear-head agreement fraction
};

// Clustering accuracy after optimally matching predicted ids to true ids
// over all classes seen so far; split by truth membership in old_set.
AccuracyTriple hungarian_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                                  const std::set<int>& old_set);

// stage0_all minus the final stage's old accuracy.
double forgetting_rate(const std::vector<AccuracyTriple>& incremental_reports, double stage0_all);

// Mean new-class accuracy across incremental stages.
double discovery_rate(const std::vector<AccuracyTriple>& incremental_reports);

// Labels index both W columns and ledger classes; needs >= 2 classes with
// >= 2 samples each.
NcDiagnostics nc_diagnostics(const Matrix& embeddings, const std::vector<int>& labels,
                             const EtfFrame& frame, const AllocationLedger& ledger,
                             const Matrix& w);

}  // namespace goal
