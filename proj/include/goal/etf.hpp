#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "goal/matrix.hpp"

namespace goal {

// Fixed simplex equiangular tight frame: K unit-norm prototype columns in
// R^d with pairwise inner product -1/(K-1). Frozen after construction.
class EtfFrame {
public:
    static EtfFrame build(std::size_t d, std::size_t k, std::uint64_t seed);

    std::size_t dim() const { return d_; }
    std::size_t num_prototypes() const { return k_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& prototypes() const { return p_; }  // d x K

    // column k as a contiguous vector
    std::vector<double> prototype(std::size_t col) const;

    void save_csv(const std::string& path) const;
    static EtfFrame load_csv(const std::string& path);

private:
    EtfFrame() = default;
    std::size_t d_ = 0;
    std::size_t k_ = 0;
    std::uint64_t seed_ = 0;
    Matrix p_;
};

// K x K matrix with 1 on the diagonal and -1/(K-1) off it.
Matrix ideal_gram(std::size_t k);

// Which frame columns are bound to classes and which are still free.
class AllocationLedger {
public:
    explicit AllocationLedger(std::size_t k);

    // bind class_id to the smallest free column
    std::size_t assign(int class_id);
    // bind class_id to a specific free column (incremental matching path)
    void commit(int class_id, std::size_t column);

    bool has(int class_id) const { return assignments_.count(class_id) > 0; }
    std::size_t column_of(int class_id) const;

    const std::map<int, std::size_t>& assignments() const { return assignments_; }
    const std::set<std::size_t>& free_columns() const { return free_; }
    std::size_t capacity() const { return k_; }

private:
    std::size_t k_ = 0;
    std::map<int, std::size_t> assignments_;
    std::set<std::size_t> free_;
};

}  // namespace goal
