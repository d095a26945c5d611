#include "goal/etf.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "goal/numkit.hpp"

namespace goal {

EtfFrame EtfFrame::build(std::size_t d, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("EtfFrame: K must be >= 2");
    if (d < k) throw std::invalid_argument("EtfFrame: requires d >= K");

    Rng rng(seed);
    Matrix u = orthonormal_basis(d, k, rng);

    // P = sqrt(K/(K-1)) * U * (I - 1/K * 11^T)
    const double s = std::sqrt(static_cast<double>(k) / (k - 1));
    Matrix p(d, k);
    for (std::size_t i = 0; i < d; ++i) {
        double rowsum = 0.0;
        for (std::size_t j = 0; j < k; ++j) rowsum += u(i, j);
        for (std::size_t j = 0; j < k; ++j) p(i, j) = s * (u(i, j) - rowsum / k);
    }

    // columns are unit norm analytically; renormalize away fp drift
    for (std::size_t j = 0; j < k; ++j) {
        double n = 0.0;
        for (std::size_t i = 0; i < d; ++i) n += p(i, j) * p(i, j);
        n = std::sqrt(n);
        for (std::size_t i = 0; i < d; ++i) p(i, j) /= n;
    }
    check_finite(p, "EtfFrame");

    EtfFrame f;
    f.d_ = d;
    f.k_ = k;
    f.seed_ = seed;
    f.p_ = std::move(p);
    return f;
}

std::vector<double> EtfFrame::prototype(std::size_t col) const {
    if (col >= k_) throw std::out_of_range("EtfFrame::prototype: column out of range");
    std::vector<double> v(d_);
    for (std::size_t i = 0; i < d_; ++i) v[i] = p_(i, col);
    return v;
}

void EtfFrame::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EtfFrame::save_csv: cannot open " + path);
    out << "d,K,seed\n" << d_ << ',' << k_ << ',' << seed_ << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < k_; ++j) {
            if (j) out << ',';
            out << p_(i, j);
        }
        out << '\n';
    }
}

EtfFrame EtfFrame::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("EtfFrame::load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("d,K,seed", 0) != 0)
        throw std::runtime_error("EtfFrame::load_csv: bad header in " + path);
    if (!std::getline(in, line))
        throw std::runtime_error("EtfFrame::load_csv: missing dimension line");
    EtfFrame f;
    {
        std::istringstream ss(line);
        char c;
        if (!(ss >> f.d_ >> c >> f.k_ >> c >> f.seed_))
            throw std::runtime_error("EtfFrame::load_csv: bad dimension line");
    }
    f.p_ = Matrix(f.d_, f.k_);
    for (std::size_t i = 0; i < f.d_; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("EtfFrame::load_csv: truncated matrix");
        std::istringstream ss(line);
        std::string cell;
        for (std::size_t j = 0; j < f.k_; ++j) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("EtfFrame::load_csv: short row");
            f.p_(i, j) = std::stod(cell);
        }
    }
    return f;
}

Matrix ideal_gram(std::size_t k) {
    if (k < 2) throw std::invalid_argument("ideal_gram: K must be >= 2");
    Matrix g(k, k, -1.0 / (k - 1));
    for (std::size_t i = 0; i < k; ++i) g(i, i) = 1.0;
    return g;
}

AllocationLedger::AllocationLedger(std::size_t k) : k_(k) {
    for (std::size_t i = 0; i < k; ++i) free_.insert(i);
}

std::size_t AllocationLedger::assign(int class_id) {
    if (assignments_.count(class_id))
        throw std::invalid_argument("AllocationLedger: class already assigned");
    if (free_.empty()) throw std::runtime_error("AllocationLedger: no free columns left");
    const std::size_t col = *free_.begin();
    free_.erase(free_.begin());
    assignments_[class_id] = col;
    return col;
}

void AllocationLedger::commit(int class_id, std::size_t column) {
    if (assignments_.count(class_id))
        throw std::invalid_argument("AllocationLedger: class already assigned");
    auto it = free_.find(column);
    if (it == free_.end())
        throw std::invalid_argument("AllocationLedger: column not free");
    free_.erase(it);
    assignments_[class_id] = column;
}

std::size_t AllocationLedger::column_of(int class_id) const {
    auto it = assignments_.find(class_id);
    if (it == assignments_.end())
        throw std::out_of_range("AllocationLedger: class has no assigned column");
    return it->second;
}

}  // namespace goal
