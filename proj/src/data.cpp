#include "goal/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "goal/numkit.hpp"
#include "goal/rng.hpp"

namespace goal {

std::vector<std::size_t> StreamSpec::resolved_new_per_stage() const {
    if (!new_per_stage.empty()) return new_per_stage;
    std::vector<std::size_t> out(stages, 0);
    const std::size_t remaining = total_classes - base_classes;
    for (std::size_t t = 0; t < stages; ++t)
        out[t] = remaining / stages + (t < remaining % stages ? 1 : 0);
    return out;
}

void StreamSpec::validate() const {
    if (total_classes < 1) throw std::invalid_argument("StreamSpec: total_classes must be >= 1");
    if (base_classes > total_classes)
        throw std::invalid_argument("StreamSpec: base_classes exceeds total_classes");
    const auto nps = resolved_new_per_stage();
    if (nps.size() != stages)
        throw std::invalid_argument("StreamSpec: new_per_stage length must equal stages");
    std::size_t total_new = 0;
    for (auto n : nps) total_new += n;
    if (base_classes + total_new > total_classes)
        throw std::invalid_argument("StreamSpec: class schedule exceeds total_classes");
    if (old_class_mix_fraction < 0.0 || old_class_mix_fraction >= 1.0)
        throw std::invalid_argument("StreamSpec: old_class_mix_fraction must be in [0, 1)");
    if (input_dim < 2) throw std::invalid_argument("StreamSpec: input_dim must be >= 2");
    if (noise_sigma < 0.0) throw std::invalid_argument("StreamSpec: noise_sigma must be >= 0");
    if (samples_per_class_train < 1 || samples_per_class_test < 1)
        throw std::invalid_argument("StreamSpec: per-class sample counts must be >= 1");
}

namespace {

constexpr std::size_t kRejectionBudget = 100000;

std::vector<double> random_unit_vector(std::size_t d, Rng& rng) {
    std::vector<double> v(d);
    double n = 0.0;
    do {
        n = 0.0;
        for (auto& x : v) {
            x = rng.gaussian();
            n += x * x;
        }
    } while (n == 0.0);
    n = std::sqrt(n);
    for (auto& x : v) x /= n;
    return v;
}

// class means on the unit sphere, every pair separated by at least min_angle
Matrix sample_class_means(std::size_t n_classes, std::size_t d, double min_angle_deg, Rng& rng) {
    const double cos_max = std::cos(min_angle_deg * std::numbers::pi / 180.0);
    Matrix means(n_classes, d);
    std::size_t attempts = 0;
    std::size_t placed = 0;
    while (placed < n_classes) {
        if (++attempts > kRejectionBudget)
            throw InfeasibleSpecError(
                "generate_stream: could not place class means at the requested separation "
                "(infeasible spec)");
        const auto v = random_unit_vector(d, rng);
        bool ok = true;
        for (std::size_t c = 0; c < placed && ok; ++c)
            if (dot(means.row(c), std::span<const double>(v)) > cos_max) ok = false;
        if (!ok) continue;
        for (std::size_t j = 0; j < d; ++j) means(placed, j) = v[j];
        ++placed;
    }
    return means;
}

void append_sample(Matrix& inputs, std::vector<int>& labels, std::vector<std::string>& ids,
                   std::size_t row, const Matrix& means, int cls, double sigma, Rng& rng,
                   std::size_t& id_counter) {
    for (std::size_t j = 0; j < inputs.cols; ++j)
        inputs(row, j) = means(cls, j) + sigma * rng.gaussian();
    labels[row] = cls;
    ids[row] = "s" + std::to_string(id_counter++);
}

}  // namespace

std::vector<StageData> generate_stream(const StreamSpec& spec) {
    spec.validate();
    Rng master(spec.seed);
    Rng mean_rng = master.split(0);

    const auto nps = spec.resolved_new_per_stage();
    std::size_t scheduled = spec.base_classes;
    for (auto n : nps) scheduled += n;

    const Matrix means = sample_class_means(scheduled, spec.input_dim,
                                            spec.class_separation_deg, mean_rng);

    std::size_t id_counter = 0;
    std::vector<int> seen;  // C^{t-1}
    std::vector<StageData> stream;
    int next_class = 0;

    for (std::size_t t = 0; t <= spec.stages; ++t) {
        Rng rng = master.split(100 + t);
        StageData stage;
        stage.t = t;
        stage.labeled = (t == 0);

        const std::size_t n_new = (t == 0) ? spec.base_classes : nps[t - 1];
        for (std::size_t c = 0; c < n_new; ++c) stage.new_classes.push_back(next_class++);
        stage.classes = seen;
        stage.classes.insert(stage.classes.end(), stage.new_classes.begin(),
                             stage.new_classes.end());

        // train split
        std::size_t n_train_new = n_new * spec.samples_per_class_train;
        std::size_t n_train_old = 0;
        if (t > 0 && !seen.empty() && spec.old_class_mix_fraction > 0.0) {
            const double f = spec.old_class_mix_fraction;
            n_train_old = static_cast<std::size_t>(
                std::llround(n_train_new * f / (1.0 - f)));
        }
        const std::size_t n_train = n_train_new + n_train_old;
        stage.train_inputs = Matrix(n_train, spec.input_dim);
        stage.train_labels.assign(n_train, 0);
        stage.train_ids.assign(n_train, {});
        std::size_t row = 0;
        for (int cls : stage.new_classes)
            for (std::size_t s = 0; s < spec.samples_per_class_train; ++s)
                append_sample(stage.train_inputs, stage.train_labels, stage.train_ids, row++,
                              means, cls, spec.noise_sigma, rng, id_counter);
        for (std::size_t s = 0; s < n_train_old; ++s)
            append_sample(stage.train_inputs, stage.train_labels, stage.train_ids, row++, means,
                          seen[s % seen.size()], spec.noise_sigma, rng, id_counter);

        // test split covers all classes seen so far
        const std::size_t n_test = stage.classes.size() * spec.samples_per_class_test;
        stage.test_inputs = Matrix(n_test, spec.input_dim);
        stage.test_labels.assign(n_test, 0);
        stage.test_ids.assign(n_test, {});
        row = 0;
        for (int cls : stage.classes)
            for (std::size_t s = 0; s < spec.samples_per_class_test; ++s)
                append_sample(stage.test_inputs, stage.test_labels, stage.test_ids, row++, means,
                              cls, spec.noise_sigma, rng, id_counter);

        seen = stage.classes;
        stream.push_back(std::move(stage));
    }
    return stream;
}

void export_stream(const std::vector<StageData>& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_stream: cannot open " + path);
    const std::size_t d = stream.empty() ? 0 : stream.front().train_inputs.cols;
    out << "id,stage,split,label";
    for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
    out << '\n';
    out.precision(17);
    auto dump = [&](const StageData& s, const Matrix& m, const std::vector<int>& labels,
                    const std::vector<std::string>& ids, const char* split) {
        for (std::size_t i = 0; i < m.rows; ++i) {
            out << ids[i] << ',' << s.t << ',' << split << ',' << labels[i];
            for (std::size_t j = 0; j < m.cols; ++j) out << ',' << m(i, j);
            out << '\n';
        }
    };
    for (const auto& s : stream) {
        dump(s, s.train_inputs, s.train_labels, s.train_ids, "train");
        dump(s, s.test_inputs, s.test_labels, s.test_ids, "test");
    }
}

std::vector<StageData> load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_embeddings: cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_embeddings: empty file " + path);
    if (line.rfind("id,stage,split,label", 0) != 0)
        throw std::runtime_error("load_embeddings: missing header in " + path);
    std::size_t d = 0;
    {
        std::istringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) ++cols;
        if (cols < 5) throw std::runtime_error("load_embeddings: header has no feature columns");
        d = cols - 4;
    }

    struct Row {
        std::string id;
        std::size_t stage;
        bool is_train;
        int label;
        std::vector<double> f;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        Row r;
        try {
            if (!std::getline(ss, r.id, ',')) throw std::runtime_error("missing id");
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("missing stage");
            r.stage = std::stoul(cell);
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("missing split");
            if (cell == "train")
                r.is_train = true;
            else if (cell == "test")
                r.is_train = false;
            else
                throw std::runtime_error("unknown split '" + cell + "'");
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("missing label");
            r.label = std::stoi(cell);
            if (r.label < 0) throw std::runtime_error("negative label");
            while (std::getline(ss, cell, ',')) r.f.push_back(std::stod(cell));
        } catch (const std::exception& e) {
            throw std::runtime_error("load_embeddings: line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
        if (r.f.size() != d)
            throw std::runtime_error("load_embeddings: line " + std::to_string(lineno) +
                                     ": dimension mismatch (row has " +
                                     std::to_string(r.f.size()) + " features, header declares " +
                                     std::to_string(d) + ")");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("load_embeddings: no data rows in " + path);

    std::size_t max_stage = 0;
    for (const auto& r : rows) max_stage = std::max(max_stage, r.stage);

    std::vector<StageData> stream(max_stage + 1);
    std::vector<int> seen;
    for (std::size_t t = 0; t <= max_stage; ++t) {
        std::vector<const Row*> train, test;
        for (const auto& r : rows)
            if (r.stage == t) (r.is_train ? train : test).push_back(&r);

        StageData& s = stream[t];
        s.t = t;
        s.labeled = (t == 0);
        auto fill = [&](const std::vector<const Row*>& src, Matrix& m, std::vector<int>& labels,
                        std::vector<std::string>& ids) {
            m = Matrix(src.size(), d);
            labels.resize(src.size());
            ids.resize(src.size());
            for (std::size_t i = 0; i < src.size(); ++i) {
                for (std::size_t j = 0; j < d; ++j) m(i, j) = src[i]->f[j];
                labels[i] = src[i]->label;
                ids[i] = src[i]->id;
            }
        };
        fill(train, s.train_inputs, s.train_labels, s.train_ids);
        fill(test, s.test_inputs, s.test_labels, s.test_ids);

        std::set<int> stage_classes(seen.begin(), seen.end());
        std::set<int> fresh;
        for (const auto* r : train)
            if (!stage_classes.count(r->label)) fresh.insert(r->label);
        for (const auto* r : test)
            if (!stage_classes.count(r->label)) fresh.insert(r->label);
        s.new_classes.assign(fresh.begin(), fresh.end());
        s.classes = seen;
        s.classes.insert(s.classes.end(), s.new_classes.begin(), s.new_classes.end());
        seen = s.classes;
    }
    return stream;
}

}  // namespace goal
