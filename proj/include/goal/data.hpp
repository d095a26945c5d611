#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goal/matrix.hpp"

namespace goal {

// Thrown when the rejection-sampling budget cannot satisfy the requested
// class-mean separation.
struct InfeasibleSpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StreamSpec {
    std::size_t total_classes = 20;
    std::size_t base_classes = 10;
    std::size_t stages = 2;                      // T incremental stages
    std::vector<std::size_t> new_per_stage;      // defaults to an even split
    std::size_t samples_per_class_train = 50;
    std::size_t samples_per_class_test = 20;
    double old_class_mix_fraction = 0.5;
    std::size_t input_dim = 32;
    double class_separation_deg = 60.0;          // minimum pairwise angle between class means
    double noise_sigma = 0.05;
    std::uint64_t seed = 1;

    std::vector<std::size_t> resolved_new_per_stage() const;
    void validate() const;
};

struct StageData {
    std::size_t t = 0;
    Matrix train_inputs;
    std::vector<int> train_labels;  // ground truth; hidden from training for t >= 1
    std::vector<std::string> train_ids;
    bool labeled = false;
    Matrix test_inputs;
    std::vector<int> test_labels;
    std::vector<std::string> test_ids;
    std::vector<int> classes;       // C^t for this stage (cumulative)
    std::vector<int> new_classes;   // classes first appearing at this stage
};

// Gaussian blobs around unit-sphere class means kept pairwise separated by
// rejection sampling. Deterministic per (spec, seed).
std::vector<StageData> generate_stream(const StreamSpec& spec);

// CSV schema: id,stage,split,label,f0..f{d-1}; floats at 17 significant
// digits so a round-trip is bit exact.
void export_stream(const std::vector<StageData>& stream, const std::string& path);
std::vector<StageData> load_embeddings(const std::string& path);

}  // namespace goal
