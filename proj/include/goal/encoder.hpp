#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goal/matrix.hpp"
#include "goal/rng.hpp"

namespace goal {

struct SgdConfig {
    double learning_rate = 0.03;
    double momentum = 0.9;
    std::size_t batch_size = 128;
    std::size_t epochs = 30;

    void validate() const;
};

// Small MLP: linear layers with leaky-relu (slope 0.01) between them, last
// layer linear. Weights are (in x out); inputs are row vectors.
class Encoder {
public:
    Encoder() = default;
    Encoder(std::vector<std::size_t> layer_dims, Rng& rng);

    struct Cache {
        Matrix input;
        std::vector<Matrix> pre;   // pre-activation per layer
        std::vector<Matrix> post;  // post-activation per layer (post.back() = output)
    };

    struct Grads {
        std::vector<Matrix> d_weights;
        std::vector<Matrix> d_biases;  // stored as 1 x out
        Matrix d_input;
    };

    Matrix forward(const Matrix& inputs, Cache* cache = nullptr) const;
    Grads backward(const Cache& cache, const Matrix& grad_output) const;

    std::size_t input_dim() const { return layer_dims_.front(); }
    std::size_t output_dim() const { return layer_dims_.back(); }
    const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }

    std::vector<Matrix>& weights() { return weights_; }
    std::vector<Matrix>& biases() { return biases_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    const std::vector<Matrix>& biases() const { return biases_; }

    // flat parameter vector view, for gradient checking
    std::vector<double> flatten_params() const;
    void unflatten_params(std::span<const double> flat);
    static std::vector<double> flatten_grads(const Grads& g);

    void save_csv(const std::string& path) const;
    static Encoder load_csv(const std::string& path);

private:
    std::vector<std::size_t> layer_dims_;
    std::vector<Matrix> weights_;
    std::vector<Matrix> biases_;
};

// Momentum SGD state matching an encoder's parameter shapes.
struct SgdState {
    std::vector<Matrix> v_weights;
    std::vector<Matrix> v_biases;
    Matrix v_extra;  // velocity for the classifier matrix, when used

    static SgdState for_encoder(const Encoder& enc);
};

// v <- momentum*v - lr*g; theta <- theta + v
void sgd_step(Encoder& enc, const Encoder::Grads& grads, const SgdConfig& cfg, SgdState& state);
void sgd_step_matrix(Matrix& theta, const Matrix& grad, const SgdConfig& cfg, Matrix& velocity);

}  // namespace goal
