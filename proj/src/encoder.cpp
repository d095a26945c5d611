#include "goal/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "goal/numkit.hpp"

namespace goal {

namespace {
constexpr double kLeakySlope = 0.01;
}

void SgdConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("SgdConfig: learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("SgdConfig: momentum must be in [0, 1)");
    if (batch_size < 2) throw std::invalid_argument("SgdConfig: batch_size must be >= 2");
}

Encoder::Encoder(std::vector<std::size_t> layer_dims, Rng& rng)
    : layer_dims_(std::move(layer_dims)) {
    if (layer_dims_.size() < 2) throw std::invalid_argument("Encoder: need at least one layer");
    for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l) {
        const std::size_t fan_in = layer_dims_[l], fan_out = layer_dims_[l + 1];
        weights_.push_back(gaussian_matrix(fan_in, fan_out, rng, 1.0 / std::sqrt((double)fan_in)));
        biases_.push_back(Matrix(1, fan_out));
    }
}

Matrix Encoder::forward(const Matrix& inputs, Cache* cache) const {
    if (inputs.cols != input_dim()) throw std::invalid_argument("Encoder::forward: input dim mismatch");
    if (cache) {
        cache->input = inputs;
        cache->pre.clear();
        cache->post.clear();
    }
    Matrix x = inputs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix z = matmul(x, weights_[l]);
        for (std::size_t i = 0; i < z.rows; ++i)
            for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += biases_[l](0, j);
        if (cache) cache->pre.push_back(z);
        if (l + 1 < weights_.size()) {
            for (double& v : z.data)
                if (v < 0.0) v *= kLeakySlope;
        }
        if (cache) cache->post.push_back(z);
        x = std::move(z);
    }
    return x;
}

Encoder::Grads Encoder::backward(const Cache& cache, const Matrix& grad_output) const {
    if (cache.pre.size() != weights_.size())
        throw std::invalid_argument("Encoder::backward: cache does not match this encoder");
    if (grad_output.rows != cache.input.rows || grad_output.cols != output_dim())
        throw std::invalid_argument("Encoder::backward: grad_output shape mismatch");

    Grads g;
    g.d_weights.resize(weights_.size());
    g.d_biases.resize(weights_.size());

    Matrix delta = grad_output;  // gradient w.r.t. layer post-activation
    for (std::size_t l = weights_.size(); l-- > 0;) {
        if (l + 1 < weights_.size()) {
            // through leaky relu
            const Matrix& pre = cache.pre[l];
            for (std::size_t i = 0; i < delta.data.size(); ++i)
                if (pre.data[i] < 0.0) delta.data[i] *= kLeakySlope;
        }
        const Matrix& in = (l == 0) ? cache.input : cache.post[l - 1];
        g.d_weights[l] = matmul_tn(in, delta);
        g.d_biases[l] = Matrix(1, delta.cols);
        for (std::size_t i = 0; i < delta.rows; ++i)
            for (std::size_t j = 0; j < delta.cols; ++j) g.d_biases[l](0, j) += delta(i, j);
        delta = matmul_nt(delta, weights_[l]);
    }
    g.d_input = std::move(delta);
    return g;
}

std::vector<double> Encoder::flatten_params() const {
    std::vector<double> flat;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data.begin(), weights_[l].data.end());
        flat.insert(flat.end(), biases_[l].data.begin(), biases_[l].data.end());
    }
    return flat;
}

void Encoder::unflatten_params(std::span<const double> flat) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (double& v : weights_[l].data) v = flat[pos++];
        for (double& v : biases_[l].data) v = flat[pos++];
    }
    if (pos != flat.size()) throw std::invalid_argument("Encoder::unflatten_params: length mismatch");
}

std::vector<double> Encoder::flatten_grads(const Grads& g) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
        flat.insert(flat.end(), g.d_weights[l].data.begin(), g.d_weights[l].data.end());
        flat.insert(flat.end(), g.d_biases[l].data.begin(), g.d_biases[l].data.end());
    }
    return flat;
}

void Encoder::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Encoder::save_csv: cannot open " + path);
    out << "encoder,v1\n";
    for (std::size_t i = 0; i < layer_dims_.size(); ++i)
        out << (i ? "," : "") << layer_dims_[i];
    out << '\n';
    out.precision(17);
    auto dump = [&](const Matrix& m) {
        for (std::size_t i = 0; i < m.data.size(); ++i)
            out << (i ? "," : "") << m.data[i];
        out << '\n';
    };
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        dump(weights_[l]);
        dump(biases_[l]);
    }
}

Encoder Encoder::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Encoder::load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "encoder,v1")
        throw std::runtime_error("Encoder::load_csv: bad header in " + path);
    if (!std::getline(in, line)) throw std::runtime_error("Encoder::load_csv: missing dims");

    Encoder enc;
    {
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) enc.layer_dims_.push_back(std::stoul(cell));
    }
    if (enc.layer_dims_.size() < 2) throw std::runtime_error("Encoder::load_csv: bad dims");

    auto read_row = [&](Matrix& m) {
        if (!std::getline(in, line)) throw std::runtime_error("Encoder::load_csv: truncated");
        std::istringstream ss(line);
        std::string cell;
        for (double& v : m.data) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("Encoder::load_csv: short row");
            v = std::stod(cell);
        }
    };
    for (std::size_t l = 0; l + 1 < enc.layer_dims_.size(); ++l) {
        Matrix w(enc.layer_dims_[l], enc.layer_dims_[l + 1]);
        Matrix b(1, enc.layer_dims_[l + 1]);
        read_row(w);
        read_row(b);
        enc.weights_.push_back(std::move(w));
        enc.biases_.push_back(std::move(b));
    }
    return enc;
}

SgdState SgdState::for_encoder(const Encoder& enc) {
    SgdState s;
    for (std::size_t l = 0; l < enc.weights().size(); ++l) {
        s.v_weights.push_back(Matrix(enc.weights()[l].rows, enc.weights()[l].cols));
        s.v_biases.push_back(Matrix(1, enc.biases()[l].cols));
    }
    return s;
}

void sgd_step_matrix(Matrix& theta, const Matrix& grad, const SgdConfig& cfg, Matrix& velocity) {
    if (!theta.same_shape(grad)) throw std::invalid_argument("sgd_step: gradient shape mismatch");
    if (velocity.data.empty()) velocity = Matrix(theta.rows, theta.cols);
    for (std::size_t i = 0; i < theta.data.size(); ++i) {
        velocity.data[i] = cfg.momentum * velocity.data[i] - cfg.learning_rate * grad.data[i];
        theta.data[i] += velocity.data[i];
    }
}

void sgd_step(Encoder& enc, const Encoder::Grads& grads, const SgdConfig& cfg, SgdState& state) {
    for (std::size_t l = 0; l < enc.weights().size(); ++l) {
        sgd_step_matrix(enc.weights()[l], grads.d_weights[l], cfg, state.v_weights[l]);
        sgd_step_matrix(enc.biases()[l], grads.d_biases[l], cfg, state.v_biases[l]);
    }
}

}  // namespace goal
