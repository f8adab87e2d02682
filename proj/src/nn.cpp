#include "rlfep/nn.hpp"

#include <cstring>

namespace rlfep {

namespace {

Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
        case Activation::linear: return z;
        case Activation::relu: return z.cwiseMax(0.0);
        case Activation::tanh: return z.array().tanh().matrix();
    }
    return z;
}

// d(act)/dz expressed through z (pre) and y (post).
Matrix activation_grad(const Matrix& pre, const Matrix& post, Activation a) {
    switch (a) {
        case Activation::linear: return Matrix::Ones(pre.rows(), pre.cols());
        case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - post.array().square()).matrix();
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

Matrix affine(const DenseLayer& l, const Matrix& x) { return (l.weight * x).colwise() + l.bias; }

// Uniform fan-in init, small output layer.
DenseLayer make_layer(int in, int out, Activation act, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer l;
    l.weight.resize(out, in);
    l.bias.resize(out);
    l.activation = act;
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) l.weight(r, c) = dist(rng);
    }
    for (int r = 0; r < out; ++r) l.bias(r) = dist(rng);
    return l;
}

double fan_in_bound(int in) { return 1.0 / std::sqrt(static_cast<double>(in)); }

void accumulate(DenseLayer& g, const Matrix& delta, const Matrix& input) {
    g.weight.noalias() += delta * input.transpose();
    g.bias += delta.rowwise().sum();
}

void check_layer(const DenseLayer& l, Eigen::Index in, Eigen::Index out, Activation a, const char* what) {
    if (l.inputs() != in || l.outputs() != out || l.bias.size() != out || l.activation != a) {
        throw ConfigError(std::string("network shape mismatch in ") + what);
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "unknown";
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& a = layers[i];
        const auto& b = other.layers[i];
        if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
            a.bias.size() != b.bias.size() || a.activation != b.activation) {
            return false;
        }
    }
    return true;
}

bool NetworkParams::finite() const {
    for (const auto& l : layers) {
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
}

NetworkParams NetworkParams::zeros_like() const {
    NetworkParams z = *this;
    for (auto& l : z.layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
    return z;
}

std::vector<double> NetworkParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
    }
    return out;
}

void NetworkParams::unflatten(const std::vector<double>& values) {
    if (values.size() != parameter_count()) throw ConfigError("parameter vector has the wrong length");
    std::size_t k = 0;
    for (auto& l : layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
    }
}

std::uint64_t NetworkParams::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (double v : flatten()) mix(&v, sizeof v);
    return h;
}

// --- Actor -------------------------------------------------------------------

NetworkParams make_actor(int obs_dim, int hidden, std::mt19937_64& rng) {
    if (obs_dim < 1 || hidden < 1) throw ConfigError("actor sizes must be positive");
    NetworkParams p;
    p.layers.push_back(make_layer(obs_dim, hidden, Activation::relu, fan_in_bound(obs_dim), rng));
    p.layers.push_back(make_layer(hidden, 1, Activation::tanh, 3e-3, rng));
    return p;
}

void validate_actor(const NetworkParams& actor, int obs_dim) {
    if (actor.layers.size() != 2) throw ConfigError("actor must have two layers");
    const auto hidden = actor.layers[0].outputs();
    check_layer(actor.layers[0], obs_dim, hidden, Activation::relu, "actor hidden layer");
    check_layer(actor.layers[1], hidden, 1, Activation::tanh, "actor output layer");
}

Matrix actor_forward_batch(const NetworkParams& actor, const Matrix& obs, ActorCache* cache) {
    const auto& l0 = actor.layers[0];
    const auto& l1 = actor.layers[1];
    Matrix pre = affine(l0, obs);
    Matrix h = activate(pre, l0.activation);
    Matrix out_pre = affine(l1, h);
    Matrix out = activate(out_pre, l1.activation);
    if (cache) {
        cache->input = obs;
        cache->output_pre = std::move(out_pre);
        cache->hidden_pre = std::move(pre);
        cache->hidden = std::move(h);
        cache->output = out;
    }
    return out;
}

double actor_forward(const NetworkParams& actor, const Vector& obs) {
    return actor_forward_batch(actor, obs)(0, 0);
}

void actor_backward(const NetworkParams& actor, const ActorCache& cache, const Matrix& grad_output,
                    NetworkParams& grad, const Matrix* grad_output_pre) {
    const auto& l0 = actor.layers[0];
    const auto& l1 = actor.layers[1];
    Matrix d_out = grad_output.cwiseProduct(activation_grad(cache.output_pre, cache.output, l1.activation));
    if (grad_output_pre) d_out += *grad_output_pre;
    accumulate(grad.layers[1], d_out, cache.hidden);
    const Matrix d_hidden =
        (l1.weight.transpose() * d_out).cwiseProduct(activation_grad(cache.hidden_pre, cache.hidden, l0.activation));
    accumulate(grad.layers[0], d_hidden, cache.input);
}

// --- Critic ------------------------------------------------------------------

NetworkParams make_critic(int obs_dim, int obs_hidden1, int obs_hidden2, int action_hidden, std::mt19937_64& rng) {
    if (obs_dim < 1 || obs_hidden1 < 1 || obs_hidden2 < 1 || action_hidden < 1) {
        throw ConfigError("critic sizes must be positive");
    }
    if (obs_hidden2 != action_hidden) throw ConfigError("critic paths must have the same width to be summed");
    NetworkParams p;
    p.layers.push_back(make_layer(obs_dim, obs_hidden1, Activation::relu, fan_in_bound(obs_dim), rng));
    p.layers.push_back(make_layer(obs_hidden1, obs_hidden2, Activation::linear, fan_in_bound(obs_hidden1), rng));
    p.layers.push_back(make_layer(1, action_hidden, Activation::linear, 1.0, rng));
    p.layers.push_back(make_layer(obs_hidden2, 1, Activation::linear, 3e-3, rng));
    return p;
}

void validate_critic(const NetworkParams& critic, int obs_dim) {
    if (critic.layers.size() != 4) throw ConfigError("critic must have four layers");
    const auto h1 = critic.layers[0].outputs();
    const auto h2 = critic.layers[1].outputs();
    check_layer(critic.layers[0], obs_dim, h1, Activation::relu, "critic observation layer 1");
    check_layer(critic.layers[1], h1, h2, Activation::linear, "critic observation layer 2");
    check_layer(critic.layers[2], 1, h2, Activation::linear, "critic action layer");
    check_layer(critic.layers[3], h2, 1, Activation::linear, "critic head");
}

Matrix critic_forward_batch(const NetworkParams& critic, const Matrix& obs, const Matrix& action, CriticCache* cache) {
    const auto& l0 = critic.layers[0];
    const auto& l1 = critic.layers[1];
    const auto& la = critic.layers[2];
    const auto& lh = critic.layers[3];
    Matrix h1_pre = affine(l0, obs);
    Matrix h1 = activate(h1_pre, l0.activation);
    Matrix merged_pre = affine(l1, h1) + affine(la, action);
    Matrix merged = merged_pre.cwiseMax(0.0);
    Matrix q = affine(lh, merged);
    if (cache) {
        cache->obs = obs;
        cache->action = action;
        cache->h1_pre = std::move(h1_pre);
        cache->h1 = std::move(h1);
        cache->merged_pre = std::move(merged_pre);
        cache->merged = std::move(merged);
        cache->q = q;
    }
    return q;
}

double critic_forward(const NetworkParams& critic, const Vector& obs, double action) {
    Matrix a(1, 1);
    a(0, 0) = action;
    return critic_forward_batch(critic, obs, a)(0, 0);
}

Matrix critic_backward(const NetworkParams& critic, const CriticCache& cache, const Matrix& grad_q,
                       NetworkParams* grad) {
    const auto& l0 = critic.layers[0];
    const auto& l1 = critic.layers[1];
    const auto& la = critic.layers[2];
    const auto& lh = critic.layers[3];
    const Matrix d_merged =
        (lh.weight.transpose() * grad_q).cwiseProduct((cache.merged_pre.array() > 0.0).cast<double>().matrix());
    if (grad) {
        accumulate(grad->layers[3], grad_q, cache.merged);
        accumulate(grad->layers[1], d_merged, cache.h1);
        accumulate(grad->layers[2], d_merged, cache.action);
        const Matrix d_h1 =
            (l1.weight.transpose() * d_merged).cwiseProduct(activation_grad(cache.h1_pre, cache.h1, l0.activation));
        accumulate(grad->layers[0], d_h1, cache.obs);
    }
    return la.weight.transpose() * d_merged;
}

}  // namespace rlfep
