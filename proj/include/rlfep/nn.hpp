#pragma once

#include "rlfep/common.hpp"

#include <random>
#include <string>
#include <vector>

namespace rlfep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint8_t { linear = 0, relu = 1, tanh = 2 };

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::linear;

    Eigen::Index inputs() const { return weight.cols(); }
    Eigen::Index outputs() const { return weight.rows(); }
};

/// Ordered dense layers. The actor uses them as a plain chain; the critic
/// stores [obs_1, obs_2, action_1, head] and merges the two paths by addition
/// before the head (see CriticNet).
struct NetworkParams {
    std::vector<DenseLayer> layers;

    std::size_t parameter_count() const;
    bool same_shape(const NetworkParams& other) const;
    bool finite() const;
    /// Zero-valued copy with the same shape (gradient accumulator).
    NetworkParams zeros_like() const;
    /// All weights (row-major) then bias, layer by layer.
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& values);
    /// FNV-1a over the raw parameter bytes; equal hashes <=> equal bits in practice.
    std::uint64_t hash() const;
};

// --- Actor -----------------------------------------------------------------

/// obs -> hidden (relu) -> 1 (tanh)
NetworkParams make_actor(int obs_dim, int hidden, std::mt19937_64& rng);
void validate_actor(const NetworkParams& actor, int obs_dim);

struct ActorCache {
    Matrix input;    // obs x B
    Matrix hidden;   // post-activation
    Matrix hidden_pre;
    Matrix output_pre;  // 1 x B, before tanh
    Matrix output;   // 1 x B, post-tanh
};

double actor_forward(const NetworkParams& actor, const Vector& obs);
Matrix actor_forward_batch(const NetworkParams& actor, const Matrix& obs, ActorCache* cache = nullptr);
/// Accumulates dJ/dtheta given dJ/d(output) (1 x B) into `grad`. Terms that
/// depend on the pre-tanh output can be passed directly as `grad_output_pre`.
void actor_backward(const NetworkParams& actor, const ActorCache& cache, const Matrix& grad_output,
                    NetworkParams& grad, const Matrix* grad_output_pre = nullptr);

// --- Critic ----------------------------------------------------------------

/// Observation path obs -> h1 (relu) -> h2 (linear), action path a -> h2
/// (linear), sum -> relu -> 1 (linear head).
NetworkParams make_critic(int obs_dim, int obs_hidden1, int obs_hidden2, int action_hidden, std::mt19937_64& rng);
void validate_critic(const NetworkParams& critic, int obs_dim);

struct CriticCache {
    Matrix obs;
    Matrix action;
    Matrix h1_pre, h1;
    Matrix merged_pre, merged;
    Matrix q;
};

double critic_forward(const NetworkParams& critic, const Vector& obs, double action);
Matrix critic_forward_batch(const NetworkParams& critic, const Matrix& obs, const Matrix& action,
                            CriticCache* cache = nullptr);
/// Accumulates dL/dtheta into `grad` (may be null) and returns dL/da (1 x B)
/// for the given dL/dQ (1 x B).
Matrix critic_backward(const NetworkParams& critic, const CriticCache& cache, const Matrix& grad_q,
                       NetworkParams* grad);

std::string to_string(Activation a);

}  // namespace rlfep
