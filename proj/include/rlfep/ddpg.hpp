#pragma once

#include "rlfep/nn.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace rlfep {

inline constexpr int kObsDim = 7;

struct Transition {
    std::array<double, kObsDim> s{};
    double a = 0.0;
    double r = 0.0;
    std::array<double, kObsDim> s_next{};
    bool done = false;

    bool valid() const;
};

/// Ring buffer with uniform sampling without replacement inside a batch.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity, std::uint64_t seed = 0);

    void add(const Transition& t);
    /// Throws TrainingError when fewer than n transitions are stored.
    std::vector<Transition> sample(std::size_t n);
    /// Indices only; used by sample() and by the uniformity tests.
    std::vector<std::size_t> sample_indices(std::size_t n);

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return data_[i]; }
    std::mt19937_64& rng() { return rng_; }
    const std::mt19937_64& rng() const { return rng_; }

private:
    friend class DdpgAgent;
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
    std::mt19937_64 rng_;
};

/// Zero-mean Gaussian action noise whose variance decays geometrically per draw.
class GaussianNoise {
public:
    GaussianNoise(double variance = 1e-3, double decay = 1e-9, std::uint64_t seed = 0);

    double sample();
    double variance() const { return variance_; }
    double decay() const { return decay_; }
    void set_variance(double v);
    std::mt19937_64& rng() { return rng_; }
    const std::mt19937_64& rng() const { return rng_; }

private:
    double variance_;
    double decay_;
    std::mt19937_64 rng_;
};

/// Per-element affine map x -> (x - center) / half_range.
struct ObservationScaler {
    std::array<double, kObsDim> center{};
    std::array<double, kObsDim> half_range{1, 1, 1, 1, 1, 1, 1};

    std::array<double, kObsDim> apply(const std::array<double, kObsDim>& raw) const;
    void validate() const;
};

enum class OptimizerKind : std::uint8_t { adam = 0, sgd = 1 };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& text);

/// Adam (or plain gradient descent) over one network. Always minimizes.
class Optimizer {
public:
    Optimizer() = default;
    Optimizer(const NetworkParams& shape, OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
              double eps = 1e-8);

    void step(NetworkParams& params, const NetworkParams& grad);

    OptimizerKind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    std::uint64_t steps() const { return t_; }

    // Exposed for checkpointing.
    OptimizerKind kind_ = OptimizerKind::adam;
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::uint64_t t_ = 0;
    NetworkParams m_;
    NetworkParams v_;
};

struct DdpgConfig {
    int actor_hidden = 40;
    int critic_obs_hidden1 = 80;
    int critic_obs_hidden2 = 40;
    int critic_action_hidden = 40;
    double actor_lr = 1e-5;
    double critic_lr = 1e-4;
    double gamma = 0.99;
    double tau = 1e-3;
    std::size_t buffer_capacity = 1'000'000;
    std::size_t batch_size = 64;
    std::size_t warmup = 1000;
    double noise_variance = 1e-3;
    double noise_decay = 1e-9;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    /// Weight of the mean squared pre-tanh actor output subtracted from the
    /// actor objective. Keeps the output layer out of saturation; 0 disables.
    double preactivation_penalty = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

using Batch = std::vector<Transition>;

struct TdResult {
    std::vector<double> y;
    std::vector<double> delta;
};

// --- The four update rules, usable on their own ----------------------------

/// y = r + gamma Q'(s', pi'(s')) (bootstrap dropped when done), delta = y - Q(s, a).
TdResult td_targets(const Batch& batch, const NetworkParams& critic, const NetworkParams& target_actor,
                    const NetworkParams& target_critic, double gamma);

/// L = (1/2M) sum (y - Q(s, a))^2 for fixed targets y, and its gradient.
double critic_loss(const NetworkParams& critic, const Batch& batch, const std::vector<double>& y,
                   NetworkParams* grad = nullptr);

/// J = (1/M) sum Q(s, pi(s)) - lambda (1/M) sum z(s)^2, z the pre-tanh
/// actor output, and its gradient with respect to the actor.
double actor_objective(const NetworkParams& actor, const NetworkParams& critic, const Batch& batch,
                       NetworkParams* grad = nullptr, double preactivation_penalty = 0.0);

/// theta' <- tau theta + (1 - tau) theta'.
void soft_update(NetworkParams& target, const NetworkParams& online, double tau);

Matrix batch_states(const Batch& batch, bool next);

struct UpdateStats {
    double critic_loss = 0.0;
    double mean_q = 0.0;
    double actor_objective = 0.0;
};

/// One learner owning actor, critic, their targets, optimizers, buffer and noise.
class DdpgAgent {
public:
    DdpgAgent(DdpgConfig config, ObservationScaler scaler);

    /// Actor output for a raw observation, optionally with exploration noise.
    double select_action(const std::array<double, kObsDim>& raw_obs, bool explore);
    double act(const std::array<double, kObsDim>& raw_obs) const;

    /// Stores a transition of raw observations (normalized on the way in).
    void observe(const std::array<double, kObsDim>& s, double a, double r, const std::array<double, kObsDim>& s_next,
                 bool done);
    /// Runs one critic/actor/target update once the buffer has `warmup`
    /// transitions; returns false before that.
    bool train_step(UpdateStats* stats = nullptr);
    UpdateStats update(const Batch& batch);

    const DdpgConfig& config() const { return config_; }
    const ObservationScaler& scaler() const { return scaler_; }
    const NetworkParams& actor() const { return actor_; }
    const NetworkParams& critic() const { return critic_; }
    const NetworkParams& target_actor() const { return target_actor_; }
    const NetworkParams& target_critic() const { return target_critic_; }
    NetworkParams& actor() { return actor_; }
    NetworkParams& critic() { return critic_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    GaussianNoise& noise() { return noise_; }
    const GaussianNoise& noise() const { return noise_; }
    std::uint64_t updates() const { return updates_; }
    /// Combined hash of all four networks.
    std::uint64_t parameter_hash() const;

    /// `with_replay` also stores the buffer contents so a resumed run continues
    /// step for step; without it the resumed run refills the buffer.
    void save(const std::filesystem::path& path, bool with_replay = false) const;
    /// Restores networks, optimizer moments, noise, RNG state and (when saved)
    /// the replay buffer.
    static DdpgAgent load(const std::filesystem::path& path);

    std::string serialize(bool with_replay = false) const;
    static DdpgAgent deserialize(const std::string& bytes);

private:
    DdpgConfig config_;
    ObservationScaler scaler_;
    std::mt19937_64 init_rng_;
    NetworkParams actor_, critic_, target_actor_, target_critic_;
    Optimizer actor_opt_, critic_opt_;
    ReplayBuffer buffer_;
    GaussianNoise noise_;
    std::uint64_t updates_ = 0;
};

/// Inference-only policy loaded from a checkpoint; immutable and shareable.
struct Policy {
    NetworkParams actor;
    ObservationScaler scaler;

    double operator()(const std::array<double, kObsDim>& raw_obs) const;
    static Policy from_agent(const DdpgAgent& agent);
    static Policy load(const std::filesystem::path& path);
};

inline constexpr std::uint32_t kCheckpointVersion = 2;

}  // namespace rlfep
