#include "rlfep/ddpg.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rlfep {

bool Transition::valid() const {
    for (double v : s) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : s_next) {
        if (!std::isfinite(v)) return false;
    }
    return std::isfinite(a) && std::isfinite(r) && a >= -1.0 && a <= 1.0;
}

// --- Replay ------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::add(const Transition& t) {
    if (!t.valid()) throw TrainingError("refusing to store a non-finite or out-of-range transition");
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n) {
    if (n > data_.size()) {
        throw TrainingError("replay buffer holds " + std::to_string(data_.size()) + " transitions, batch needs " +
                            std::to_string(n));
    }
    // Rejection of duplicates: n is tiny compared to the buffer.
    std::vector<std::size_t> idx;
    idx.reserve(n);
    std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
    while (idx.size() < n) {
        const std::size_t k = dist(rng_);
        if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    }
    return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n) {
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t k : sample_indices(n)) out.push_back(data_[k]);
    return out;
}

// --- Noise -------------------------------------------------------------------

GaussianNoise::GaussianNoise(double variance, double decay, std::uint64_t seed)
    : variance_(variance), decay_(decay), rng_(seed) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw ConfigError("noise variance must be >= 0");
    if (!(decay >= 0.0 && decay <= 1.0)) throw ConfigError("noise decay must be in [0, 1]");
}

double GaussianNoise::sample() {
    std::normal_distribution<double> n(0.0, 1.0);
    const double x = n(rng_) * std::sqrt(variance_);
    variance_ *= 1.0 - decay_;
    return x;
}

void GaussianNoise::set_variance(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("noise variance must be >= 0");
    variance_ = v;
}

// --- Scaler ------------------------------------------------------------------

std::array<double, kObsDim> ObservationScaler::apply(const std::array<double, kObsDim>& raw) const {
    std::array<double, kObsDim> out{};
    for (int i = 0; i < kObsDim; ++i) out[i] = (raw[i] - center[i]) / half_range[i];
    return out;
}

void ObservationScaler::validate() const {
    for (int i = 0; i < kObsDim; ++i) {
        if (!std::isfinite(center[i]) || !(half_range[i] > 0.0) || !std::isfinite(half_range[i])) {
            throw ConfigError("observation scaler needs finite centers and positive ranges");
        }
    }
}

// --- Optimizer ---------------------------------------------------------------

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::adam;
    if (text == "sgd") return OptimizerKind::sgd;
    throw ConfigError("unknown optimizer '" + text + "' (expected adam or sgd)");
}

Optimizer::Optimizer(const NetworkParams& shape, OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(shape.zeros_like()), v_(shape.zeros_like()) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
}

void Optimizer::step(NetworkParams& params, const NetworkParams& grad) {
    if (!params.same_shape(grad)) throw ConfigError("gradient shape does not match the parameters");
    ++t_;
    if (kind_ == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.layers.size(); ++i) {
            params.layers[i].weight -= lr_ * grad.layers[i].weight;
            params.layers[i].bias -= lr_ * grad.layers[i].bias;
        }
        return;
    }
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto apply = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        apply(params.layers[i].weight, m_.layers[i].weight, v_.layers[i].weight, grad.layers[i].weight);
        apply(params.layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grad.layers[i].bias);
    }
}

// --- Update rules ------------------------------------------------------------

void DdpgConfig::validate() const {
    if (actor_hidden < 1 || critic_obs_hidden1 < 1 || critic_obs_hidden2 < 1 || critic_action_hidden < 1) {
        throw ConfigError("network sizes must be positive");
    }
    if (critic_obs_hidden2 != critic_action_hidden) {
        throw ConfigError("critic observation and action paths must have the same width");
    }
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
    if (batch_size == 0 || buffer_capacity < batch_size) throw ConfigError("batch size must be in [1, capacity]");
    if (warmup < batch_size) throw ConfigError("warmup must be at least one batch");
    if (!(noise_variance >= 0.0) || !(noise_decay >= 0.0 && noise_decay <= 1.0)) {
        throw ConfigError("noise variance must be >= 0 and decay in [0, 1]");
    }
    if (!(preactivation_penalty >= 0.0) || !std::isfinite(preactivation_penalty)) {
        throw ConfigError("preactivation_penalty must be a finite value >= 0");
    }
}

Matrix batch_states(const Batch& batch, bool next) {
    Matrix m(kObsDim, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto& s = next ? batch[j].s_next : batch[j].s;
        for (int i = 0; i < kObsDim; ++i) m(i, static_cast<Eigen::Index>(j)) = s[i];
    }
    return m;
}

namespace {

Matrix batch_actions(const Batch& batch) {
    Matrix a(1, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t j = 0; j < batch.size(); ++j) a(0, static_cast<Eigen::Index>(j)) = batch[j].a;
    return a;
}

Vector to_vector(const std::array<double, kObsDim>& x) { return Eigen::Map<const Vector>(x.data(), kObsDim); }

}  // namespace

TdResult td_targets(const Batch& batch, const NetworkParams& critic, const NetworkParams& target_actor,
                    const NetworkParams& target_critic, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
    const Matrix s_next = batch_states(batch, true);
    const Matrix q_next = critic_forward_batch(target_critic, s_next, actor_forward_batch(target_actor, s_next));
    const Matrix q = critic_forward_batch(critic, batch_states(batch, false), batch_actions(batch));
    TdResult out;
    out.y.resize(batch.size());
    out.delta.resize(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        out.y[j] = batch[j].r + (batch[j].done ? 0.0 : gamma * q_next(0, k));
        out.delta[j] = out.y[j] - q(0, k);
    }
    return out;
}

double critic_loss(const NetworkParams& critic, const Batch& batch, const std::vector<double>& y,
                   NetworkParams* grad) {
    if (batch.empty()) throw TrainingError("empty batch");
    if (y.size() != batch.size()) throw ConfigError("target count does not match the batch");
    const double m = static_cast<double>(batch.size());
    CriticCache cache;
    const Matrix q = critic_forward_batch(critic, batch_states(batch, false), batch_actions(batch), &cache);
    Matrix dq(1, q.cols());
    double loss = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const double d = y[static_cast<std::size_t>(j)] - q(0, j);
        loss += d * d;
        dq(0, j) = -d / m;
    }
    loss /= 2.0 * m;
    if (grad) {
        *grad = critic.zeros_like();
        critic_backward(critic, cache, dq, grad);
    }
    return loss;
}

double actor_objective(const NetworkParams& actor, const NetworkParams& critic, const Batch& batch,
                       NetworkParams* grad, double preactivation_penalty) {
    if (batch.empty()) throw TrainingError("empty batch");
    const double m = static_cast<double>(batch.size());
    const Matrix s = batch_states(batch, false);
    ActorCache a_cache;
    const Matrix a = actor_forward_batch(actor, s, &a_cache);
    CriticCache c_cache;
    const Matrix q = critic_forward_batch(critic, s, a, &c_cache);
    if (grad) {
        const Matrix dq = Matrix::Constant(1, q.cols(), 1.0 / m);
        const Matrix da = critic_backward(critic, c_cache, dq, nullptr);
        const Matrix dz = (-2.0 * preactivation_penalty / m) * a_cache.output_pre;
        *grad = actor.zeros_like();
        actor_backward(actor, a_cache, da, *grad, &dz);
    }
    return q.sum() / m - preactivation_penalty * a_cache.output_pre.squaredNorm() / m;
}

void soft_update(NetworkParams& target, const NetworkParams& online, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
    if (!target.same_shape(online)) throw ConfigError("target and online networks differ in shape");
    for (std::size_t i = 0; i < target.layers.size(); ++i) {
        target.layers[i].weight = tau * online.layers[i].weight + (1.0 - tau) * target.layers[i].weight;
        target.layers[i].bias = tau * online.layers[i].bias + (1.0 - tau) * target.layers[i].bias;
    }
}

// --- Agent -------------------------------------------------------------------

namespace {

// Independent streams for init, replay and noise derived from one seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::array<std::uint64_t, 1> out{};
    seq.generate(reinterpret_cast<std::uint32_t*>(out.data()), reinterpret_cast<std::uint32_t*>(out.data() + 1));
    return out[0];
}

}  // namespace

DdpgAgent::DdpgAgent(DdpgConfig config, ObservationScaler scaler)
    : config_(std::move(config)),
      scaler_(scaler),
      init_rng_(stream_seed(config_.seed, 1)),
      buffer_(std::max<std::size_t>(config_.buffer_capacity, 1), stream_seed(config_.seed, 2)),
      noise_(config_.noise_variance, config_.noise_decay, stream_seed(config_.seed, 3)) {
    config_.validate();
    scaler_.validate();
    actor_ = make_actor(kObsDim, config_.actor_hidden, init_rng_);
    critic_ = make_critic(kObsDim, config_.critic_obs_hidden1, config_.critic_obs_hidden2,
                          config_.critic_action_hidden, init_rng_);
    target_actor_ = actor_;
    target_critic_ = critic_;
    actor_opt_ = Optimizer(actor_, config_.optimizer, config_.actor_lr, config_.adam_beta1, config_.adam_beta2,
                           config_.adam_epsilon);
    critic_opt_ = Optimizer(critic_, config_.optimizer, config_.critic_lr, config_.adam_beta1, config_.adam_beta2,
                            config_.adam_epsilon);
}

double DdpgAgent::act(const std::array<double, kObsDim>& raw_obs) const {
    return actor_forward(actor_, to_vector(scaler_.apply(raw_obs)));
}

double DdpgAgent::select_action(const std::array<double, kObsDim>& raw_obs, bool explore) {
    const double a = act(raw_obs);
    if (!explore) return a;
    return std::clamp(a + noise_.sample(), -1.0, 1.0);
}

void DdpgAgent::observe(const std::array<double, kObsDim>& s, double a, double r,
                        const std::array<double, kObsDim>& s_next, bool done) {
    buffer_.add(Transition{scaler_.apply(s), a, r, scaler_.apply(s_next), done});
}

UpdateStats DdpgAgent::update(const Batch& batch) {
    UpdateStats stats;
    const TdResult td = td_targets(batch, critic_, target_actor_, target_critic_, config_.gamma);
    NetworkParams grad;
    stats.critic_loss = critic_loss(critic_, batch, td.y, &grad);
    if (!std::isfinite(stats.critic_loss) || !grad.finite()) {
        throw TrainingError("critic loss or gradient is not finite (loss = " + std::to_string(stats.critic_loss) +
                            ", update " + std::to_string(updates_) + ")");
    }
    double mean_q = 0.0;
    for (std::size_t j = 0; j < td.y.size(); ++j) mean_q += td.y[j] - td.delta[j];
    stats.mean_q = mean_q / static_cast<double>(td.y.size());
    critic_opt_.step(critic_, grad);

    NetworkParams actor_grad;
    stats.actor_objective = actor_objective(actor_, critic_, batch, &actor_grad, config_.preactivation_penalty);
    if (!std::isfinite(stats.actor_objective) || !actor_grad.finite()) {
        throw TrainingError("actor gradient is not finite (update " + std::to_string(updates_) + ")");
    }
    // The optimizer minimizes; ascend on J by descending on -J.
    for (auto& l : actor_grad.layers) {
        l.weight = -l.weight;
        l.bias = -l.bias;
    }
    actor_opt_.step(actor_, actor_grad);

    soft_update(target_critic_, critic_, config_.tau);
    soft_update(target_actor_, actor_, config_.tau);
    ++updates_;
    return stats;
}

bool DdpgAgent::train_step(UpdateStats* stats) {
    if (buffer_.size() < config_.warmup) return false;
    const UpdateStats s = update(buffer_.sample(config_.batch_size));
    if (stats) *stats = s;
    return true;
}

std::uint64_t DdpgAgent::parameter_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto* net : {&actor_, &critic_, &target_actor_, &target_critic_}) {
        h ^= net->hash();
        h *= 1099511628211ULL;
    }
    return h;
}

// --- Checkpoint --------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'L', 'F', 'E', 'P', 'C', 'K', 'P'};
constexpr char kEnd[4] = {'E', 'N', 'D', '!'};

class Writer {
public:
    template <class T>
    void pod(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.append(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void bytes(const char* p, std::size_t n) { out_.append(p, n); }
    void text(const std::string& s) {
        pod(static_cast<std::uint64_t>(s.size()));
        out_.append(s);
    }
    void network(const NetworkParams& p) {
        pod(static_cast<std::uint32_t>(p.layers.size()));
        for (const auto& l : p.layers) {
            pod(static_cast<std::uint32_t>(l.weight.rows()));
            pod(static_cast<std::uint32_t>(l.weight.cols()));
            pod(static_cast<std::uint8_t>(l.activation));
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c) pod(l.weight(r, c));
            }
            for (Eigen::Index r = 0; r < l.bias.size(); ++r) pod(l.bias(r));
        }
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& data) : data_(data) {}

    template <class T>
    T pod(const char* what) {
        T v;
        need(sizeof v, what);
        std::memcpy(&v, data_.data() + pos_, sizeof v);
        pos_ += sizeof v;
        return v;
    }
    void expect(const char* tag, std::size_t n, const char* what) {
        need(n, what);
        if (std::memcmp(data_.data() + pos_, tag, n) != 0) throw CheckpointError(std::string("bad ") + what);
        pos_ += n;
    }
    std::string text(const char* what) {
        const auto n = pod<std::uint64_t>(what);
        need(n, what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    NetworkParams network(const char* what) {
        NetworkParams p;
        const auto n = pod<std::uint32_t>(what);
        if (n > 64) throw CheckpointError(std::string("implausible layer count in ") + what);
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto rows = pod<std::uint32_t>(what);
            const auto cols = pod<std::uint32_t>(what);
            const auto act = pod<std::uint8_t>(what);
            if (act > static_cast<std::uint8_t>(Activation::tanh)) {
                throw CheckpointError(std::string("unknown activation in ") + what);
            }
            need(static_cast<std::size_t>(rows) * (cols + 1) * sizeof(double), what);
            DenseLayer l;
            l.activation = static_cast<Activation>(act);
            l.weight.resize(rows, cols);
            l.bias.resize(rows);
            for (std::uint32_t r = 0; r < rows; ++r) {
                for (std::uint32_t c = 0; c < cols; ++c) l.weight(r, c) = pod<double>(what);
            }
            for (std::uint32_t r = 0; r < rows; ++r) l.bias(r) = pod<double>(what);
            p.layers.push_back(std::move(l));
        }
        return p;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n, const char* what) const {
        if (data_.size() - pos_ < n) throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
    }
    const std::string& data_;
    std::size_t pos_ = 0;
};

std::string rng_text(const std::mt19937_64& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void rng_restore(std::mt19937_64& rng, const std::string& text) {
    std::istringstream is(text);
    is >> rng;
    if (is.fail()) throw CheckpointError("corrupt RNG state in checkpoint");
}

void write_optimizer(Writer& w, const Optimizer& o) {
    w.pod(static_cast<std::uint8_t>(o.kind_));
    w.pod(o.lr_);
    w.pod(o.beta1_);
    w.pod(o.beta2_);
    w.pod(o.eps_);
    w.pod(o.t_);
    w.network(o.m_);
    w.network(o.v_);
}

Optimizer read_optimizer(Reader& r, const NetworkParams& shape) {
    Optimizer o;
    const auto kind = r.pod<std::uint8_t>("optimizer");
    if (kind > static_cast<std::uint8_t>(OptimizerKind::sgd)) throw CheckpointError("unknown optimizer kind");
    o.kind_ = static_cast<OptimizerKind>(kind);
    o.lr_ = r.pod<double>("optimizer");
    o.beta1_ = r.pod<double>("optimizer");
    o.beta2_ = r.pod<double>("optimizer");
    o.eps_ = r.pod<double>("optimizer");
    o.t_ = r.pod<std::uint64_t>("optimizer");
    o.m_ = r.network("optimizer moments");
    o.v_ = r.network("optimizer moments");
    if (!o.m_.same_shape(shape) || !o.v_.same_shape(shape)) {
        throw CheckpointError("optimizer moments do not match the network shape");
    }
    return o;
}

}  // namespace

std::string DdpgAgent::serialize(bool with_replay) const {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.pod(kCheckpointVersion);
    // Configuration.
    w.pod(static_cast<std::int32_t>(config_.actor_hidden));
    w.pod(static_cast<std::int32_t>(config_.critic_obs_hidden1));
    w.pod(static_cast<std::int32_t>(config_.critic_obs_hidden2));
    w.pod(static_cast<std::int32_t>(config_.critic_action_hidden));
    w.pod(config_.actor_lr);
    w.pod(config_.critic_lr);
    w.pod(config_.gamma);
    w.pod(config_.tau);
    w.pod(static_cast<std::uint64_t>(config_.buffer_capacity));
    w.pod(static_cast<std::uint64_t>(config_.batch_size));
    w.pod(static_cast<std::uint64_t>(config_.warmup));
    w.pod(config_.noise_variance);
    w.pod(config_.noise_decay);
    w.pod(static_cast<std::uint8_t>(config_.optimizer));
    w.pod(config_.adam_beta1);
    w.pod(config_.adam_beta2);
    w.pod(config_.adam_epsilon);
    w.pod(config_.preactivation_penalty);
    w.pod(config_.seed);
    for (double c : scaler_.center) w.pod(c);
    for (double h : scaler_.half_range) w.pod(h);
    // Networks.
    w.network(actor_);
    w.network(critic_);
    w.network(target_actor_);
    w.network(target_critic_);
    write_optimizer(w, actor_opt_);
    write_optimizer(w, critic_opt_);
    // Noise and RNG streams.
    w.pod(noise_.variance());
    w.pod(noise_.decay());
    w.text(rng_text(noise_.rng()));
    w.text(rng_text(buffer_.rng_));
    w.text(rng_text(init_rng_));
    w.pod(updates_);
    // Optional replay contents.
    w.pod(static_cast<std::uint8_t>(with_replay ? 1 : 0));
    if (with_replay) {
        w.pod(static_cast<std::uint64_t>(buffer_.next_));
        w.pod(static_cast<std::uint64_t>(buffer_.data_.size()));
        for (const auto& t : buffer_.data_) {
            for (double v : t.s) w.pod(v);
            w.pod(t.a);
            w.pod(t.r);
            for (double v : t.s_next) w.pod(v);
            w.pod(static_cast<std::uint8_t>(t.done ? 1 : 0));
        }
    }
    w.bytes(kEnd, sizeof kEnd);
    return w.take();
}

DdpgAgent DdpgAgent::deserialize(const std::string& bytes) {
    Reader r(bytes);
    r.expect(kMagic, sizeof kMagic, "checkpoint magic");
    const auto version = r.pod<std::uint32_t>("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    }
    DdpgConfig c;
    c.actor_hidden = r.pod<std::int32_t>("config");
    c.critic_obs_hidden1 = r.pod<std::int32_t>("config");
    c.critic_obs_hidden2 = r.pod<std::int32_t>("config");
    c.critic_action_hidden = r.pod<std::int32_t>("config");
    c.actor_lr = r.pod<double>("config");
    c.critic_lr = r.pod<double>("config");
    c.gamma = r.pod<double>("config");
    c.tau = r.pod<double>("config");
    c.buffer_capacity = r.pod<std::uint64_t>("config");
    c.batch_size = r.pod<std::uint64_t>("config");
    c.warmup = r.pod<std::uint64_t>("config");
    c.noise_variance = r.pod<double>("config");
    c.noise_decay = r.pod<double>("config");
    const auto opt = r.pod<std::uint8_t>("config");
    if (opt > static_cast<std::uint8_t>(OptimizerKind::sgd)) throw CheckpointError("unknown optimizer kind");
    c.optimizer = static_cast<OptimizerKind>(opt);
    c.adam_beta1 = r.pod<double>("config");
    c.adam_beta2 = r.pod<double>("config");
    c.adam_epsilon = r.pod<double>("config");
    c.preactivation_penalty = r.pod<double>("config");
    c.seed = r.pod<std::uint64_t>("config");
    ObservationScaler scaler;
    for (double& v : scaler.center) v = r.pod<double>("scaler");
    for (double& v : scaler.half_range) v = r.pod<double>("scaler");

    DdpgAgent agent = [&] {
        try {
            return DdpgAgent(c, scaler);
        } catch (const ConfigError& e) {
            throw CheckpointError(std::string("checkpoint configuration is invalid: ") + e.what());
        }
    }();
    auto load_net = [&](NetworkParams& dst, const char* what) {
        NetworkParams p = r.network(what);
        if (!p.same_shape(dst)) throw CheckpointError(std::string("layer shapes of ") + what + " do not match");
        dst = std::move(p);
    };
    load_net(agent.actor_, "actor");
    load_net(agent.critic_, "critic");
    load_net(agent.target_actor_, "target actor");
    load_net(agent.target_critic_, "target critic");
    agent.actor_opt_ = read_optimizer(r, agent.actor_);
    agent.critic_opt_ = read_optimizer(r, agent.critic_);
    const double variance = r.pod<double>("noise");
    const double decay = r.pod<double>("noise");
    if (decay != c.noise_decay) throw CheckpointError("noise decay does not match the configuration");
    agent.noise_.set_variance(variance);
    rng_restore(agent.noise_.rng(), r.text("noise RNG"));
    rng_restore(agent.buffer_.rng_, r.text("replay RNG"));
    rng_restore(agent.init_rng_, r.text("init RNG"));
    agent.updates_ = r.pod<std::uint64_t>("update count");
    if (r.pod<std::uint8_t>("replay flag") != 0) {
        const auto next = r.pod<std::uint64_t>("replay");
        const auto size = r.pod<std::uint64_t>("replay");
        if (size > agent.buffer_.capacity_ || next >= agent.buffer_.capacity_) {
            throw CheckpointError("replay contents exceed the configured capacity");
        }
        agent.buffer_.data_.resize(size);
        for (auto& t : agent.buffer_.data_) {
            for (double& v : t.s) v = r.pod<double>("replay");
            t.a = r.pod<double>("replay");
            t.r = r.pod<double>("replay");
            for (double& v : t.s_next) v = r.pod<double>("replay");
            t.done = r.pod<std::uint8_t>("replay") != 0;
        }
        agent.buffer_.next_ = next;
    }
    r.expect(kEnd, sizeof kEnd, "end marker (file truncated or corrupt)");
    if (!r.at_end()) throw CheckpointError("trailing bytes after checkpoint end marker");
    return agent;
}

void DdpgAgent::save(const std::filesystem::path& path, bool with_replay) const {
    const std::string bytes = serialize(with_replay);
    // Write to a sibling file then rename so a crash never leaves a torn checkpoint.
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw CheckpointError("cannot open " + tmp + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw CheckpointError("failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

DdpgAgent DdpgAgent::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return deserialize(ss.str());
    } catch (const CheckpointError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
}

double Policy::operator()(const std::array<double, kObsDim>& raw_obs) const {
    return actor_forward(actor, to_vector(scaler.apply(raw_obs)));
}

Policy Policy::from_agent(const DdpgAgent& agent) { return {agent.actor(), agent.scaler()}; }

Policy Policy::load(const std::filesystem::path& path) { return from_agent(DdpgAgent::load(path)); }

}  // namespace rlfep
