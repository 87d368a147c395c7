#include "reco/ncf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "reco/rng.hpp"

namespace reco {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double y_hat, double y) {
    const double eps = 1e-12;
    double p = std::clamp(y_hat, eps, 1.0 - eps);
    return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

struct ForwardState {
    Eigen::VectorXd gmf;                  // d
    std::vector<Eigen::VectorXd> pre;     // z_l per hidden layer
    std::vector<Eigen::VectorXd> act;     // x_0 .. x_L (x_0 = concat embeddings)
    Eigen::VectorXd fused;                // [gmf ; x_L]
    double z = 0.0;
    double y_hat = 0.0;
};

}  // namespace

void NcfConfig::validate() const {
    if (latent_dim < 1) throw ValidationError("latent_dim must be >= 1");
    for (int w : mlp_layers)
        if (w < 1) throw ValidationError("mlp layer widths must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (negative_ratio < 0) throw ValidationError("negative_ratio must be >= 0");
}

bool NcfParameters::all_finite() const {
    auto ok = [](const Eigen::MatrixXd& m) { return m.allFinite(); };
    if (!ok(gmf_user) || !ok(gmf_item) || !ok(mlp_user) || !ok(mlp_item)) return false;
    for (const auto& w : mlp_weights)
        if (!ok(w)) return false;
    for (const auto& b : mlp_biases)
        if (!b.allFinite()) return false;
    return neumf_weights.allFinite() && std::isfinite(output_bias);
}

namespace {

NcfParameters init_parameters(const NcfConfig& cfg, int n_users, int n_items,
                              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    auto fill = [&](Eigen::MatrixXd& m, int r, int c) {
        m.resize(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
    };

    NcfParameters p;
    int d = cfg.latent_dim;
    fill(p.gmf_user, n_users, d);
    fill(p.gmf_item, n_items, d);
    fill(p.mlp_user, n_users, d);
    fill(p.mlp_item, n_items, d);

    int prev = 2 * d;
    for (int width : cfg.mlp_layers) {
        Eigen::MatrixXd w;
        fill(w, width, prev);
        p.mlp_weights.push_back(std::move(w));
        Eigen::VectorXd b = Eigen::VectorXd::Zero(width);
        p.mlp_biases.push_back(std::move(b));
        prev = width;
    }
    Eigen::MatrixXd nw;
    fill(nw, d + prev, 1);
    p.neumf_weights = nw.col(0);
    p.output_bias = 0.0;
    return p;
}

ForwardState run_forward(const NcfParameters& p, int u, int i) {
    ForwardState s;
    s.gmf = p.gmf_user.row(u).cwiseProduct(p.gmf_item.row(i));

    Eigen::VectorXd x(p.mlp_user.cols() + p.mlp_item.cols());
    x << p.mlp_user.row(u).transpose(), p.mlp_item.row(i).transpose();
    s.act.push_back(x);
    for (std::size_t l = 0; l < p.mlp_weights.size(); ++l) {
        Eigen::VectorXd z = p.mlp_weights[l] * s.act.back() + p.mlp_biases[l];
        s.pre.push_back(z);
        s.act.push_back(z.cwiseMax(0.0));
    }

    s.fused.resize(s.gmf.size() + s.act.back().size());
    s.fused << s.gmf, s.act.back();
    s.z = p.neumf_weights.dot(s.fused) + p.output_bias;
    s.y_hat = sigmoid(s.z);
    return s;
}

NcfParameters zero_like(const NcfParameters& p) {
    NcfParameters g;
    g.gmf_user = Eigen::MatrixXd::Zero(p.gmf_user.rows(), p.gmf_user.cols());
    g.gmf_item = Eigen::MatrixXd::Zero(p.gmf_item.rows(), p.gmf_item.cols());
    g.mlp_user = Eigen::MatrixXd::Zero(p.mlp_user.rows(), p.mlp_user.cols());
    g.mlp_item = Eigen::MatrixXd::Zero(p.mlp_item.rows(), p.mlp_item.cols());
    for (const auto& w : p.mlp_weights)
        g.mlp_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : p.mlp_biases)
        g.mlp_biases.push_back(Eigen::VectorXd::Zero(b.size()));
    g.neumf_weights = Eigen::VectorXd::Zero(p.neumf_weights.size());
    g.output_bias = 0.0;
    return g;
}

void accumulate_example_gradient(const NcfParameters& p, NcfParameters& g,
                                 const NcfExample& ex, double inv_batch) {
    ForwardState s = run_forward(p, ex.user, ex.item);
    const int d = static_cast<int>(s.gmf.size());
    const int top = static_cast<int>(s.act.back().size());

    double dz = (s.y_hat - ex.target) * inv_batch;

    g.neumf_weights += dz * s.fused;
    g.output_bias += dz;

    Eigen::VectorXd dfused = dz * p.neumf_weights;
    Eigen::VectorXd dgmf = dfused.head(d);
    Eigen::VectorXd dx = dfused.tail(top);

    g.gmf_user.row(ex.user) += (dgmf.cwiseProduct(p.gmf_item.row(ex.item).transpose())).transpose();
    g.gmf_item.row(ex.item) += (dgmf.cwiseProduct(p.gmf_user.row(ex.user).transpose())).transpose();

    for (int l = static_cast<int>(p.mlp_weights.size()) - 1; l >= 0; --l) {
        Eigen::VectorXd dzl = dx.cwiseProduct(
            (s.pre[l].array() > 0.0).cast<double>().matrix());
        g.mlp_weights[l] += dzl * s.act[l].transpose();
        g.mlp_biases[l] += dzl;
        dx = p.mlp_weights[l].transpose() * dzl;
    }

    g.mlp_user.row(ex.user) += dx.head(p.mlp_user.cols()).transpose();
    g.mlp_item.row(ex.item) += dx.tail(p.mlp_item.cols()).transpose();
}

// Adam state mirrors the parameter layout.
struct AdamState {
    NcfParameters m, v;
    long step = 0;
};

void sgd_step(NcfParameters& p, const NcfParameters& g, double lr) {
    p.gmf_user -= lr * g.gmf_user;
    p.gmf_item -= lr * g.gmf_item;
    p.mlp_user -= lr * g.mlp_user;
    p.mlp_item -= lr * g.mlp_item;
    for (std::size_t l = 0; l < p.mlp_weights.size(); ++l) {
        p.mlp_weights[l] -= lr * g.mlp_weights[l];
        p.mlp_biases[l] -= lr * g.mlp_biases[l];
    }
    p.neumf_weights -= lr * g.neumf_weights;
    p.output_bias -= lr * g.output_bias;
}

void adam_step(NcfParameters& p, const NcfParameters& g, AdamState& st, double lr) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    st.step += 1;
    double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step));

    auto update = [&](Eigen::MatrixXd& param, Eigen::MatrixXd& m,
                      Eigen::MatrixXd& v, const Eigen::MatrixXd& grad) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v.array().matrix() + (1.0 - b2) * grad.cwiseProduct(grad);
        Eigen::ArrayXXd mhat = m.array() / bc1;
        Eigen::ArrayXXd vhat = v.array() / bc2;
        param.array() -= lr * mhat / (vhat.sqrt() + eps);
    };

    update(p.gmf_user, st.m.gmf_user, st.v.gmf_user, g.gmf_user);
    update(p.gmf_item, st.m.gmf_item, st.v.gmf_item, g.gmf_item);
    update(p.mlp_user, st.m.mlp_user, st.v.mlp_user, g.mlp_user);
    update(p.mlp_item, st.m.mlp_item, st.v.mlp_item, g.mlp_item);
    for (std::size_t l = 0; l < p.mlp_weights.size(); ++l) {
        update(p.mlp_weights[l], st.m.mlp_weights[l], st.v.mlp_weights[l], g.mlp_weights[l]);
        Eigen::MatrixXd pb = p.mlp_biases[l], mb = st.m.mlp_biases[l],
                        vb = st.v.mlp_biases[l];
        update(pb, mb, vb, Eigen::MatrixXd(g.mlp_biases[l]));
        p.mlp_biases[l] = pb;
        st.m.mlp_biases[l] = mb;
        st.v.mlp_biases[l] = vb;
    }
    Eigen::MatrixXd nw = p.neumf_weights, nm = st.m.neumf_weights, nv = st.v.neumf_weights;
    update(nw, nm, nv, Eigen::MatrixXd(g.neumf_weights));
    p.neumf_weights = nw;
    st.m.neumf_weights = nm;
    st.v.neumf_weights = nv;

    st.m.output_bias = b1 * st.m.output_bias + (1.0 - b1) * g.output_bias;
    st.v.output_bias = b2 * st.v.output_bias + (1.0 - b2) * g.output_bias * g.output_bias;
    p.output_bias -= lr * (st.m.output_bias / bc1) /
                     (std::sqrt(st.v.output_bias / bc2) + eps);
}

}  // namespace

NcfModel NcfModel::train(const Dataset& train_data, const NcfConfig& config) {
    config.validate();
    if (train_data.empty()) throw ValidationError("empty training data");

    NcfModel model;
    model.config_ = config;
    int n_users = 0, n_items = 0;
    for (const auto& [user, _] : train_data.user_index()) model.user_map_[user] = n_users++;
    for (const auto& [item, _] : train_data.item_index()) model.item_map_[item] = n_items++;

    // Assemble training examples.
    std::vector<NcfExample> examples;
    const RatingScale scale = train_data.rating_scale();
    const bool explicit_binary = train_data.kind() == DatasetKind::explicit_ratings &&
                                 config.target_mode == NcfTargetMode::binary;
    for (const Interaction& it : train_data.interactions()) {
        NcfExample ex;
        ex.user = model.user_map_.at(it.user_id);
        ex.item = model.item_map_.at(it.item_id);
        if (train_data.kind() == DatasetKind::implicit_feedback) {
            ex.target = it.rating;
        } else if (config.target_mode == NcfTargetMode::binary) {
            ex.target = 1.0;
        } else {
            ex.target = (it.rating - scale.min) / (scale.max - scale.min);
        }
        examples.push_back(ex);
    }

    if (explicit_binary && config.negative_ratio > 0) {
        // Sample unobserved (user, item) pairs as zeros, mirroring the
        // implicit negative-sampling rule. Per-user derived seeds keep the
        // sample independent of user iteration order.
        std::unordered_set<std::uint64_t> observed;
        for (const Interaction& it : train_data.interactions())
            observed.insert((static_cast<std::uint64_t>(it.user_id) << 32) |
                            static_cast<std::uint32_t>(it.item_id));
        std::vector<int> all_items;
        for (const auto& [item, _] : train_data.item_index()) all_items.push_back(item);

        for (const auto& [user, positions] : train_data.user_index()) {
            std::vector<int> pool;
            for (int item : all_items)
                if (!observed.count((static_cast<std::uint64_t>(user) << 32) |
                                    static_cast<std::uint32_t>(item)))
                    pool.push_back(item);
            std::size_t want = std::min(pool.size(),
                static_cast<std::size_t>(config.negative_ratio) * positions.size());
            auto rng = make_rng(derive_seed(config.seed ^ 0x6e656761ULL, user));
            for (std::size_t i = 0; i < want; ++i) {
                std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
                std::swap(pool[i], pool[dist(rng)]);
                examples.push_back(NcfExample{model.user_map_.at(user),
                                              model.item_map_.at(pool[i]), 0.0});
            }
        }
    }

    auto rng = make_rng(config.seed);
    model.params_ = init_parameters(config, n_users, n_items, rng);
    model.trained_ = true;  // forward() usable during training

    AdamState adam;
    if (config.optimizer == NcfOptimizer::adam) {
        adam.m = zero_like(model.params_);
        adam.v = zero_like(model.params_);
    }

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t end = std::min(order.size(),
                start + static_cast<std::size_t>(config.batch_size));
            std::vector<NcfExample> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);

            NcfParameters grad = model.gradient(batch);
            if (config.optimizer == NcfOptimizer::adam)
                adam_step(model.params_, grad, adam, config.learning_rate);
            else
                sgd_step(model.params_, grad, config.learning_rate);

            for (const NcfExample& ex : batch)
                epoch_loss += bce(model.forward_dense(ex.user, ex.item), ex.target);
            seen += batch.size();
        }
        epoch_loss /= static_cast<double>(std::max<std::size_t>(seen, 1));
        if (!std::isfinite(epoch_loss) || !model.params_.all_finite())
            throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch + 1));
        model.loss_history_.push_back(epoch_loss);
    }
    return model;
}

double NcfModel::forward_dense(int u, int i) const {
    return run_forward(params_, u, i).y_hat;
}

double NcfModel::forward(int user_id, int item_id) const {
    if (!trained_) throw ValidationError("model not trained");
    auto u = user_map_.find(user_id);
    auto i = item_map_.find(item_id);
    if (u == user_map_.end() || i == item_map_.end()) return 0.5;  // cold start
    return forward_dense(u->second, i->second);
}

RankedList NcfModel::rank(int user_id, const std::vector<int>& candidates) const {
    return rank_items(*this, user_id, candidates);
}

NcfParameters NcfModel::gradient(const std::vector<NcfExample>& batch) const {
    if (batch.empty()) throw ValidationError("empty batch");
    NcfParameters g = zero_like(params_);
    double inv = 1.0 / static_cast<double>(batch.size());
    for (const NcfExample& ex : batch)
        accumulate_example_gradient(params_, g, ex, inv);
    return g;
}

double NcfModel::batch_loss(const std::vector<NcfExample>& batch) const {
    if (batch.empty()) throw ValidationError("empty batch");
    double acc = 0.0;
    for (const NcfExample& ex : batch)
        acc += bce(forward_dense(ex.user, ex.item), ex.target);
    return acc / static_cast<double>(batch.size());
}

NcfModel NcfModel::from_parameters(NcfParameters params, NcfConfig config,
                                   std::map<int, int> user_map, std::map<int, int> item_map) {
    NcfModel model;
    model.params_ = std::move(params);
    model.config_ = std::move(config);
    model.user_map_ = std::move(user_map);
    model.item_map_ = std::move(item_map);
    model.trained_ = true;
    return model;
}

}  // namespace reco
