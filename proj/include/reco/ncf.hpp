#ifndef RECO_NCF_HPP
#define RECO_NCF_HPP

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "reco/dataset.hpp"
#include "reco/metrics.hpp"

namespace reco {

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NcfTargetMode {
    binary,         // interactions -> 1, sampled negatives -> 0
    scaled_rating,  // (rating - min) / (max - min) as a soft target
};

enum class NcfOptimizer { sgd, adam };

struct NcfConfig {
    int latent_dim = 4;
    std::vector<int> mlp_layers = {16, 8, 4};
    double learning_rate = 1e-3;
    int batch_size = 256;
    int epochs = 10;
    std::uint64_t seed = 0;
    int negative_ratio = 4;  // used for explicit data in binary mode
    NcfTargetMode target_mode = NcfTargetMode::binary;
    NcfOptimizer optimizer = NcfOptimizer::sgd;

    void validate() const;
};

// Separate embedding tables for the GMF and MLP branches.
struct NcfParameters {
    Eigen::MatrixXd gmf_user, gmf_item;  // n_users x d, n_items x d
    Eigen::MatrixXd mlp_user, mlp_item;
    std::vector<Eigen::MatrixXd> mlp_weights;
    std::vector<Eigen::VectorXd> mlp_biases;
    Eigen::VectorXd neumf_weights;  // d + last hidden width
    double output_bias = 0.0;

    bool all_finite() const;
};

struct NcfExample {
    int user = 0;  // dense index
    int item = 0;
    double target = 0.0;
};

class NcfModel : public RecommenderModel {
public:
    // Minibatch gradient descent on binary cross-entropy; deterministic for
    // a fixed (seed, data, config).
    static NcfModel train(const Dataset& train_data, const NcfConfig& config);

    // GMF elementwise product and MLP towers fused by the NeuMF layer,
    // sigmoid head. Unknown ids get the cold-start score 0.5.
    double forward(int user_id, int item_id) const;

    double score(int user_id, int item_id) const override { return forward(user_id, item_id); }
    bool trained() const override { return trained_; }

    RankedList rank(int user_id, const std::vector<int>& candidates) const;

    // Mean gradient of the batch loss w.r.t. every parameter tensor.
    NcfParameters gradient(const std::vector<NcfExample>& batch) const;
    double batch_loss(const std::vector<NcfExample>& batch) const;

    const NcfParameters& parameters() const { return params_; }
    NcfParameters& mutable_parameters() { return params_; }
    const NcfConfig& config() const { return config_; }
    const std::vector<double>& loss_history() const { return loss_history_; }
    const std::map<int, int>& user_map() const { return user_map_; }
    const std::map<int, int>& item_map() const { return item_map_; }

    // Hand-assembled models for tests.
    static NcfModel from_parameters(NcfParameters params, NcfConfig config,
                                    std::map<int, int> user_map, std::map<int, int> item_map);

private:
    double forward_dense(int u, int i) const;

    NcfParameters params_;
    NcfConfig config_;
    std::map<int, int> user_map_;
    std::map<int, int> item_map_;
    std::vector<double> loss_history_;
    bool trained_ = false;
};

}  // namespace reco

#endif  // RECO_NCF_HPP
