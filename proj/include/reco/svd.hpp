#ifndef RECO_SVD_HPP
#define RECO_SVD_HPP

#include <Eigen/Dense>
#include <map>

#include "reco/dataset.hpp"
#include "reco/metrics.hpp"

namespace reco {

// Compact factorization A = U diag(s) V^T with orthonormal columns and
// s_1 >= ... >= s_r > 0.
struct SvdFactorization {
    Eigen::MatrixXd u_factors;       // m x r
    Eigen::VectorXd singular_values; // r, non-increasing
    Eigen::MatrixXd v_factors;       // n x r
    int rank = 0;
};

// One-sided Jacobi. Rotations are applied to column pairs of the working
// matrix until all columns are pairwise orthogonal to machine precision.
SvdFactorization compact_svd(const Eigen::MatrixXd& matrix);

Eigen::MatrixXd rank_k_approximation(const SvdFactorization& f, int k);

Eigen::MatrixXd pseudoinverse(const SvdFactorization& f);

enum class FillPolicy { user_mean, global_mean, zero };

// Latent-factor recommender: dense matrix with imputed missing entries,
// row mean-centering, truncated SVD, prediction = user mean + latent dot.
class SvdRecommender : public RecommenderModel {
public:
    static SvdRecommender fit(const Dataset& train, int k,
                              FillPolicy policy = FillPolicy::user_mean);

    double predict(int user_id, int item_id) const;

    double score(int user_id, int item_id) const override { return predict(user_id, item_id); }
    bool trained() const override { return trained_; }

    int retained_rank() const { return k_; }
    bool rank_was_clamped() const { return clamped_; }
    double global_mean() const { return global_mean_; }
    FillPolicy fill_policy() const { return policy_; }

private:
    std::map<int, int> user_map_;  // external id -> dense row
    std::map<int, int> item_map_;
    Eigen::MatrixXd user_latent_;  // m x k, already scaled by singular values
    Eigen::MatrixXd item_latent_;  // n x k
    Eigen::VectorXd user_means_;
    double global_mean_ = 0.0;
    FillPolicy policy_ = FillPolicy::user_mean;
    int k_ = 0;
    bool clamped_ = false;
    bool trained_ = false;
};

}  // namespace reco

#endif  // RECO_SVD_HPP
