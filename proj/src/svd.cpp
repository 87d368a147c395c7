#include "reco/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace reco {

namespace {

// One-sided Jacobi on a tall matrix (rows >= cols). Returns W with mutually
// orthogonal columns and V accumulating the applied rotations, so that
// input = W * V^T.
void jacobi_orthogonalize(Eigen::MatrixXd& w, Eigen::MatrixXd& v) {
    const int n = static_cast<int>(w.cols());
    const double tol = 1e-14;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int i = 0; i < n - 1; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double a = w.col(i).squaredNorm();
                double b = w.col(j).squaredNorm();
                double c = w.col(i).dot(w.col(j));
                if (std::abs(c) <= tol * std::sqrt(a * b)) continue;
                rotated = true;

                double zeta = (b - a) / (2.0 * c);
                double t = std::copysign(1.0, zeta) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;

                Eigen::VectorXd wi = w.col(i);
                w.col(i) = cs * wi - sn * w.col(j);
                w.col(j) = sn * wi + cs * w.col(j);
                Eigen::VectorXd vi = v.col(i);
                v.col(i) = cs * vi - sn * v.col(j);
                v.col(j) = sn * vi + cs * v.col(j);
            }
        }
        if (!rotated) break;
    }
}

}  // namespace

SvdFactorization compact_svd(const Eigen::MatrixXd& matrix) {
    if (!matrix.allFinite()) throw ValidationError("matrix has non-finite entries");

    const bool transposed = matrix.rows() < matrix.cols();
    Eigen::MatrixXd w = transposed ? matrix.transpose() : matrix;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(w.cols(), w.cols());
    jacobi_orthogonalize(w, v);

    const int n = static_cast<int>(w.cols());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd norms(n);
    for (int j = 0; j < n; ++j) norms[j] = w.col(j).norm();
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return norms[a] > norms[b]; });

    double sigma_max = n > 0 ? norms[order[0]] : 0.0;
    double cutoff = sigma_max * std::max(matrix.rows(), matrix.cols()) *
                    std::numeric_limits<double>::epsilon();

    int rank = 0;
    for (int j : order)
        if (norms[j] > cutoff && norms[j] > 0.0) ++rank;

    SvdFactorization f;
    f.rank = rank;
    f.u_factors.resize(w.rows(), rank);
    f.v_factors.resize(v.rows(), rank);
    f.singular_values.resize(rank);
    for (int idx = 0; idx < rank; ++idx) {
        int j = order[idx];
        f.singular_values[idx] = norms[j];
        f.u_factors.col(idx) = w.col(j) / norms[j];
        f.v_factors.col(idx) = v.col(j);
    }
    if (transposed) std::swap(f.u_factors, f.v_factors);
    return f;
}

Eigen::MatrixXd rank_k_approximation(const SvdFactorization& f, int k) {
    if (k < 1 || k > f.rank) throw ValidationError("k out of range");
    return f.u_factors.leftCols(k) *
           f.singular_values.head(k).asDiagonal() *
           f.v_factors.leftCols(k).transpose();
}

Eigen::MatrixXd pseudoinverse(const SvdFactorization& f) {
    return f.v_factors *
           f.singular_values.cwiseInverse().asDiagonal() *
           f.u_factors.transpose();
}

SvdRecommender SvdRecommender::fit(const Dataset& train, int k, FillPolicy policy) {
    if (train.empty()) throw ValidationError("empty training data");
    if (train.kind() != DatasetKind::explicit_ratings)
        throw ValidationError("SVD recommender requires explicit ratings");
    if (k < 1) throw ValidationError("k must be >= 1");

    SvdRecommender model;
    model.policy_ = policy;
    int m = 0, n = 0;
    for (const auto& [user, _] : train.user_index()) model.user_map_[user] = m++;
    for (const auto& [item, _] : train.item_index()) model.item_map_[item] = n++;

    Eigen::MatrixXd ratings = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(m, n);
    double rating_sum = 0.0;
    for (const Interaction& it : train.interactions()) {
        int r = model.user_map_.at(it.user_id);
        int c = model.item_map_.at(it.item_id);
        ratings(r, c) = it.rating;
        mask(r, c) = 1.0;
        rating_sum += it.rating;
    }
    model.global_mean_ = rating_sum / static_cast<double>(train.size());

    model.user_means_.resize(m);
    for (int r = 0; r < m; ++r) {
        double cnt = mask.row(r).sum();
        model.user_means_[r] = cnt > 0.0 ? ratings.row(r).sum() / cnt : model.global_mean_;
    }

    for (int r = 0; r < m; ++r) {
        double fill = 0.0;
        switch (policy) {
            case FillPolicy::user_mean: fill = model.user_means_[r]; break;
            case FillPolicy::global_mean: fill = model.global_mean_; break;
            case FillPolicy::zero: fill = 0.0; break;
        }
        for (int c = 0; c < n; ++c)
            if (mask(r, c) == 0.0) ratings(r, c) = fill;
        ratings.row(r).array() -= model.user_means_[r];
    }

    SvdFactorization f = compact_svd(ratings);
    int kk = k;
    if (kk > f.rank) {
        kk = std::max(f.rank, 1);
        model.clamped_ = true;
    }
    kk = std::min(kk, f.rank);
    if (kk < 1) {
        // Degenerate all-centered-to-zero matrix: latent part is empty.
        model.user_latent_ = Eigen::MatrixXd::Zero(m, 0);
        model.item_latent_ = Eigen::MatrixXd::Zero(n, 0);
        model.k_ = 0;
    } else {
        model.user_latent_ = f.u_factors.leftCols(kk) *
                             f.singular_values.head(kk).asDiagonal();
        model.item_latent_ = f.v_factors.leftCols(kk);
        model.k_ = kk;
    }
    model.trained_ = true;
    return model;
}

double SvdRecommender::predict(int user_id, int item_id) const {
    if (!trained_) throw ValidationError("model not fitted");
    auto u = user_map_.find(user_id);
    auto i = item_map_.find(item_id);
    if (u == user_map_.end() || i == item_map_.end()) return global_mean_;
    if (k_ == 0) return user_means_[u->second];
    return user_means_[u->second] +
           user_latent_.row(u->second).dot(item_latent_.row(i->second));
}

}  // namespace reco
