#pragma once

#include "imoc/tensor.hpp"

namespace imoc::estimators {

// Constants of the bounded similarity s' = c2 * tanh(s / (c1 * c2)).
// c1 is the latent dimension; c2 is fixed at 20 across experiments.
struct SimilarityConfig {
  double c1 = 1.0;
  double c2 = 20.0;
};

struct LossBreakdown {
  double nce = 0.0;      // mutual-information term (NCE or JSD, per config)
  double entropy = 0.0;  // p-norm regularizer
  double gvg = 0.0;      // extension only: global vs global
  double gvl = 0.0;      // extension only: global vs local
  double total = 0.0;
};

// Scalar loss plus its recorded components.
struct LossResult {
  Tensor total;
  LossBreakdown parts;
};

double clamp_similarity(double s, const SimilarityConfig& cfg);
Tensor clamp_similarity(const Tensor& s, const SimilarityConfig& cfg);

// Contrastive loss over a 2N x d batch whose rows 2k, 2k+1 hold the two
// augmented views of sample k. Pairwise dot-product similarities are
// clamped, shifted by the global matrix max, and each anchor's positive is
// scored against the other 2N-1 rows.
Tensor nce_pair_loss(const Tensor& z, const SimilarityConfig& cfg);

// Same loss with similarity summed over all spatial-location pairs between
// two feature-map batches (N x d x n1 vs N x d x n2); positives are the
// index-matched entries.
Tensor nce_map_loss(const Tensor& phi1, const Tensor& phi2, const SimilarityConfig& cfg);

// Softplus-based Jensen-Shannon surrogate, negated into a loss:
//   mean softplus(-f_pos) + mean softplus(f_neg).
Tensor jsd_mi_loss(const Tensor& scores_pos, const Tensor& scores_neg);

// JSD loss over a paired batch: critic = clamped dot product; positives are
// the paired views, negatives every other off-diagonal combination.
Tensor jsd_pair_loss(const Tensor& z, const SimilarityConfig& cfg);

// Mean row norm: p=1 -> mean L1; p=2 -> mean squared L2 by default
// (`squared` switches the p=2 variant to the plain norm, and vice versa).
Tensor entropy_regularizer(const Tensor& z, int p, bool squared);
inline bool default_entropy_squared(int p) { return p == 2; }

enum class MiEstimator { nce, jsd };

// L = L_mi + beta * L_entropy over the 2N-row view batch.
LossResult total_loss_base(const Tensor& z, double beta, int p, bool squared,
                           const SimilarityConfig& cfg, MiEstimator est = MiEstimator::nce);

// Extension: L = L_gvg + L_gvl + beta * L_entropy with
//   gvg = NCE pair loss on globals,
//   gvl = 0.5 * [map(G_view2, L_view1) + map(G_view1, L_view2)],
//   entropy over global rows and flattened projected-local entries.
// g: 2N x d; l: 2N x d x n (already projected). The extension loss is
// NCE-based by construction; the estimator switch applies to the base loss.
LossResult total_loss_extension(const Tensor& g, const Tensor& l, double beta, int p, bool squared,
                                const SimilarityConfig& cfg);

}  // namespace imoc::estimators
