#include "imoc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imoc/ops.hpp"

namespace imoc::estimators {

namespace {

void check_cfg(const SimilarityConfig& cfg) {
  if (!(cfg.c1 > 0.0) || !(cfg.c2 > 0.0))
    throw std::invalid_argument("similarity config: c1 and c2 must be positive");
}

void check_paired_batch(const Tensor& z, const char* op) {
  if (z.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": latents must be 2-D, got " +
                                shape_str(z.shape()));
  const std::size_t rows = z.shape()[0];
  if (rows % 2 != 0 || rows < 4)
    throw std::invalid_argument(std::string(op) +
                                ": needs an even number of rows from N >= 2 samples, got " +
                                std::to_string(rows));
}

// Clamped, globally max-shifted similarity matrix of a paired batch.
Tensor shifted_similarities(const Tensor& z, const SimilarityConfig& cfg) {
  Tensor s = ops::matmul_nt(z, z);
  Tensor sp = clamp_similarity(s, cfg);
  double smax = *std::max_element(sp.values().begin(), sp.values().end());
  return ops::add_scalar(sp, -smax);
}

Tensor nce_from_shifted(const Tensor& shifted) {
  const double inv = 1.0 / static_cast<double>(shifted.shape()[0]);
  Tensor denom = ops::sum_all(ops::logsumexp_excl_diag(shifted));
  Tensor pos = ops::sum_partner_entries(shifted);
  return ops::mul_scalar(ops::sub(denom, pos), inv);
}

// Feature maps (N x d x n) summed over locations; the double sum of
// per-location dot products factorizes into a dot product of these sums.
Tensor location_sum(const Tensor& phi, const char* op) {
  if (phi.rank() != 3)
    throw std::invalid_argument(std::string(op) + ": feature maps must be N x d x n, got " +
                                shape_str(phi.shape()));
  return ops::sum_last_axis(phi);
}

}  // namespace

double clamp_similarity(double s, const SimilarityConfig& cfg) {
  check_cfg(cfg);
  return cfg.c2 * std::tanh(s / (cfg.c1 * cfg.c2));
}

Tensor clamp_similarity(const Tensor& s, const SimilarityConfig& cfg) {
  check_cfg(cfg);
  return ops::mul_scalar(ops::tanh(ops::mul_scalar(s, 1.0 / (cfg.c1 * cfg.c2))), cfg.c2);
}

Tensor nce_pair_loss(const Tensor& z, const SimilarityConfig& cfg) {
  check_paired_batch(z, "nce_pair_loss");
  return nce_from_shifted(shifted_similarities(z, cfg));
}

Tensor nce_map_loss(const Tensor& phi1, const Tensor& phi2, const SimilarityConfig& cfg) {
  Tensor u = location_sum(phi1, "nce_map_loss");
  Tensor v = location_sum(phi2, "nce_map_loss");
  if (u.shape()[1] != v.shape()[1])
    throw std::invalid_argument("nce_map_loss: feature dimension mismatch, " +
                                shape_str(phi1.shape()) + " vs " + shape_str(phi2.shape()));
  if (u.shape()[0] != v.shape()[0])
    throw std::invalid_argument("nce_map_loss: batch size mismatch, " + shape_str(phi1.shape()) +
                                " vs " + shape_str(phi2.shape()));
  return nce_from_shifted(shifted_similarities(ops::interleave_rows(u, v), cfg));
}

Tensor jsd_mi_loss(const Tensor& scores_pos, const Tensor& scores_neg) {
  if (scores_pos.size() == 0 || scores_neg.size() == 0)
    throw std::invalid_argument("jsd_mi_loss: empty score set");
  Tensor pos_term = ops::mean_all(ops::softplus(ops::mul_scalar(scores_pos, -1.0)));
  Tensor neg_term = ops::mean_all(ops::softplus(scores_neg));
  return ops::add(pos_term, neg_term);
}

Tensor jsd_pair_loss(const Tensor& z, const SimilarityConfig& cfg) {
  check_paired_batch(z, "jsd_pair_loss");
  Tensor sp = clamp_similarity(ops::matmul_nt(z, z), cfg);
  return jsd_mi_loss(ops::partner_entries(sp), ops::offdiag_nonpartner_entries(sp));
}

Tensor entropy_regularizer(const Tensor& z, int p, bool squared) {
  if (z.rank() != 2)
    throw std::invalid_argument("entropy_regularizer: latents must be 2-D, got " +
                                shape_str(z.shape()));
  if (z.shape()[0] < 1) throw std::invalid_argument("entropy_regularizer: empty batch");
  if (p != 1 && p != 2)
    throw std::invalid_argument("entropy_regularizer: p must be 1 or 2, got " + std::to_string(p));
  Tensor per_row;
  if (p == 2 && squared) {
    per_row = ops::sql2_rows(z);
  } else {
    per_row = ops::pnorm_rows(z, p);
    if (p == 1 && squared) per_row = ops::mul(per_row, per_row);
  }
  return ops::mean_all(per_row);
}

namespace {
Tensor mi_loss(const Tensor& z, const SimilarityConfig& cfg, MiEstimator est) {
  return est == MiEstimator::nce ? nce_pair_loss(z, cfg) : jsd_pair_loss(z, cfg);
}
}  // namespace

LossResult total_loss_base(const Tensor& z, double beta, int p, bool squared,
                           const SimilarityConfig& cfg, MiEstimator est) {
  if (beta < 0.0) throw std::invalid_argument("total_loss_base: beta must be nonnegative");
  Tensor mi = mi_loss(z, cfg, est);
  Tensor ent = entropy_regularizer(z, p, squared);
  Tensor total = ops::add(mi, ops::mul_scalar(ent, beta));
  LossResult r;
  r.total = total;
  r.parts.nce = mi.item();
  r.parts.entropy = ent.item();
  r.parts.total = total.item();
  return r;
}

LossResult total_loss_extension(const Tensor& g, const Tensor& l, double beta, int p, bool squared,
                                const SimilarityConfig& cfg) {
  if (beta < 0.0) throw std::invalid_argument("total_loss_extension: beta must be nonnegative");
  check_paired_batch(g, "total_loss_extension");
  if (l.rank() != 3 || l.shape()[0] != g.shape()[0])
    throw std::invalid_argument("total_loss_extension: locals must be 2N x d x n matching globals, got " +
                                shape_str(l.shape()) + " vs " + shape_str(g.shape()));
  const std::size_t two_n = g.shape()[0];

  Tensor gvg = nce_pair_loss(g, cfg);
  // View-1 entries sit at even rows, view-2 at odd rows.
  Tensor g1 = ops::stride_rows(g, 0, 2);
  Tensor g2 = ops::stride_rows(g, 1, 2);
  const std::size_t d = l.shape()[1], n = l.shape()[2];
  Tensor g1m = ops::reshape(g1, {g1.shape()[0], d, 1});
  Tensor g2m = ops::reshape(g2, {g2.shape()[0], d, 1});
  Tensor l_flat3 = l;  // already N x d x n
  Tensor l1 = ops::reshape(ops::stride_rows(ops::reshape(l_flat3, {two_n, d * n}), 0, 2),
                           {two_n / 2, d, n});
  Tensor l2 = ops::reshape(ops::stride_rows(ops::reshape(l_flat3, {two_n, d * n}), 1, 2),
                           {two_n / 2, d, n});
  Tensor gvl = ops::mul_scalar(
      ops::add(nce_map_loss(g2m, l1, cfg), nce_map_loss(g1m, l2, cfg)), 0.5);

  // Entropy over global rows and flattened local entries: (1/2N) sum_i
  // (|g_i| + |l_i|).
  Tensor l_rows = ops::reshape(l, {two_n, d * n});
  Tensor per_row_g, per_row_l;
  if (p == 2 && squared) {
    per_row_g = ops::sql2_rows(g);
    per_row_l = ops::sql2_rows(l_rows);
  } else {
    per_row_g = ops::pnorm_rows(g, p);
    per_row_l = ops::pnorm_rows(l_rows, p);
  }
  Tensor ent = ops::mul_scalar(ops::sum_all(ops::add(per_row_g, per_row_l)),
                               1.0 / static_cast<double>(two_n));

  Tensor total = ops::add(ops::add(gvg, gvl), ops::mul_scalar(ent, beta));
  LossResult r;
  r.total = total;
  r.parts.gvg = gvg.item();
  r.parts.gvl = gvl.item();
  r.parts.nce = r.parts.gvg + r.parts.gvl;
  r.parts.entropy = ent.item();
  r.parts.total = total.item();
  return r;
}

}  // namespace imoc::estimators
