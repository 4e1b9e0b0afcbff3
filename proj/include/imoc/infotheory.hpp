#pragma once

#include <cstdint>
#include <vector>

#include "imoc/rng.hpp"

namespace imoc::infotheory {

// Exact finite joint distribution p(x, z) over small alphabets. Everything
// downstream is a direct double-loop sum in nats, so identities can be
// checked to near machine precision.
class DiscreteJoint {
 public:
  DiscreteJoint(std::size_t nx, std::size_t nz, std::vector<double> probs);

  std::size_t nx() const { return nx_; }
  std::size_t nz() const { return nz_; }
  double p(std::size_t x, std::size_t z) const { return p_[x * nz_ + z]; }

  std::vector<double> marginal_x() const;
  std::vector<double> marginal_z() const;
  // p(z | x); rows of zero-mass x are left all-zero.
  std::vector<double> conditional_z_given_x() const;

  // Strictly positive random table (renormalized positive draws).
  static DiscreteJoint random_positive(std::size_t nx, std::size_t nz, Rng& rng);

 private:
  std::size_t nx_, nz_;
  std::vector<double> p_;
};

// KL[p || q] in nats over same-length distributions; rejects p>0 where q=0,
// naming the offending index.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);
double kl_divergence(const DiscreteJoint& p, const DiscreteJoint& q);

double mutual_information(const DiscreteJoint& p);

enum class EntropyKind { MarginalZ, MarginalX, ConditionalZGivenX };
double entropy(const std::vector<double>& dist);
double entropy(const DiscreteJoint& p, EntropyKind kind);

// E_{p_n(x)}[ H(p_n(z|x), p_a(z|x)) ] = sum p_n(x,z) * (-ln p_a(z|x)).
double expected_conditional_cross_entropy(const DiscreteJoint& pn, const DiscreteJoint& pa);

// KL[pn(x,z)||pa(x,z)] minus the four-component expansion
//   I_n(x,z) - H_n(z) + E[H(pn(z|x),pa(z|x))] + KL[pn(x)||pa(x)];
// identically zero in exact arithmetic.
double decomposition_residual(const DiscreteJoint& pn, const DiscreteJoint& pa);

// Chain-rule residual: KL[pn(x,z)||pa(x,z)]
//   - KL[pn(x)||pa(x)] - E_{pn(x)}[KL[pn(z|x)||pa(z|x)]].
double chain_rule_residual(const DiscreteJoint& pn, const DiscreteJoint& pa);

struct LowerBoundCheck {
  // True iff pa(z|x) <= pn(z) and pa(z|x) <= 1 wherever pn(x,z) > 0.
  bool assumption_holds;
  // KL[pn(x,z)||pa(x,z)] - (I_n(x,z) - H_n(z)); nonnegative when the
  // assumption holds.
  double gap;
};
LowerBoundCheck lower_bound_check(const DiscreteJoint& pn, const DiscreteJoint& pa);

// Rejection-samples a (pn, pa) pair satisfying the lower-bound assumption:
// pn is supported on a random permutation diagonal, pa is strictly positive
// with suppressed diagonal mass. Retries until the check passes.
std::pair<DiscreteJoint, DiscreteJoint> sample_assumption_pair(std::size_t n, Rng& rng);

struct VerifyReport {
  std::size_t pairs = 0;
  double max_decomposition_residual = 0.0;
  double max_chain_rule_residual = 0.0;
  std::size_t assumption_pairs = 0;
  double min_gap = 0.0;
  bool pass = false;
};

// Runs the full randomized identity suite (decomposition, chain rule,
// lower-bound implication) at the stated tolerances.
VerifyReport verify_theory(std::size_t pairs, std::size_t max_alphabet, std::size_t assumption_pairs,
                           std::uint64_t seed);

}  // namespace imoc::infotheory
