#include "imoc/infotheory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace imoc::infotheory {

namespace {
constexpr double kSumTol = 1e-12;
constexpr std::size_t kMaxAlphabet = 64;
}  // namespace

DiscreteJoint::DiscreteJoint(std::size_t nx, std::size_t nz, std::vector<double> probs)
    : nx_(nx), nz_(nz), p_(std::move(probs)) {
  if (nx_ == 0 || nz_ == 0 || nx_ > kMaxAlphabet || nz_ > kMaxAlphabet)
    throw std::invalid_argument("DiscreteJoint: alphabet sizes must lie in [1,64], got " +
                                std::to_string(nx_) + "x" + std::to_string(nz_));
  if (p_.size() != nx_ * nz_)
    throw std::invalid_argument("DiscreteJoint: table size " + std::to_string(p_.size()) +
                                " does not match " + std::to_string(nx_) + "x" +
                                std::to_string(nz_));
  double sum = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!(p_[i] >= 0.0))
      throw std::invalid_argument("DiscreteJoint: negative entry at flat index " +
                                  std::to_string(i));
    sum += p_[i];
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw std::invalid_argument("DiscreteJoint: entries sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
}

std::vector<double> DiscreteJoint::marginal_x() const {
  std::vector<double> m(nx_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t z = 0; z < nz_; ++z) m[x] += p(x, z);
  return m;
}

std::vector<double> DiscreteJoint::marginal_z() const {
  std::vector<double> m(nz_, 0.0);
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t z = 0; z < nz_; ++z) m[z] += p(x, z);
  return m;
}

std::vector<double> DiscreteJoint::conditional_z_given_x() const {
  std::vector<double> c(nx_ * nz_, 0.0);
  const auto mx = marginal_x();
  for (std::size_t x = 0; x < nx_; ++x) {
    if (mx[x] <= 0.0) continue;
    for (std::size_t z = 0; z < nz_; ++z) c[x * nz_ + z] = p(x, z) / mx[x];
  }
  return c;
}

DiscreteJoint DiscreteJoint::random_positive(std::size_t nx, std::size_t nz, Rng& rng) {
  std::vector<double> t(nx * nz);
  double sum = 0.0;
  for (auto& v : t) {
    v = 0.05 + rng.uniform();  // bounded away from zero
    sum += v;
  }
  for (auto& v : t) v /= sum;
  return DiscreteJoint(nx, nz, std::move(t));
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch " + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;  // 0 ln 0 := 0
    if (q[i] <= 0.0)
      throw std::invalid_argument(
          "kl_divergence: absolute continuity violated (p>0, q=0) at flat index " +
          std::to_string(i));
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

double kl_divergence(const DiscreteJoint& p, const DiscreteJoint& q) {
  if (p.nx() != q.nx() || p.nz() != q.nz())
    throw std::invalid_argument("kl_divergence: alphabet mismatch");
  std::vector<double> pv, qv;
  pv.reserve(p.nx() * p.nz());
  qv.reserve(pv.capacity());
  for (std::size_t x = 0; x < p.nx(); ++x)
    for (std::size_t z = 0; z < p.nz(); ++z) {
      pv.push_back(p.p(x, z));
      qv.push_back(q.p(x, z));
    }
  return kl_divergence(pv, qv);
}

double mutual_information(const DiscreteJoint& p) {
  const auto mx = p.marginal_x();
  const auto mz = p.marginal_z();
  double acc = 0.0;
  for (std::size_t x = 0; x < p.nx(); ++x)
    for (std::size_t z = 0; z < p.nz(); ++z) {
      const double pxz = p.p(x, z);
      if (pxz <= 0.0) continue;
      acc += pxz * std::log(pxz / (mx[x] * mz[z]));
    }
  return acc;
}

double entropy(const std::vector<double>& dist) {
  double acc = 0.0;
  for (double v : dist)
    if (v > 0.0) acc -= v * std::log(v);
  return acc;
}

double entropy(const DiscreteJoint& p, EntropyKind kind) {
  switch (kind) {
    case EntropyKind::MarginalZ:
      return entropy(p.marginal_z());
    case EntropyKind::MarginalX:
      return entropy(p.marginal_x());
    case EntropyKind::ConditionalZGivenX: {
      // H(z|x) = sum_x p(x) H(p(z|x))
      const auto mx = p.marginal_x();
      const auto c = p.conditional_z_given_x();
      double acc = 0.0;
      for (std::size_t x = 0; x < p.nx(); ++x) {
        if (mx[x] <= 0.0) continue;
        for (std::size_t z = 0; z < p.nz(); ++z) {
          const double v = c[x * p.nz() + z];
          if (v > 0.0) acc -= mx[x] * v * std::log(v);
        }
      }
      return acc;
    }
  }
  throw std::logic_error("entropy: unknown kind");
}

double expected_conditional_cross_entropy(const DiscreteJoint& pn, const DiscreteJoint& pa) {
  if (pn.nx() != pa.nx() || pn.nz() != pa.nz())
    throw std::invalid_argument("expected_conditional_cross_entropy: alphabet mismatch");
  const auto ca = pa.conditional_z_given_x();
  double acc = 0.0;
  for (std::size_t x = 0; x < pn.nx(); ++x)
    for (std::size_t z = 0; z < pn.nz(); ++z) {
      const double pnxz = pn.p(x, z);
      if (pnxz <= 0.0) continue;
      const double caz = ca[x * pn.nz() + z];
      if (caz <= 0.0)
        throw std::invalid_argument(
            "expected_conditional_cross_entropy: support violation, pa(z|x)=0 at x=" +
            std::to_string(x) + " z=" + std::to_string(z));
      acc += pnxz * (-std::log(caz));
    }
  return acc;
}

double decomposition_residual(const DiscreteJoint& pn, const DiscreteJoint& pa) {
  const double kl_joint = kl_divergence(pn, pa);
  const double mi = mutual_information(pn);
  const double hz = entropy(pn, EntropyKind::MarginalZ);
  const double ce = expected_conditional_cross_entropy(pn, pa);
  const double kl_x = kl_divergence(pn.marginal_x(), pa.marginal_x());
  return kl_joint - (mi - hz + ce + kl_x);
}

double chain_rule_residual(const DiscreteJoint& pn, const DiscreteJoint& pa) {
  const double kl_joint = kl_divergence(pn, pa);
  const double kl_x = kl_divergence(pn.marginal_x(), pa.marginal_x());
  const auto mx = pn.marginal_x();
  const auto cn = pn.conditional_z_given_x();
  const auto ca = pa.conditional_z_given_x();
  double expected_cond_kl = 0.0;
  for (std::size_t x = 0; x < pn.nx(); ++x) {
    if (mx[x] <= 0.0) continue;
    for (std::size_t z = 0; z < pn.nz(); ++z) {
      const double pnz = cn[x * pn.nz() + z];
      if (pnz <= 0.0) continue;
      const double paz = ca[x * pn.nz() + z];
      if (paz <= 0.0)
        throw std::invalid_argument("chain_rule_residual: support violation at x=" +
                                    std::to_string(x) + " z=" + std::to_string(z));
      expected_cond_kl += mx[x] * pnz * std::log(pnz / paz);
    }
  }
  return kl_joint - kl_x - expected_cond_kl;
}

LowerBoundCheck lower_bound_check(const DiscreteJoint& pn, const DiscreteJoint& pa) {
  if (pn.nx() != pa.nx() || pn.nz() != pa.nz())
    throw std::invalid_argument("lower_bound_check: alphabet mismatch");
  const auto mz = pn.marginal_z();
  const auto ca = pa.conditional_z_given_x();
  bool holds = true;
  for (std::size_t x = 0; x < pn.nx() && holds; ++x)
    for (std::size_t z = 0; z < pn.nz(); ++z) {
      if (pn.p(x, z) <= 0.0) continue;
      const double caz = ca[x * pn.nz() + z];
      if (caz > mz[z] || caz > 1.0) {
        holds = false;
        break;
      }
    }
  const double gap = kl_divergence(pn, pa) -
                     (mutual_information(pn) - entropy(pn, EntropyKind::MarginalZ));
  return {holds, gap};
}

std::pair<DiscreteJoint, DiscreteJoint> sample_assumption_pair(std::size_t n, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    // pn: mass on (x, perm(x)) only.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> diag(n);
    double s = 0.0;
    for (auto& v : diag) {
      v = 0.2 + rng.uniform();
      s += v;
    }
    std::vector<double> pn_t(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) pn_t[x * n + perm[x]] = diag[x] / s;
    // pa: strictly positive, with the pn-support cells drawn small so the
    // pointwise condition has a real chance.
    std::vector<double> pa_t(n * n);
    for (std::size_t x = 0; x < n; ++x) {
      double rs = 0.0;
      for (std::size_t z = 0; z < n; ++z) {
        double v = (z == perm[x]) ? 0.01 + 0.05 * rng.uniform() : 0.2 + rng.uniform();
        pa_t[x * n + z] = v;
        rs += v;
      }
      // Make rows a conditional, then weight by a positive x-marginal below.
      for (std::size_t z = 0; z < n; ++z) pa_t[x * n + z] /= rs;
    }
    std::vector<double> pax(n);
    double xs = 0.0;
    for (auto& v : pax) {
      v = 0.2 + rng.uniform();
      xs += v;
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t z = 0; z < n; ++z) pa_t[x * n + z] *= pax[x] / xs;

    DiscreteJoint pn(n, n, std::move(pn_t));
    DiscreteJoint pa(n, n, std::move(pa_t));
    if (lower_bound_check(pn, pa).assumption_holds) return {std::move(pn), std::move(pa)};
  }
  throw std::runtime_error("sample_assumption_pair: rejection sampling failed to converge");
}

VerifyReport verify_theory(std::size_t pairs, std::size_t max_alphabet,
                           std::size_t assumption_pairs, std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0x1274BDCULL));
  VerifyReport rep;
  rep.pairs = pairs;
  rep.assumption_pairs = assumption_pairs;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t nx = 2 + rng.below(max_alphabet - 1);
    const std::size_t nz = 2 + rng.below(max_alphabet - 1);
    auto pn = DiscreteJoint::random_positive(nx, nz, rng);
    auto pa = DiscreteJoint::random_positive(nx, nz, rng);
    rep.max_decomposition_residual =
        std::max(rep.max_decomposition_residual, std::abs(decomposition_residual(pn, pa)));
    rep.max_chain_rule_residual =
        std::max(rep.max_chain_rule_residual, std::abs(chain_rule_residual(pn, pa)));
  }
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < assumption_pairs; ++i) {
    const std::size_t n = 3 + rng.below(max_alphabet - 2);
    auto [pn, pa] = sample_assumption_pair(n, rng);
    rep.min_gap = std::min(rep.min_gap, lower_bound_check(pn, pa).gap);
  }
  rep.pass = rep.max_decomposition_residual < 1e-10 && rep.max_chain_rule_residual < 1e-12 &&
             rep.min_gap >= -1e-12;
  return rep;
}

}  // namespace imoc::infotheory
