#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mmkit/engine.hpp"
#include "mmkit/linalg.hpp"
#include "mmkit/types.hpp"

namespace mmkit::counterexamples {

// ---------------------------------------------------------------------------
// Bivariate-normal EM oscillation

/// sigma2 > 0, |rho| < 1.
struct VaidaState {
  double sigma2 = 1.0;
  double rho = 0.0;

  void validate() const;
  Vector to_vector() const;
  static VaidaState from_vector(const Vector& v);
};

enum class SignRule { Alternating, PositiveBranch };

/// f = 8 log s + 18/s + 2 log(1 - rho^2) + 4 / (s (1 - rho^2)), s = sigma2.
/// Even in rho; minima at (3, +-1/sqrt(3)).
double vaida_objective(const VaidaState& s);

/// g(.|s_n) = f + 2 (log(u/u_n) + u_n/u - 1), u = sigma2 (1 - rho^2).
/// The added term is >= 0 and vanishes at u = u_n.
double vaida_surrogate(const VaidaState& x, const VaidaState& anchor);

/// sigma2 <- 3, rho <- +-sqrt(2/3 - sigma2_n (1 - rho_n^2) / 6). Both signs
/// minimize the surrogate; `rule` picks one (sgn(0) = +1). Throws Domain on a
/// negative radicand.
VaidaState vaida_step(const VaidaState& s, SignRule rule);

/// vaida_objective over R^2 vectors (sigma2, rho); +inf off the domain.
ObjectiveFunction vaida_function();
FactoryPtr vaida_factory(SignRule rule);

// ---------------------------------------------------------------------------
// MAXDIFF block relaxation

/// Data blocks A_i (n x d_i) sharing a row count; r <= min d_i.
struct MaxdiffProblem {
  std::vector<Matrix> data_blocks;
  std::size_t block_rank = 1;

  void validate() const;
  std::size_t blocks() const { return data_blocks.size(); }
  Matrix cross(std::size_t i, std::size_t j) const;  // A_i^T A_j
};

/// O_i (d_i x r) with orthonormal columns.
struct StiefelBlockSet {
  std::vector<Matrix> blocks;

  bool is_feasible(double tol = 1e-10) const;
  void validate(double tol = 1e-10) const;
};

/// sum_{i<j} tr(O_i^T A_i^T A_j O_j)
double maxdiff_objective(const MaxdiffProblem& p, const StiefelBlockSet& s);

/// Branch choice for block `block` during sweep `sweep` given the current
/// (partially updated) blocks.
using BlockPolicy = std::function<linalg::BranchPolicy(
    std::size_t sweep, std::size_t block, const StiefelBlockSet& current)>;

BlockPolicy canonical_policy();

/// Maximizes tr(O_i^T (B + viscosity O_i)) with B = sum_{j != i} A_i^T A_j O_j
/// and returns the updated set. Since ||O_i||_F^2 = r on the Stiefel manifold,
/// this equals adding -(viscosity/2)||O_i - O_i^current||_F^2 to the objective.
StiefelBlockSet tenberge_block_update(const MaxdiffProblem& p, const StiefelBlockSet& s,
                                      std::size_t block, const linalg::BranchPolicy& policy,
                                      double viscosity = 0.0);

/// Blocks 1..m in order, each seeing the already updated earlier blocks.
StiefelBlockSet tenberge_sweep(const MaxdiffProblem& p, const StiefelBlockSet& s,
                               const BlockPolicy& policy, std::size_t sweep = 0,
                               double viscosity = 0.0);

struct TenBergeInstance {
  MaxdiffProblem problem;
  StiefelBlockSet initial;  // (J, K, J)
};

/// d_i = 3, r = 2, A_1 = [I, I, 0]^T, A_2 = [-I, 0, I]^T, A_3 = [0, I, I]^T.
TenBergeInstance build_tenberge_instance();

Matrix tenberge_j();
Matrix tenberge_k();

/// (J,K,J), (-K,J,-K), (-J,-K,-J), (K,-J,K).
std::array<StiefelBlockSet, 4> tenberge_cycle_states();

/// On sweep k, block i targets block i of cycle state (k+1) mod 4 through
/// NearestBranch. Meaningful from the initializer (J, K, J).
BlockPolicy tenberge_cycling_policy();

Vector vectorize(const StiefelBlockSet& s);
StiefelBlockSet unvectorize(const Vector& v, const MaxdiffProblem& p);

/// -maxdiff on the product of Stiefel manifolds (tolerance 1e-8); +inf elsewhere.
ObjectiveFunction maxdiff_minimization_objective(const MaxdiffProblem& p);

/// One engine iteration per block update; sweep_length() = m. The surrogate at
/// iteration n frees block n mod m: it equals -maxdiff on that slice and +inf
/// off it, so it majorizes -maxdiff with equality at the anchor.
FactoryPtr tenberge_factory(const MaxdiffProblem& p, BlockPolicy policy);

/// Haar-distributed d x r matrix with orthonormal columns.
Matrix random_stiefel(std::size_t d, std::size_t r, std::mt19937_64& rng);

struct SearchResult {
  StiefelBlockSet best;
  double best_value = 0.0;
  std::size_t draws = 0;
};

SearchResult random_search_maxdiff(const MaxdiffProblem& p, std::size_t draws,
                                   std::uint64_t seed);

}  // namespace mmkit::counterexamples
