#include "mmkit/counterexamples.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mmkit/errors.hpp"

namespace mmkit::counterexamples {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasibleTol = 1e-8;

bool vaida_in_domain(const Vector& v) {
  return v.size() == 2 && std::isfinite(v(0)) && std::isfinite(v(1)) && v(0) > 0.0 &&
         std::abs(v(1)) < 1.0;
}

class VaidaSurrogate final : public Surrogate {
 public:
  VaidaSurrogate(const Vector& anchor, SignRule rule) : Surrogate(anchor), rule_(rule) {}

  double eval(const Vector& x) const override {
    if (!vaida_in_domain(x)) return kInf;
    return vaida_surrogate(VaidaState::from_vector(x), VaidaState::from_vector(anchor()));
  }
  Vector minimize() const override {
    return vaida_step(VaidaState::from_vector(anchor()), rule_).to_vector();
  }

 private:
  SignRule rule_;
};

class VaidaFactory final : public SurrogateFactory {
 public:
  explicit VaidaFactory(SignRule rule) : rule_(rule) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t) const override {
    require(vaida_in_domain(anchor), ErrorKind::Domain, "vaida surrogate: anchor off domain");
    return std::make_unique<VaidaSurrogate>(anchor, rule_);
  }

  std::vector<Vector> dominance_samples(const Vector&, std::size_t, std::mt19937_64& rng,
                                        std::size_t count) const override {
    std::uniform_real_distribution<double> s(0.2, 8.0);
    std::uniform_real_distribution<double> r(-0.99, 0.99);
    std::vector<Vector> out;
    for (std::size_t k = 0; k < count; ++k) {
      const double sigma2 = s(rng);
      out.push_back(Vector{{sigma2, r(rng)}});
    }
    return out;
  }

 private:
  SignRule rule_;
};

std::size_t total_size(const MaxdiffProblem& p) {
  std::size_t n = 0;
  for (const Matrix& a : p.data_blocks) n += static_cast<std::size_t>(a.cols()) * p.block_rank;
  return n;
}

bool same_outside_block(const Vector& x, const Vector& anchor, const MaxdiffProblem& p,
                        std::size_t block) {
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < p.blocks(); ++i) {
    const Eigen::Index len = p.data_blocks[i].cols() * static_cast<Eigen::Index>(p.block_rank);
    if (i != block && x.segment(offset, len) != anchor.segment(offset, len)) return false;
    offset += len;
  }
  return true;
}

class TenBergeSurrogate final : public Surrogate {
 public:
  TenBergeSurrogate(const Vector& anchor, const MaxdiffProblem& p, const BlockPolicy& policy,
                    std::size_t sweep, std::size_t block)
      : Surrogate(anchor), problem_(p), policy_(policy), sweep_(sweep), block_(block) {}

  double eval(const Vector& x) const override {
    if (x.size() != anchor().size() || !same_outside_block(x, anchor(), problem_, block_)) {
      return kInf;
    }
    const StiefelBlockSet s = unvectorize(x, problem_);
    if (!linalg::has_orthonormal_columns(s.blocks[block_], kFeasibleTol)) return kInf;
    return -maxdiff_objective(problem_, s);
  }

  Vector minimize() const override { return minimize_with_penalty(0.0); }

  Vector minimize_with_penalty(double rho) const override {
    const StiefelBlockSet s = unvectorize(anchor(), problem_);
    const linalg::BranchPolicy branch = policy_(sweep_, block_, s);
    return vectorize(tenberge_block_update(problem_, s, block_, branch, rho));
  }

 private:
  const MaxdiffProblem& problem_;
  const BlockPolicy& policy_;
  std::size_t sweep_;
  std::size_t block_;
};

class TenBergeFactory final : public SurrogateFactory {
 public:
  TenBergeFactory(MaxdiffProblem p, BlockPolicy policy)
      : problem_(std::move(p)), policy_(std::move(policy)) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t iteration) const override {
    const std::size_t m = problem_.blocks();
    return std::make_unique<TenBergeSurrogate>(anchor, problem_, policy_, iteration / m,
                                               iteration % m);
  }

  std::size_t sweep_length() const override { return problem_.blocks(); }

  // Half the samples move only the active block; the rest are arbitrary
  // feasible sets (where the surrogate is +inf).
  std::vector<Vector> dominance_samples(const Vector& anchor, std::size_t iteration,
                                        std::mt19937_64& rng,
                                        std::size_t count) const override {
    const std::size_t m = problem_.blocks();
    const std::size_t r = problem_.block_rank;
    std::vector<Vector> out;
    for (std::size_t k = 0; k < count; ++k) {
      StiefelBlockSet s = unvectorize(anchor, problem_);
      for (std::size_t i = 0; i < m; ++i) {
        if (i == iteration % m || k % 2 == 1) {
          s.blocks[i] = random_stiefel(static_cast<std::size_t>(s.blocks[i].rows()), r, rng);
        }
      }
      out.push_back(vectorize(s));
    }
    return out;
  }

 private:
  MaxdiffProblem problem_;
  BlockPolicy policy_;
};

}  // namespace

void VaidaState::validate() const {
  require(std::isfinite(sigma2) && sigma2 > 0.0, ErrorKind::Domain,
          "vaida state: sigma2 must be positive");
  require(std::isfinite(rho) && std::abs(rho) < 1.0, ErrorKind::Domain,
          "vaida state: |rho| must be below 1");
}

Vector VaidaState::to_vector() const { return Vector{{sigma2, rho}}; }

VaidaState VaidaState::from_vector(const Vector& v) {
  require(v.size() == 2, ErrorKind::Shape, "vaida state: expected (sigma2, rho)");
  return {v(0), v(1)};
}

double vaida_objective(const VaidaState& s) {
  s.validate();
  const double t = 1.0 - s.rho * s.rho;
  return 8.0 * std::log(s.sigma2) + 18.0 / s.sigma2 + 2.0 * std::log(t) +
         4.0 / (s.sigma2 * t);
}

double vaida_surrogate(const VaidaState& x, const VaidaState& anchor) {
  anchor.validate();
  const double u = x.sigma2 * (1.0 - x.rho * x.rho);
  const double u_n = anchor.sigma2 * (1.0 - anchor.rho * anchor.rho);
  return vaida_objective(x) + 2.0 * (std::log(u / u_n) + u_n / u - 1.0);
}

VaidaState vaida_step(const VaidaState& s, SignRule rule) {
  s.validate();
  const double radicand = 2.0 / 3.0 - s.sigma2 * (1.0 - s.rho * s.rho) / 6.0;
  require(radicand >= 0.0, ErrorKind::Domain, "vaida_step: negative radicand");
  const double root = std::sqrt(radicand);
  double sign = 1.0;
  if (rule == SignRule::Alternating) sign = s.rho >= 0.0 ? -1.0 : 1.0;
  return {3.0, sign * root};
}

ObjectiveFunction vaida_function() {
  ObjectiveFunction f;
  f.eval = [](const Vector& v) {
    return vaida_in_domain(v) ? vaida_objective(VaidaState::from_vector(v)) : kInf;
  };
  f.in_domain = vaida_in_domain;
  return f;
}

FactoryPtr vaida_factory(SignRule rule) { return std::make_shared<VaidaFactory>(rule); }

void MaxdiffProblem::validate() const {
  require(!data_blocks.empty(), ErrorKind::Shape, "maxdiff: no data blocks");
  require(block_rank >= 1, ErrorKind::Shape, "maxdiff: block rank must be >= 1");
  const Eigen::Index rows = data_blocks.front().rows();
  for (const Matrix& a : data_blocks) {
    require(a.rows() == rows, ErrorKind::Shape, "maxdiff: blocks must share a row count");
    require(static_cast<std::size_t>(a.cols()) >= block_rank, ErrorKind::Shape,
            "maxdiff: block rank exceeds a block dimension");
    require_finite(a, "maxdiff data block");
  }
}

Matrix MaxdiffProblem::cross(std::size_t i, std::size_t j) const {
  return data_blocks.at(i).transpose() * data_blocks.at(j);
}

bool StiefelBlockSet::is_feasible(double tol) const {
  for (const Matrix& o : blocks) {
    if (!linalg::has_orthonormal_columns(o, tol)) return false;
  }
  return true;
}

void StiefelBlockSet::validate(double tol) const {
  require(is_feasible(tol), ErrorKind::InvalidInput,
          "block set: every block must have orthonormal columns");
}

namespace {

void check_shapes(const MaxdiffProblem& p, const StiefelBlockSet& s) {
  require(s.blocks.size() == p.blocks(), ErrorKind::Shape,
          "maxdiff: block count does not match the problem");
  for (std::size_t i = 0; i < p.blocks(); ++i) {
    require(s.blocks[i].rows() == p.data_blocks[i].cols() &&
                static_cast<std::size_t>(s.blocks[i].cols()) == p.block_rank,
            ErrorKind::Shape, "maxdiff: block " + std::to_string(i) + " has the wrong shape");
  }
}

}  // namespace

double maxdiff_objective(const MaxdiffProblem& p, const StiefelBlockSet& s) {
  check_shapes(p, s);
  double total = 0.0;
  for (std::size_t i = 0; i < p.blocks(); ++i) {
    for (std::size_t j = i + 1; j < p.blocks(); ++j) {
      total += (s.blocks[i].transpose() * p.cross(i, j) * s.blocks[j]).trace();
    }
  }
  return total;
}

BlockPolicy canonical_policy() {
  return [](std::size_t, std::size_t, const StiefelBlockSet&) -> linalg::BranchPolicy {
    return linalg::CanonicalBranch{};
  };
}

StiefelBlockSet tenberge_block_update(const MaxdiffProblem& p, const StiefelBlockSet& s,
                                      std::size_t block, const linalg::BranchPolicy& policy,
                                      double viscosity) {
  check_shapes(p, s);
  require(block < p.blocks(), ErrorKind::InvalidParameter, "tenberge: block index out of range");
  require(std::isfinite(viscosity) && viscosity >= 0.0, ErrorKind::InvalidParameter,
          "tenberge: viscosity must be >= 0");
  Matrix b = viscosity * s.blocks[block];
  for (std::size_t j = 0; j < p.blocks(); ++j) {
    if (j != block) b += p.cross(block, j) * s.blocks[j];
  }
  StiefelBlockSet next = s;
  next.blocks[block] = linalg::select_maximizer(linalg::trace_maximizer_set(b), policy);
  return next;
}

StiefelBlockSet tenberge_sweep(const MaxdiffProblem& p, const StiefelBlockSet& s,
                               const BlockPolicy& policy, std::size_t sweep,
                               double viscosity) {
  StiefelBlockSet current = s;
  for (std::size_t i = 0; i < p.blocks(); ++i) {
    current = tenberge_block_update(p, current, i, policy(sweep, i, current), viscosity);
  }
  return current;
}

Matrix tenberge_j() { return Matrix{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}; }

Matrix tenberge_k() { return Matrix{{0.0, 1.0}, {1.0, 0.0}, {0.0, 0.0}}; }

TenBergeInstance build_tenberge_instance() {
  const Matrix eye = Matrix::Identity(3, 3);
  const Matrix zero = Matrix::Zero(3, 3);
  Matrix a1(9, 3), a2(9, 3), a3(9, 3);
  a1 << eye, eye, zero;
  a2 << -eye, zero, eye;
  a3 << zero, eye, eye;
  TenBergeInstance inst;
  inst.problem.data_blocks = {a1, a2, a3};
  inst.problem.block_rank = 2;
  inst.initial.blocks = {tenberge_j(), tenberge_k(), tenberge_j()};
  return inst;
}

std::array<StiefelBlockSet, 4> tenberge_cycle_states() {
  const Matrix j = tenberge_j();
  const Matrix k = tenberge_k();
  return {StiefelBlockSet{{j, k, j}}, StiefelBlockSet{{-k, j, -k}},
          StiefelBlockSet{{-j, -k, -j}}, StiefelBlockSet{{k, -j, k}}};
}

BlockPolicy tenberge_cycling_policy() {
  const auto states = tenberge_cycle_states();
  return [states](std::size_t sweep, std::size_t block,
                  const StiefelBlockSet&) -> linalg::BranchPolicy {
    return linalg::NearestBranch{states[(sweep + 1) % 4].blocks.at(block)};
  };
}

Vector vectorize(const StiefelBlockSet& s) {
  Eigen::Index n = 0;
  for (const Matrix& o : s.blocks) n += o.size();
  Vector v(n);
  Eigen::Index offset = 0;
  for (const Matrix& o : s.blocks) {
    v.segment(offset, o.size()) = o.reshaped();
    offset += o.size();
  }
  return v;
}

StiefelBlockSet unvectorize(const Vector& v, const MaxdiffProblem& p) {
  require(static_cast<std::size_t>(v.size()) == total_size(p), ErrorKind::Shape,
          "unvectorize: length does not match the problem");
  StiefelBlockSet s;
  const Eigen::Index r = static_cast<Eigen::Index>(p.block_rank);
  Eigen::Index offset = 0;
  for (const Matrix& a : p.data_blocks) {
    const Eigen::Index d = a.cols();
    s.blocks.push_back(v.segment(offset, d * r).reshaped(d, r));
    offset += d * r;
  }
  return s;
}

ObjectiveFunction maxdiff_minimization_objective(const MaxdiffProblem& p) {
  p.validate();
  ObjectiveFunction f;
  auto feasible = [p](const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != total_size(p) || !v.allFinite()) return false;
    return unvectorize(v, p).is_feasible(kFeasibleTol);
  };
  f.eval = [p, feasible](const Vector& v) {
    return feasible(v) ? -maxdiff_objective(p, unvectorize(v, p)) : kInf;
  };
  f.in_domain = feasible;
  return f;
}

FactoryPtr tenberge_factory(const MaxdiffProblem& p, BlockPolicy policy) {
  p.validate();
  require(static_cast<bool>(policy), ErrorKind::InvalidParameter, "tenberge: empty policy");
  return std::make_shared<TenBergeFactory>(p, std::move(policy));
}

Matrix random_stiefel(std::size_t d, std::size_t r, std::mt19937_64& rng) {
  require(r <= d, ErrorKind::Shape, "random_stiefel: r must not exceed d");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, r);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  // fix column signs by diag(R) so the distribution is Haar
  const Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (rr(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

SearchResult random_search_maxdiff(const MaxdiffProblem& p, std::size_t draws,
                                   std::uint64_t seed) {
  p.validate();
  std::mt19937_64 rng(seed);
  SearchResult result;
  result.best_value = -kInf;
  for (std::size_t k = 0; k < draws; ++k) {
    StiefelBlockSet s;
    for (const Matrix& a : p.data_blocks) {
      s.blocks.push_back(random_stiefel(static_cast<std::size_t>(a.cols()), p.block_rank, rng));
    }
    const double value = maxdiff_objective(p, s);
    if (value > result.best_value) {
      result.best_value = value;
      result.best = std::move(s);
    }
    ++result.draws;
  }
  return result;
}

}  // namespace mmkit::counterexamples
