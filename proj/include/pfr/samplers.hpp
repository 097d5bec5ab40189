#ifndef PFR_SAMPLERS_HPP
#define PFR_SAMPLERS_HPP

#include "pfr/core.hpp"
#include "pfr/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace pfr {

/// The eight method instantiations. Each fixes a distribution over the
/// sampling quadruple (S1, S2, T1, T2) with E[T1 T2ᵀ Aᵀ S1 S2ᵀ] = Aᵀ/‖A‖_F².
enum class SamplerKind {
  RK,    // randomized Kaczmarz: one row, ∝ ‖a_j‖²
  RGS,   // randomized Gauss–Seidel / coordinate descent: one column, ∝ ‖A_i‖²
  DSGS,  // doubly stochastic Gauss–Seidel: one entry, ∝ a_ij²
  RBK,   // randomized block Kaczmarz: uniform p-subset of rows
  RBCD,  // randomized block coordinate descent: uniform s-subset of columns
  BGK,   // block Gaussian Kaczmarz: m×p Gaussian row sketch
  BGLS,  // block Gaussian least squares: n×s Gaussian column sketch
  SGC,   // symmetric Gaussian coordinate: entry ∝ a_ij² plus Gaussian η
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::RK;
  Index block = 0;  // p for RBK/BGK, s for RBCD/BGLS; ignored otherwise

  static SamplerSpec rk() { return {SamplerKind::RK, 0}; }
  static SamplerSpec rgs() { return {SamplerKind::RGS, 0}; }
  static SamplerSpec dsgs() { return {SamplerKind::DSGS, 0}; }
  static SamplerSpec rbk(Index p) { return {SamplerKind::RBK, p}; }
  static SamplerSpec rbcd(Index s) { return {SamplerKind::RBCD, s}; }
  static SamplerSpec bgk(Index p) { return {SamplerKind::BGK, p}; }
  static SamplerSpec bgls(Index s) { return {SamplerKind::BGLS, s}; }
  static SamplerSpec sgc() { return {SamplerKind::SGC, 0}; }

  bool uses_block() const;
  /// Throws DomainError if the spec does not fit the system.
  void validate(const LinearSystem& system) const;
};

std::string to_string(SamplerKind kind);
std::string to_string(const SamplerSpec& spec);
/// Accepts "rk", "mRK", "RBK" and so on (case-insensitive, optional leading m).
SamplerKind parse_sampler_kind(const std::string& name);
const std::vector<SamplerKind>& all_sampler_kinds();

struct RowDraw {
  Index row;
};
struct ColumnDraw {
  Index col;
};
struct EntryDraw {
  Index row;
  Index col;
};
struct RowBlockDraw {
  std::vector<Index> rows;
};
struct ColumnBlockDraw {
  std::vector<Index> cols;
};
struct GaussianRowSketch {
  DenseMatrix s;  // m×p
};
struct GaussianColumnSketch {
  DenseMatrix t;  // n×s
};
struct SymmetricGaussianDraw {
  Index row;  // i: coordinate that moves
  Index col;  // j: residual entry that drives the move
  Vector eta;
};

using SampleRealization = std::variant<RowDraw, ColumnDraw, EntryDraw, RowBlockDraw, ColumnBlockDraw,
                                       GaussianRowSketch, GaussianColumnSketch, SymmetricGaussianDraw>;

/// d = T1 T2ᵀ Aᵀ S1 S2ᵀ (A x − b) for one realization. `support` lists the
/// coordinates of d that may be nonzero when `sparse_support` is set.
struct UpdateDirection {
  Vector d;
  std::vector<Index> support;
  bool sparse_support = false;
};

/// A sampler bound to one system: the probability tables are built once and
/// shared read-only; all randomness comes from the caller's stream.
class Sampler {
 public:
  Sampler(SamplerSpec spec, LinearSystem system);

  const SamplerSpec& spec() const { return spec_; }
  const LinearSystem& system() const { return system_; }

  /// The direction needs every entry of A x − b (RGS, RBCD, BGK, BGLS).
  bool needs_full_residual() const;
  /// T1 T2ᵀ is a multiple of the identity, so directions stay in Range(Aᵀ).
  bool is_row_action() const;

  SampleRealization draw(RandomStream& rng) const;
  /// Same draw as above, reusing the storage already held by `out`.
  void draw(RandomStream& rng, SampleRealization& out) const;

  UpdateDirection update_direction(const SampleRealization& sample, const Vector& x) const;
  /// `residual` may be null; if given it must equal A x − b.
  void update_direction(const SampleRealization& sample, const Vector& x, const Vector* residual,
                        UpdateDirection& out) const;

  /// T1 T2ᵀ Aᵀ S1 S2ᵀ r for an arbitrary m-vector r.
  Vector apply(const SampleRealization& sample, const Vector& r) const;

  bool has_finite_support() const;
  /// Number of outcomes (saturates at UINT64_MAX); throws for Gaussian kinds.
  std::uint64_t support_size() const;
  /// Visits every outcome with its probability. Throws UnsupportedError for
  /// Gaussian kinds and CapacityError when the support exceeds `cap`.
  void for_each_outcome(const std::function<void(double, const SampleRealization&)>& visit,
                        std::uint64_t cap = 1'000'000) const;

  /// Copy whose row-selection weights are replaced (RK only). Exists so the
  /// verification suite can run a negative control with a broken distribution.
  Sampler with_row_weights(const Vector& weights) const;

 private:
  struct Categorical {
    std::vector<double> cumulative;
    double total = 0.0;
    Index pick(double u) const;
    double probability(Index i) const;
  };

  void build_tables();
  Index draw_subset_member_count() const;
  void draw_subset(RandomStream& rng, Index universe, Index count, std::vector<Index>& out) const;

  SamplerSpec spec_;
  LinearSystem system_;
  Vector row_sq_;
  Vector col_sq_;
  Categorical rows_;
  Categorical cols_;
  Categorical entries_;
  std::vector<Index> entry_row_;
  std::vector<Index> entry_col_;
  double trace_ = 0.0;
};

SampleRealization draw(const SamplerSpec& spec, const LinearSystem& system, RandomStream& rng);
UpdateDirection update_direction(const SampleRealization& sample, const SamplerSpec& spec,
                                 const LinearSystem& system, const Vector& x);

/// Σ_outcomes P(outcome) · T1 T2ᵀ Aᵀ S1 S2ᵀ, computed by enumeration (n×m).
DenseMatrix exact_update_operator(const Sampler& sampler, std::uint64_t cap = 1'000'000);
DenseMatrix exact_update_operator(const SamplerSpec& spec, const LinearSystem& system,
                                  std::uint64_t cap = 1'000'000);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace pfr

#endif  // PFR_SAMPLERS_HPP
