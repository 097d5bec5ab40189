#include "pfr/samplers.hpp"

#include "pfr/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace pfr {

namespace {

bool is_gaussian(SamplerKind kind) {
  return kind == SamplerKind::BGK || kind == SamplerKind::BGLS || kind == SamplerKind::SGC;
}

// Next k-combination of [0, n) in lexicographic order; false after the last.
bool next_combination(std::vector<Index>& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  Index i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

}  // namespace

bool SamplerSpec::uses_block() const {
  return kind == SamplerKind::RBK || kind == SamplerKind::BGK || kind == SamplerKind::RBCD ||
         kind == SamplerKind::BGLS;
}

void SamplerSpec::validate(const LinearSystem& system) const {
  const Index m = system.m();
  const Index n = system.n();
  switch (kind) {
    case SamplerKind::RBK:
    case SamplerKind::BGK:
      if (block < 1 || block > m)
        throw DomainError(to_string(kind) + " block size p=" + std::to_string(block) + " must lie in [1, " +
                          std::to_string(m) + "]");
      break;
    case SamplerKind::RBCD:
    case SamplerKind::BGLS:
      if (block < 1 || block > n)
        throw DomainError(to_string(kind) + " block size s=" + std::to_string(block) + " must lie in [1, " +
                          std::to_string(n) + "]");
      break;
    case SamplerKind::SGC: {
      if (m != n) throw DomainError("SGC needs a square matrix");
      const CoefficientMatrix& a = system.a();
      const double scale = std::sqrt(system.frobenius_squared());
      double asym = 0.0;
      a.for_each_nonzero([&](Index i, Index j, double v) { asym = std::max(asym, std::abs(v - a.coeff(j, i))); });
      if (asym > 1e-12 * scale) throw DomainError("SGC needs a symmetric matrix");
      if (!(std::abs(a.trace()) > 1e-12 * scale)) throw DomainError("SGC needs a nonzero trace");
      break;
    }
    default:
      break;
  }
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::RK: return "RK";
    case SamplerKind::RGS: return "RGS";
    case SamplerKind::DSGS: return "DSGS";
    case SamplerKind::RBK: return "RBK";
    case SamplerKind::RBCD: return "RBCD";
    case SamplerKind::BGK: return "BGK";
    case SamplerKind::BGLS: return "BGLS";
    case SamplerKind::SGC: return "SGC";
  }
  return "?";
}

std::string to_string(const SamplerSpec& spec) {
  std::string s = to_string(spec.kind);
  if (spec.uses_block()) s += "(" + std::to_string(spec.block) + ")";
  return s;
}

SamplerKind parse_sampler_kind(const std::string& name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (key.size() > 1 && name[0] == 'm') key.erase(0, 1);
  for (SamplerKind k : all_sampler_kinds())
    if (to_string(k) == key) return k;
  throw DomainError("unknown method '" + name + "'");
}

const std::vector<SamplerKind>& all_sampler_kinds() {
  static const std::vector<SamplerKind> kinds = {SamplerKind::RK,   SamplerKind::RGS, SamplerKind::DSGS,
                                                 SamplerKind::RBK,  SamplerKind::RBCD, SamplerKind::BGK,
                                                 SamplerKind::BGLS, SamplerKind::SGC};
  return kinds;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

Index Sampler::Categorical::pick(double u) const {
  const double target = u * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  Index i = static_cast<Index>(it - cumulative.begin());
  if (i < static_cast<Index>(cumulative.size())) return i;
  // u·total rounded up to total: fall back to the last slot with weight
  i = static_cast<Index>(cumulative.size()) - 1;
  while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
  return i;
}

double Sampler::Categorical::probability(Index i) const {
  const double lo = i == 0 ? 0.0 : cumulative[i - 1];
  return (cumulative[i] - lo) / total;
}

namespace {

void fill_cumulative(const Vector& w, std::vector<double>& cumulative, double& total) {
  cumulative.resize(w.size());
  double s = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DomainError("sampling weights must be finite and nonnegative");
    s += w[i];
    cumulative[i] = s;
  }
  total = s;
}

}  // namespace

Sampler::Sampler(SamplerSpec spec, LinearSystem system) : spec_(spec), system_(std::move(system)) {
  spec_.validate(system_);
  build_tables();
}

void Sampler::build_tables() {
  const CoefficientMatrix& a = system_.a();
  row_sq_ = a.row_squared_norms();
  col_sq_ = a.column_squared_norms();
  switch (spec_.kind) {
    case SamplerKind::RK:
      fill_cumulative(row_sq_, rows_.cumulative, rows_.total);
      break;
    case SamplerKind::RGS:
      fill_cumulative(col_sq_, cols_.cumulative, cols_.total);
      break;
    case SamplerKind::DSGS:
    case SamplerKind::SGC: {
      std::vector<double> w;
      a.for_each_nonzero([&](Index i, Index j, double v) {
        entry_row_.push_back(i);
        entry_col_.push_back(j);
        w.push_back(v * v);
      });
      fill_cumulative(Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size())), entries_.cumulative,
                      entries_.total);
      trace_ = a.trace();
      break;
    }
    default:
      break;
  }
}

bool Sampler::needs_full_residual() const {
  return spec_.kind == SamplerKind::RGS || spec_.kind == SamplerKind::RBCD || spec_.kind == SamplerKind::BGK ||
         spec_.kind == SamplerKind::BGLS;
}

bool Sampler::is_row_action() const {
  return spec_.kind == SamplerKind::RK || spec_.kind == SamplerKind::RBK || spec_.kind == SamplerKind::BGK;
}

void Sampler::draw_subset(RandomStream& rng, Index universe, Index count, std::vector<Index>& out) const {
  out.resize(count);
  if (count == universe) {
    std::iota(out.begin(), out.end(), Index{0});
    return;
  }
  // Partial Fisher–Yates over the identity array; displaced slots are kept in
  // a small map so the cost stays O(count²) rather than O(universe).
  std::vector<std::pair<Index, Index>> moved;
  moved.reserve(2 * count);
  auto value_at = [&](Index pos) {
    for (const auto& [p, v] : moved)
      if (p == pos) return v;
    return pos;
  };
  auto set_at = [&](Index pos, Index v) {
    for (auto& pv : moved)
      if (pv.first == pos) {
        pv.second = v;
        return;
      }
    moved.emplace_back(pos, v);
  };
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(universe - i)));
    const Index vi = value_at(i);
    const Index vj = value_at(j);
    set_at(j, vi);
    out[i] = vj;
  }
}

SampleRealization Sampler::draw(RandomStream& rng) const {
  SampleRealization out = RowDraw{0};
  draw(rng, out);
  return out;
}

void Sampler::draw(RandomStream& rng, SampleRealization& out) const {
  const Index m = system_.m();
  const Index n = system_.n();
  switch (spec_.kind) {
    case SamplerKind::RK:
      out = RowDraw{rows_.pick(rng.uniform())};
      return;
    case SamplerKind::RGS:
      out = ColumnDraw{cols_.pick(rng.uniform())};
      return;
    case SamplerKind::DSGS: {
      const Index e = entries_.pick(rng.uniform());
      out = EntryDraw{entry_row_[e], entry_col_[e]};
      return;
    }
    case SamplerKind::RBK: {
      if (!std::holds_alternative<RowBlockDraw>(out)) out = RowBlockDraw{};
      draw_subset(rng, m, spec_.block, std::get<RowBlockDraw>(out).rows);
      return;
    }
    case SamplerKind::RBCD: {
      if (!std::holds_alternative<ColumnBlockDraw>(out)) out = ColumnBlockDraw{};
      draw_subset(rng, n, spec_.block, std::get<ColumnBlockDraw>(out).cols);
      return;
    }
    case SamplerKind::BGK: {
      if (!std::holds_alternative<GaussianRowSketch>(out)) out = GaussianRowSketch{};
      DenseMatrix& s = std::get<GaussianRowSketch>(out).s;
      s.resize(m, spec_.block);
      for (Index c = 0; c < s.cols(); ++c)
        for (Index r = 0; r < m; ++r) s(r, c) = rng.normal();
      return;
    }
    case SamplerKind::BGLS: {
      if (!std::holds_alternative<GaussianColumnSketch>(out)) out = GaussianColumnSketch{};
      DenseMatrix& t = std::get<GaussianColumnSketch>(out).t;
      t.resize(n, spec_.block);
      for (Index c = 0; c < t.cols(); ++c)
        for (Index r = 0; r < n; ++r) t(r, c) = rng.normal();
      return;
    }
    case SamplerKind::SGC: {
      if (!std::holds_alternative<SymmetricGaussianDraw>(out)) out = SymmetricGaussianDraw{0, 0, Vector()};
      auto& g = std::get<SymmetricGaussianDraw>(out);
      const Index e = entries_.pick(rng.uniform());
      g.row = entry_row_[e];
      g.col = entry_col_[e];
      g.eta.resize(n);
      for (Index i = 0; i < n; ++i) g.eta[i] = rng.normal();
      return;
    }
  }
}

namespace {

// Residual entries either come from a precomputed A x − b or are formed on
// demand from x, so row-action samplers never touch the whole matrix.
struct ResidualSource {
  const LinearSystem& system;
  const Vector& x;
  const Vector* full;

  double entry(Index j) const { return full ? (*full)[j] : system.a().row_dot(j, x) - system.b()[j]; }
};

template <class Sink>
void direction_into(const SamplerSpec& spec, const LinearSystem& system, const Vector& row_sq, const Vector& col_sq,
                    double trace, const SampleRealization& sample, const ResidualSource& res, Vector& d,
                    Sink&& mark) {
  const CoefficientMatrix& a = system.a();
  const Index m = system.m();
  const Index n = system.n();
  const double frob = system.frobenius_squared();
  d.setZero(n);

  switch (spec.kind) {
    case SamplerKind::RK: {
      const Index j = std::get<RowDraw>(sample).row;
      a.add_row(j, res.entry(j) / row_sq[j], d);
      return;
    }
    case SamplerKind::RGS: {
      const Index i = std::get<ColumnDraw>(sample).col;
      d[i] = a.column_dot(i, *res.full) / col_sq[i];
      mark(i);
      return;
    }
    case SamplerKind::DSGS: {
      const auto& e = std::get<EntryDraw>(sample);
      const double aij = a.coeff(e.row, e.col);
      if (aij == 0.0) throw DomainError("DSGS drew a zero entry");
      d[e.col] = res.entry(e.row) / aij;
      mark(e.col);
      return;
    }
    case SamplerKind::RBK: {
      const auto& rows = std::get<RowBlockDraw>(sample).rows;
      const double scale = static_cast<double>(m) / (static_cast<double>(rows.size()) * frob);
      for (Index j : rows) a.add_row(j, scale * res.entry(j), d);
      return;
    }
    case SamplerKind::RBCD: {
      const auto& cols = std::get<ColumnBlockDraw>(sample).cols;
      const double scale = static_cast<double>(n) / (static_cast<double>(cols.size()) * frob);
      for (Index i : cols) {
        d[i] = scale * a.column_dot(i, *res.full);
        mark(i);
      }
      return;
    }
    case SamplerKind::BGK: {
      const DenseMatrix& s = std::get<GaussianRowSketch>(sample).s;
      const Vector sr = s.transpose() * (*res.full);
      const Vector ssr = s * sr;
      d = a.multiply_transpose(ssr) / (static_cast<double>(s.cols()) * frob);
      return;
    }
    case SamplerKind::BGLS: {
      const DenseMatrix& t = std::get<GaussianColumnSketch>(sample).t;
      const Vector g = a.multiply_transpose(*res.full);
      const Vector tg = t.transpose() * g;
      d = t * tg / (static_cast<double>(t.cols()) * frob);
      return;
    }
    case SamplerKind::SGC: {
      const auto& g = std::get<SymmetricGaussianDraw>(sample);
      const double aij = a.coeff(g.row, g.col);
      if (aij == 0.0) throw DomainError("SGC drew a zero entry");
      const double quad = g.eta.dot(a.multiply(g.eta));
      d[g.row] = (quad / trace) * (res.entry(g.col) / aij);
      mark(g.row);
      return;
    }
  }
}

}  // namespace

UpdateDirection Sampler::update_direction(const SampleRealization& sample, const Vector& x) const {
  UpdateDirection out;
  update_direction(sample, x, nullptr, out);
  return out;
}

void Sampler::update_direction(const SampleRealization& sample, const Vector& x, const Vector* residual,
                               UpdateDirection& out) const {
  if (x.size() != system_.n())
    throw DomainError("iterate has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(system_.n()));
  Vector computed;
  if (!residual && needs_full_residual()) {
    computed = system_.residual(x);
    residual = &computed;
  }
  out.support.clear();
  out.sparse_support = !is_row_action() && spec_.kind != SamplerKind::BGLS;
  const ResidualSource src{system_, x, residual};
  direction_into(spec_, system_, row_sq_, col_sq_, trace_, sample, src, out.d,
                 [&](Index i) { out.support.push_back(i); });
}

Vector Sampler::apply(const SampleRealization& sample, const Vector& r) const {
  if (r.size() != system_.m()) throw DomainError("apply: vector length must equal the row count");
  const Vector x = Vector::Zero(system_.n());
  const ResidualSource src{system_, x, &r};
  Vector d;
  direction_into(spec_, system_, row_sq_, col_sq_, trace_, sample, src, d, [](Index) {});
  return d;
}

bool Sampler::has_finite_support() const { return !is_gaussian(spec_.kind); }

std::uint64_t Sampler::support_size() const {
  switch (spec_.kind) {
    case SamplerKind::RK:
      return static_cast<std::uint64_t>((row_sq_.array() > 0.0).count());
    case SamplerKind::RGS:
      return static_cast<std::uint64_t>((col_sq_.array() > 0.0).count());
    case SamplerKind::DSGS:
      return entry_row_.size();
    case SamplerKind::RBK:
      return binomial(static_cast<std::uint64_t>(system_.m()), static_cast<std::uint64_t>(spec_.block));
    case SamplerKind::RBCD:
      return binomial(static_cast<std::uint64_t>(system_.n()), static_cast<std::uint64_t>(spec_.block));
    default:
      throw UnsupportedError(to_string(spec_.kind) + " has a continuous distribution; use Monte Carlo");
  }
}

void Sampler::for_each_outcome(const std::function<void(double, const SampleRealization&)>& visit,
                               std::uint64_t cap) const {
  const std::uint64_t size = support_size();
  if (size > cap)
    throw CapacityError(to_string(spec_) + " has " + std::to_string(size) + " outcomes, above the cap of " +
                        std::to_string(cap));
  switch (spec_.kind) {
    case SamplerKind::RK:
      for (Index j = 0; j < system_.m(); ++j)
        if (rows_.probability(j) > 0.0) visit(rows_.probability(j), RowDraw{j});
      return;
    case SamplerKind::RGS:
      for (Index i = 0; i < system_.n(); ++i)
        if (cols_.probability(i) > 0.0) visit(cols_.probability(i), ColumnDraw{i});
      return;
    case SamplerKind::DSGS:
      for (std::size_t e = 0; e < entry_row_.size(); ++e)
        visit(entries_.probability(static_cast<Index>(e)), EntryDraw{entry_row_[e], entry_col_[e]});
      return;
    case SamplerKind::RBK:
    case SamplerKind::RBCD: {
      const bool rows = spec_.kind == SamplerKind::RBK;
      const Index universe = rows ? system_.m() : system_.n();
      const double p = 1.0 / static_cast<double>(size);
      std::vector<Index> c(spec_.block);
      std::iota(c.begin(), c.end(), Index{0});
      do {
        if (rows)
          visit(p, RowBlockDraw{c});
        else
          visit(p, ColumnBlockDraw{c});
      } while (next_combination(c, universe));
      return;
    }
    default:
      throw UnsupportedError(to_string(spec_.kind) + " has a continuous distribution; use Monte Carlo");
  }
}

Sampler Sampler::with_row_weights(const Vector& weights) const {
  if (spec_.kind != SamplerKind::RK) throw UnsupportedError("row weights can only be replaced for RK");
  if (weights.size() != system_.m()) throw DomainError("row weight vector has the wrong length");
  Sampler copy = *this;
  fill_cumulative(weights, copy.rows_.cumulative, copy.rows_.total);
  if (!(copy.rows_.total > 0.0)) throw DomainError("row weights sum to zero");
  return copy;
}

SampleRealization draw(const SamplerSpec& spec, const LinearSystem& system, RandomStream& rng) {
  return Sampler(spec, system).draw(rng);
}

UpdateDirection update_direction(const SampleRealization& sample, const SamplerSpec& spec,
                                 const LinearSystem& system, const Vector& x) {
  return Sampler(spec, system).update_direction(sample, x);
}

DenseMatrix exact_update_operator(const Sampler& sampler, std::uint64_t cap) {
  const Index m = sampler.system().m();
  const Index n = sampler.system().n();
  DenseMatrix w = DenseMatrix::Zero(n, m);
  Vector e = Vector::Zero(m);
  sampler.for_each_outcome(
      [&](double p, const SampleRealization& s) {
        for (Index c = 0; c < m; ++c) {
          e[c] = 1.0;
          w.col(c) += p * sampler.apply(s, e);
          e[c] = 0.0;
        }
      },
      cap);
  return w;
}

DenseMatrix exact_update_operator(const SamplerSpec& spec, const LinearSystem& system, std::uint64_t cap) {
  return exact_update_operator(Sampler(spec, system), cap);
}

}  // namespace pfr
