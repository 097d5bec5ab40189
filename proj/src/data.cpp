#include "pfr/data.hpp"

#include "pfr/errors.hpp"
#include "pfr/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace pfr {

namespace {

DenseMatrix gaussian_from(RandomStream& rng, Index m, Index n) {
  DenseMatrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  return a;
}

Vector gaussian_vector_from(RandomStream& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

void require_shape(Index m, Index n) {
  if (m < 1 || n < 1)
    throw DomainError("matrix dimensions must be positive, got " + std::to_string(m) + "x" + std::to_string(n));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <class T>
T parse_number(const std::string& tok, std::int64_t line, const char* what) {
  T value{};
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  return value;
}

// Union–find over node ids, for the connectivity check.
struct Components {
  std::vector<Index> parent;
  explicit Components(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(Index a, Index b) { parent[find(a)] = find(b); }
};

bool connected(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  Components comp(n);
  for (const auto& [u, v] : edges) comp.join(u, v);
  const Index root = comp.find(0);
  for (Index i = 1; i < n; ++i)
    if (comp.find(i) != root) return false;
  return true;
}

}  // namespace

DenseMatrix gen_gaussian(Index m, Index n, std::uint64_t seed) {
  require_shape(m, n);
  RandomStream rng(seed, streams::kMatrix);
  return gaussian_from(rng, m, n);
}

DenseMatrix gen_conditioned(Index m, Index n, double kappa, std::uint64_t seed) {
  require_shape(m, n);
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("kappa must be a finite value >= 1");
  const Index r = std::min(m, n);
  if (r == 1 && kappa > 1.0) throw DomainError("a single singular value cannot have kappa > 1");
  const RandomStream base(seed, streams::kMatrix);
  for (int attempt = 0; attempt < 10; ++attempt) {
    RandomStream rng = attempt == 0 ? base : base.split(static_cast<std::uint64_t>(attempt));
    const DenseMatrix g = gaussian_from(rng, m, n);
    const Eigen::BDCSVD<DenseMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double hi = s[0];
    const double lo = s[r - 1];
    const double target_lo = hi / kappa;
    Vector mapped(r);
    if (kappa == 1.0) {
      mapped.setConstant(hi);
    } else {
      if (!(hi - lo > 1e-14 * hi)) continue;
      for (Index i = 0; i < r; ++i) mapped[i] = target_lo + (s[i] - lo) * (hi - target_lo) / (hi - lo);
      mapped[0] = hi;
      mapped[r - 1] = target_lo;
    }
    return svd.matrixU() * mapped.asDiagonal() * svd.matrixV().transpose();
  }
  throw NumericalError("conditioned generator: singular values did not spread after 10 draws");
}

namespace {

using SparseLine = std::vector<std::pair<Index, double>>;  // sorted by index

// (a, b) <- (c a − s b, s a + c b) over the union of both patterns.
Index rotate_lines(SparseLine& a, SparseLine& b, double c, double s) {
  const Index before = static_cast<Index>(a.size() + b.size());
  SparseLine na, nb;
  na.reserve(a.size() + b.size());
  nb.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    Index k;
    double x = 0.0, y = 0.0;
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      k = a[i].first;
      x = a[i++].second;
    } else if (i == a.size() || b[j].first < a[i].first) {
      k = b[j].first;
      y = b[j++].second;
    } else {
      k = a[i].first;
      x = a[i++].second;
      y = b[j++].second;
    }
    na.emplace_back(k, c * x - s * y);
    nb.emplace_back(k, s * x + c * y);
  }
  a = std::move(na);
  b = std::move(nb);
  return static_cast<Index>(a.size() + b.size()) - before;
}

std::vector<SparseLine> transpose_lines(const std::vector<SparseLine>& lines, Index other) {
  std::vector<SparseLine> out(static_cast<std::size_t>(other));
  for (Index i = 0; i < static_cast<Index>(lines.size()); ++i)
    for (const auto& [k, v] : lines[static_cast<std::size_t>(i)]) out[static_cast<std::size_t>(k)].emplace_back(i, v);
  return out;
}

// Random plane rotations of pairs of lines until nnz reaches `goal` or
// `max_steps` rotations have been applied.
void rotate_until(std::vector<SparseLine>& lines, Index& nnz, Index goal, Index max_steps, RandomStream& rng) {
  const auto count = static_cast<std::uint64_t>(lines.size());
  if (count < 2) return;
  for (Index step = 0; step < max_steps && nnz < goal; ++step) {
    const auto i = rng.uniform_index(count);
    auto j = rng.uniform_index(count - 1);
    if (j >= i) ++j;
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    nnz += rotate_lines(lines[i], lines[j], std::cos(theta), std::sin(theta));
  }
}

std::vector<Index> permutation(Index n, RandomStream& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  for (Index i = n - 1; i > 0; --i)
    std::swap(p[static_cast<std::size_t>(i)], p[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
  return p;
}

}  // namespace

SparseMatrix gen_sparse(Index m, Index n, double density, double kappa, std::uint64_t seed, std::string* warning) {
  require_shape(m, n);
  if (!(density > 0.0 && density <= 1.0)) throw DomainError("density must lie in (0, 1]");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("kappa must be a finite value >= 1");
  if (warning) warning->clear();
  if (density == 1.0) return gen_conditioned(m, n, kappa, seed).sparseView();

  RandomStream rng(seed, streams::kMatrix);
  const Index k = std::min(m, n);
  const std::vector<Index> row_of = permutation(m, rng), col_of = permutation(n, rng);
  std::vector<SparseLine> rows(static_cast<std::size_t>(m));
  for (Index t = 0; t < k; ++t) {
    const double sigma = k == 1 ? 1.0 : std::pow(kappa, -static_cast<double>(t) / static_cast<double>(k - 1));
    rows[static_cast<std::size_t>(row_of[static_cast<std::size_t>(t)])].emplace_back(
        col_of[static_cast<std::size_t>(t)], sigma);
  }

  // Rotations keep the singular values; alternate row and column phases
  // along a geometric fill schedule.
  const Index target = std::max<Index>(k, static_cast<Index>(std::llround(density * static_cast<double>(m) * n)));
  Index nnz = k;
  const int rounds = 8;
  const Index max_steps = 50 * (m + n);
  double reached = static_cast<double>(k);
  for (int r = 1; r <= rounds && nnz < target; ++r) {
    const double goal = static_cast<double>(k) * std::pow(static_cast<double>(target) / k, static_cast<double>(r) / rounds);
    const auto mid = static_cast<Index>(std::sqrt(reached * goal));
    const auto end = r == rounds ? target : static_cast<Index>(goal);
    rotate_until(rows, nnz, mid, max_steps, rng);
    std::vector<SparseLine> cols = transpose_lines(rows, n);
    rotate_until(cols, nnz, end, max_steps, rng);
    rows = transpose_lines(cols, m);
    reached = goal;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  Index empty_rows = 0;
  std::vector<bool> col_used(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < m; ++i) {
    const auto& line = rows[static_cast<std::size_t>(i)];
    if (line.empty()) ++empty_rows;
    for (const auto& [j, v] : line) {
      triplets.emplace_back(i, j, v);
      col_used[static_cast<std::size_t>(j)] = true;
    }
  }
  SparseMatrix out(m, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  const auto empty_cols = std::count(col_used.begin(), col_used.end(), false);
  if (warning && (empty_rows > 0 || empty_cols > 0))
    *warning = "sparse generator: " + std::to_string(empty_rows) + " empty rows and " + std::to_string(empty_cols) +
               " empty columns at density " + std::to_string(density);
  if (warning && density * static_cast<double>(m) * n < static_cast<double>(k))
    *warning += std::string(warning->empty() ? "" : "; ") + "sparse generator: fill raised to min(m, n) = " +
                std::to_string(k) + " nonzeros to keep full rank";
  return out;
}

RightHandSide make_rhs(const DenseMatrix& a, const RhsRecipe& recipe, std::uint64_t seed) {
  RandomStream xrng(recipe.x_star_seed, streams::kSolution);
  RightHandSide out;
  out.x_star = gaussian_vector_from(xrng, a.cols());
  out.b = a * out.x_star;
  if (recipe.mode == RhsMode::Consistent) return out;

  const SpectralInfo info = compute_spectral_info(a, false);
  const Index m = a.rows();
  if (info.rank >= m)
    throw DomainError("inconsistent right-hand side needs rank < m; A has full row rank " + std::to_string(m));
  const Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeFullU);
  const DenseMatrix null_basis = svd.matrixU().rightCols(m - info.rank);
  RandomStream zrng(seed, streams::kRhsNoise);
  const Vector z = gaussian_vector_from(zrng, m - info.rank);
  out.b += null_basis * z;
  return out;
}

RightHandSide make_rhs(const CoefficientMatrix& a, const RhsRecipe& recipe, std::uint64_t seed) {
  if (recipe.mode == RhsMode::Consistent) {
    RandomStream xrng(recipe.x_star_seed, streams::kSolution);
    RightHandSide out;
    out.x_star = gaussian_vector_from(xrng, a.cols());
    out.b = a.multiply(out.x_star);
    return out;
  }
  return make_rhs(a.to_dense(), recipe, seed);
}

RhsMode parse_rhs_mode(const std::string& text) {
  const std::string t = lower(text);
  if (t == "consistent") return RhsMode::Consistent;
  if (t == "inconsistent") return RhsMode::Inconsistent;
  throw DomainError("unknown right-hand side mode '" + text + "' (consistent, inconsistent)");
}

std::string to_string(RhsMode mode) { return mode == RhsMode::Consistent ? "consistent" : "inconsistent"; }

CoefficientMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::int64_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  const auto head = split_ws(line);
  if (head.size() != 5 || lower(head[0]) != "%%matrixmarket")
    throw ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", lineno);
  if (lower(head[1]) != "matrix") throw ParseError("unsupported object '" + head[1] + "'", lineno);
  const std::string format = lower(head[2]);
  const std::string field = lower(head[3]);
  const std::string symmetry = lower(head[4]);
  if (format != "coordinate" && format != "array") throw ParseError("unknown format '" + head[2] + "'", lineno);
  if (field == "pattern" || field == "complex")
    throw ParseError("unsupported field '" + head[3] + "': only real and integer matrices are read", lineno);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unknown field '" + head[3] + "'", lineno);
  if (symmetry == "skew-symmetric" || symmetry == "hermitian")
    throw ParseError("unsupported symmetry '" + head[4] + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("unknown symmetry '" + head[4] + "'", lineno);
  const bool symmetric = symmetry == "symmetric";

  auto next_data_line = [&](std::vector<std::string>& toks) {
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '%') continue;
      toks = split_ws(line);
      return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_data_line(toks)) throw ParseError("missing size line", lineno + 1);
  const bool coordinate = format == "coordinate";
  if (toks.size() != (coordinate ? 3u : 2u)) throw ParseError("malformed size line", lineno);
  const auto m = parse_number<long long>(toks[0], lineno, "row count");
  const auto n = parse_number<long long>(toks[1], lineno, "column count");
  if (m < 1 || n < 1) throw ParseError("dimensions must be positive", lineno);
  if (symmetric && m != n) throw ParseError("symmetric matrix must be square", lineno);

  if (coordinate) {
    const auto nnz = parse_number<long long>(toks[2], lineno, "entry count");
    if (nnz < 0) throw ParseError("negative entry count", lineno);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(toks))
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e), lineno + 1);
      if (toks.size() != 3) throw ParseError("expected 'row col value'", lineno);
      const auto i = parse_number<long long>(toks[0], lineno, "row index");
      const auto j = parse_number<long long>(toks[1], lineno, "column index");
      const double v = parse_number<double>(toks[2], lineno, "value");
      if (i < 1 || i > m || j < 1 || j > n) throw ParseError("index out of range", lineno);
      triplets.emplace_back(i - 1, j - 1, v);
      if (symmetric && i != j) triplets.emplace_back(j - 1, i - 1, v);
    }
    if (next_data_line(toks)) throw ParseError("unexpected data after the last entry", lineno);
    SparseMatrix a(m, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return CoefficientMatrix(std::move(a));
  }

  DenseMatrix a = DenseMatrix::Zero(m, n);
  for (long long j = 0; j < n; ++j)
    for (long long i = symmetric ? j : 0; i < m; ++i) {
      if (!next_data_line(toks)) throw ParseError("array data ends early", lineno + 1);
      if (toks.size() != 1) throw ParseError("expected one value per line", lineno);
      a(i, j) = parse_number<double>(toks[0], lineno, "value");
      if (symmetric) a(j, i) = a(i, j);
    }
  if (next_data_line(toks)) throw ParseError("unexpected data after the last entry", lineno);
  return CoefficientMatrix(std::move(a));
}

CoefficientMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CoefficientMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonzeros() << '\n';
  char buf[48];
  a.for_each_nonzero([&](Index i, Index j, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << i + 1 << ' ' << j + 1 << ' ' << buf << '\n';
  });
}

void write_matrix_market(const std::string& path, const CoefficientMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrix_market(out, a);
  if (!out) throw Error("write to '" + path + "' failed");
}

GraphKind parse_graph_kind(const std::string& text) {
  const std::string t = lower(text);
  if (t == "cycle") return GraphKind::Cycle;
  if (t == "line") return GraphKind::Line;
  if (t == "rgg") return GraphKind::RGG;
  throw DomainError("unknown graph '" + text + "' (cycle, line, rgg)");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Cycle: return "cycle";
    case GraphKind::Line: return "line";
    case GraphKind::RGG: return "rgg";
  }
  return "?";
}

double default_rgg_radius(Index n_nodes) {
  const double n = static_cast<double>(n_nodes);
  return std::sqrt(std::log(n) / n);
}

IncidenceSystem incidence_system(const GraphTopology& topo, const Vector& c, std::uint64_t seed) {
  const Index n = topo.n_nodes;
  if (c.size() != n)
    throw DomainError("node values have " + std::to_string(c.size()) + " entries, expected " + std::to_string(n));
  std::vector<std::pair<Index, Index>> edges;
  switch (topo.kind) {
    case GraphKind::Cycle:
      if (n < 3) throw DomainError("cycle graph needs at least 3 nodes");
      for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      edges.emplace_back(0, n - 1);
      break;
    case GraphKind::Line:
      if (n < 2) throw DomainError("line graph needs at least 2 nodes");
      for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case GraphKind::RGG: {
      if (n < 2) throw DomainError("random geometric graph needs at least 2 nodes");
      const double radius = topo.radius > 0.0 ? topo.radius : default_rgg_radius(n);
      const double r2 = radius * radius;
      RandomStream rng(seed, streams::kGraph);
      bool ok = false;
      std::vector<double> px(n), py(n);
      for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
        for (Index i = 0; i < n; ++i) {
          px[i] = rng.uniform();
          py[i] = rng.uniform();
        }
        edges.clear();
        for (Index u = 0; u < n; ++u)
          for (Index v = u + 1; v < n; ++v) {
            const double dx = px[u] - px[v], dy = py[u] - py[v];
            if (dx * dx + dy * dy <= r2) edges.emplace_back(u, v);
          }
        ok = !edges.empty() && connected(n, edges);
      }
      if (!ok) throw DomainError("random geometric graph still disconnected after 50 draws");
      break;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    triplets.emplace_back(static_cast<Index>(e), edges[e].first, 1.0);
    triplets.emplace_back(static_cast<Index>(e), edges[e].second, -1.0);
  }
  SparseMatrix a(static_cast<Index>(edges.size()), n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  const Index m = a.rows();
  return {LinearSystem(std::move(a), Vector::Zero(m)), c.mean(), std::move(edges)};
}

Vector node_values(Index n_nodes, std::uint64_t seed) {
  if (n_nodes < 1) throw DomainError("node count must be positive");
  RandomStream rng(seed, streams::kNodeValues);
  return gaussian_vector_from(rng, n_nodes);
}

}  // namespace pfr
