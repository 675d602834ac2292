#ifndef LOTDECOMP_EXACT_OT_HPP
#define LOTDECOMP_EXACT_OT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lotdecomp/measures.hpp"

namespace lotdecomp {

template <typename Scalar>
struct TransportResult {
  Scalar cost;
  Coupling<Scalar> coupling;
  Index iterations;
  Scalar dual_gap;
  // Dual potentials with u_i + v_j <= cost_ij for every cell.
  VectorX<Scalar> row_potentials;
  VectorX<Scalar> col_potentials;
};

/// Pairwise squared Euclidean distances between the rows of X and Y.
template <typename DerivedX, typename DerivedY>
MatrixX<typename DerivedX::Scalar> squared_distances(const Eigen::MatrixBase<DerivedX>& X,
                                                     const Eigen::MatrixBase<DerivedY>& Y) {
  using Scalar = typename DerivedX::Scalar;
  if (X.cols() != Y.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "points live in R^" + std::to_string(X.cols()) + " and R^" +
                    std::to_string(Y.cols()));
  MatrixX<Scalar> D(X.rows(), Y.rows());
  for (Index j = 0; j < Y.rows(); ++j)
    for (Index i = 0; i < X.rows(); ++i) {
      Scalar s = 0;
      for (Index k = 0; k < X.cols(); ++k) {
        const Scalar diff = X(i, k) - Y(j, k);
        s += diff * diff;
      }
      D(i, j) = s;
    }
  return D;
}

template <typename Scalar>
MatrixX<Scalar> cost_matrix(const EmpiricalMeasure<Scalar>& nu, const EmpiricalMeasure<Scalar>& mu) {
  return squared_distances(nu.points(), mu.points());
}

struct SimplexOptions {
  // 0 selects max(10000, 100 * n * m).
  Index max_iterations = 0;
};

namespace detail {

// Primal network simplex on the complete bipartite transportation graph.
//
// The basis is a spanning tree over the n row nodes and m column nodes
// (n + m - 1 cells), kept rooted at row 0 with parent links so that a pivot
// only touches the cycle and the subtree that gets re-hung. Entering cells
// come from block pricing (most negative reduced cost within the first block
// holding one, scanning column-major from a moving cursor). After a run of
// degenerate pivots the solver switches to Bland's rule, lowest column-major
// index entering and leaving, until it makes progress again; that rules out
// cycling.
template <typename Scalar>
class TransportSimplex {
 public:
  TransportSimplex(const VectorX<Scalar>& a, const VectorX<Scalar>& b, const MatrixX<Scalar>& cost,
                   SimplexOptions opts, const MatrixX<Scalar>* warm = nullptr)
      : a_(a), b_(b), c_(cost), n_(a.size()), m_(b.size()), opts_(opts), warm_(warm) {
    if (c_.rows() != n_ || c_.cols() != m_)
      throw Error(ErrorKind::DimensionMismatch,
                  "cost matrix is " + shape(c_.rows(), c_.cols()) + ", expected " +
                      shape(n_, m_));
    if (!c_.allFinite()) throw Error(ErrorKind::NonFiniteEntry, "cost matrix contains NaN or Inf");
  }

  TransportResult<Scalar> run() {
    if (!(warm_ && warm_basis(*warm_))) initial_basis();
    const Scalar scale = std::max<Scalar>(Scalar(1), c_.cwiseAbs().maxCoeff());
    const Scalar eps = Scalar(1e-12) * scale;
    const Index max_iter =
        opts_.max_iterations > 0 ? opts_.max_iterations : std::max<Index>(10000, 100 * n_ * m_);
    const Index degenerate_limit = n_ + m_;

    Index iter = 0, degenerate_streak = 0;
    bool bland = false;
    for (;;) {
      Index ei = -1, ej = -1;
      if (!price(eps, bland, ei, ej)) {
        // Incremental potentials drift; confirm optimality on fresh ones.
        rebuild_tree();
        if (!price(eps, bland, ei, ej)) break;
      }
      if (++iter > max_iter)
        throw Error(ErrorKind::SolverFailure,
                    "network simplex exceeded " + std::to_string(max_iter) + " pivots");
      const bool degenerate = pivot(ei, ej);
      if (degenerate) {
        if (++degenerate_streak > degenerate_limit) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
    }

    MatrixX<Scalar> flow = MatrixX<Scalar>::Zero(n_, m_);
    Scalar cost = 0;
    for (const auto& cell : cells_) {
      flow(cell.i, cell.j) = cell.x;
      cost += cell.x * c_(cell.i, cell.j);
    }
    // Certified gap: repair the column potentials into a feasible dual.
    VectorX<Scalar> u(n_), v(m_);
    Scalar dual = 0;
    for (Index i = 0; i < n_; ++i) {
      u(i) = pot_[i];
      dual += a_(i) * pot_[i];
    }
    for (Index j = 0; j < m_; ++j) {
      Scalar vj = std::numeric_limits<Scalar>::infinity();
      for (Index i = 0; i < n_; ++i) vj = std::min(vj, c_(i, j) - pot_[i]);
      v(j) = vj;
      dual += b_(j) * vj;
    }
    Coupling<Scalar> coupling(std::move(flow), a_, b_);
    return {cost, std::move(coupling), iter, std::abs(cost - dual), std::move(u), std::move(v)};
  }

 private:
  struct Cell {
    Index i, j;
    Scalar x;
  };

  static std::string shape(Index r, Index c) { return detail::shape(r, c); }

  Index col_node(Index j) const { return n_ + j; }
  Index key(Index i, Index j) const { return j * n_ + i; }
  Index other_end(const Cell& cell, Index node) const {
    return node < n_ ? col_node(cell.j) : cell.i;
  }
  // Row potentials live in pot_[0, n), column potentials in pot_[n, n + m).
  Scalar reduced_cost(Index i, Index j) const { return c_(i, j) - pot_[i] - pot_[n_ + j]; }

  int add_cell(Index i, Index j, Scalar x) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({i, j, x});
    adj_[i].push_back(id);
    adj_[col_node(j)].push_back(id);
    basic_[key(i, j)] = 1;
    return id;
  }

  void remove_cell(int id) {
    auto drop = [&](Index node, int cid) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), cid));
    };
    const Cell gone = cells_[id];
    drop(gone.i, id);
    drop(col_node(gone.j), id);
    basic_[key(gone.i, gone.j)] = 0;
    const int last = static_cast<int>(cells_.size()) - 1;
    if (id != last) {
      const Cell moved = cells_[last];
      cells_[id] = moved;
      for (Index node : {moved.i, col_node(moved.j)}) {
        std::replace(adj_[node].begin(), adj_[node].end(), last, id);
        if (up_cell_[node] == last) up_cell_[node] = id;
      }
    }
    cells_.pop_back();
  }

  // Matrix-minimum start: visit cells by increasing cost, saturate one line
  // per visited cell. Produces a spanning tree with exactly n + m - 1 cells.
  void initial_basis() {
    const Index nodes = n_ + m_;
    adj_.assign(nodes, {});
    basic_.assign(n_ * m_, 0);
    cells_.clear();
    cells_.reserve(nodes);

    // (cost, row-major key) pairs; the key breaks ties deterministically.
    std::vector<std::pair<Scalar, Index>> order(n_ * m_);
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < m_; ++j) order[i * m_ + j] = {c_(i, j), i * m_ + j};
    std::sort(order.begin(), order.end());
    std::vector<Scalar> s(a_.data(), a_.data() + n_);
    std::vector<Scalar> d(b_.data(), b_.data() + m_);
    std::vector<char> row_alive(n_, 1), col_alive(m_, 1);
    Index rows_left = n_, cols_left = m_;
    for (const auto& entry : order) {
      const Index i = entry.second / m_, j = entry.second % m_;
      if (!row_alive[i] || !col_alive[j]) continue;
      if (rows_left == 1 && cols_left == 1) {
        add_cell(i, j, std::max<Scalar>(Scalar(0), std::min(s[i], d[j])));
        break;
      }
      bool drop_row;
      if (rows_left == 1)
        drop_row = false;
      else if (cols_left == 1)
        drop_row = true;
      else
        drop_row = s[i] <= d[j];
      const Scalar x = std::max<Scalar>(Scalar(0), drop_row ? s[i] : d[j]);
      add_cell(i, j, x);
      s[i] -= x;
      d[j] -= x;
      if (drop_row) {
        row_alive[i] = 0;
        --rows_left;
      } else {
        col_alive[j] = 0;
        --cols_left;
      }
    }
    init_tree_state();
  }

  void init_tree_state() {
    const Index nodes = n_ + m_;
    pot_.assign(nodes, 0);
    up_node_.assign(nodes, -1);
    up_cell_.assign(nodes, -1);
    size_.assign(nodes, 1);
    mark_.assign(nodes, 0);
    stamp_ = 0;
    cursor_ = 0;
    block_ = std::max<Index>(std::min<Index>(n_ * m_, 16),
                             static_cast<Index>(std::sqrt(static_cast<double>(n_ * m_))));
    rebuild_tree();
  }

  // Basis from a feasible coupling of the same marginals (typically the
  // optimum of a nearby cost). Its support must be a forest; zero cells are
  // added to connect it into a spanning tree. Returns false, leaving the
  // caller to start cold, when the coupling does not qualify.
  bool warm_basis(const MatrixX<Scalar>& g) {
    if (g.rows() != n_ || g.cols() != m_ || !g.allFinite()) return false;
    const Index nodes = n_ + m_;
    const Scalar tol = Scalar(1e-12) * std::max<Scalar>(Scalar(1), a_.sum());
    if ((g.rowwise().sum() - a_).cwiseAbs().maxCoeff() > tol) return false;
    if ((g.colwise().sum().transpose() - b_).cwiseAbs().maxCoeff() > tol) return false;
    if (g.minCoeff() < 0) return false;

    adj_.assign(nodes, {});
    basic_.assign(n_ * m_, 0);
    cells_.clear();
    cells_.reserve(nodes);
    std::vector<Index> parent(nodes);
    std::iota(parent.begin(), parent.end(), Index(0));
    auto find = [&](Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto join = [&](Index i, Index j, Scalar x) {
      const Index r = find(i), q = find(col_node(j));
      if (r == q) return false;
      parent[r] = q;
      add_cell(i, j, x);
      return true;
    };
    for (Index j = 0; j < m_; ++j)
      for (Index i = 0; i < n_; ++i)
        if (g(i, j) > 0 && !join(i, j, g(i, j))) return false;
    if (static_cast<Index>(cells_.size()) < nodes - 1) {
      Index hub = -1;  // a column already connected to row 0
      for (Index j = 0; j < m_ && hub < 0; ++j)
        if (find(col_node(j)) == find(0)) hub = j;
      if (hub < 0) {
        join(0, 0, Scalar(0));
        hub = 0;
      }
      for (Index i = 1; i < n_; ++i)
        if (find(i) != find(0)) join(i, hub, Scalar(0));
      for (Index j = 0; j < m_; ++j)
        if (find(col_node(j)) != find(0)) join(0, j, Scalar(0));
    }
    if (static_cast<Index>(cells_.size()) != nodes - 1) return false;
    init_tree_state();
    return true;
  }

  // Full recomputation of parent links, subtree sizes and potentials from
  // row 0.
  void rebuild_tree() {
    up_node_[0] = -1;
    up_cell_[0] = -1;
    pot_[0] = 0;
    order_.clear();
    stack_.clear();
    stack_.push_back(0);
    while (!stack_.empty()) {
      const Index node = stack_.back();
      stack_.pop_back();
      order_.push_back(node);
      for (int id : adj_[node]) {
        if (id == up_cell_[node]) continue;
        const Cell& cell = cells_[id];
        const Index other = other_end(cell, node);
        up_node_[other] = node;
        up_cell_[other] = id;
        pot_[other] = c_(cell.i, cell.j) - pot_[node];
        stack_.push_back(other);
      }
    }
    std::fill(size_.begin(), size_.end(), Index(1));
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
      if (up_node_[*it] >= 0) size_[up_node_[*it]] += size_[*it];
  }

  // Adds `shift` to the row potentials and subtracts it from the column
  // potentials of every node reachable from `start` without using cell
  // `barrier`. Tree cells keep zero reduced cost under such a shift.
  void shift_component(Index start, int barrier, Scalar shift) {
    stack_.clear();
    stack_.push_back(start);
    Index node;
    std::vector<int>& via = via_;
    via.clear();
    via.push_back(barrier);
    while (!stack_.empty()) {
      node = stack_.back();
      stack_.pop_back();
      const int came = via.back();
      via.pop_back();
      pot_[node] += node < n_ ? shift : -shift;
      for (int id : adj_[node]) {
        if (id == came) continue;
        stack_.push_back(other_end(cells_[id], node));
        via.push_back(id);
      }
    }
  }

  bool price(Scalar eps, bool bland, Index& ei, Index& ej) {
    const Index total = n_ * m_;
    if (bland) {
      for (Index k = 0; k < total; ++k) {
        if (basic_[k]) continue;
        const Index i = k % n_, j = k / n_;
        if (reduced_cost(i, j) < -eps) {
          ei = i;
          ej = j;
          return true;
        }
      }
      return false;
    }
    const Scalar* c = c_.data();
    const Scalar* u = pot_.data();
    const Scalar* v = pot_.data() + n_;
    Scalar best = -eps;
    Index best_key = -1;
    Index k = cursor_, i = cursor_ % n_, j = cursor_ / n_;
    Index in_block = 0;
    for (Index scanned = 0; scanned < total; ++scanned) {
      const Scalar rc = c[k] - u[i] - v[j];
      if (rc < best && !basic_[k]) {
        best = rc;
        best_key = k;
      }
      if (++k == total) {
        k = 0;
        i = 0;
        j = 0;
      } else if (++i == n_) {
        i = 0;
        ++j;
      }
      if (++in_block == block_) {
        if (best_key >= 0) break;
        in_block = 0;
      }
    }
    cursor_ = k;
    if (best_key < 0) return false;
    ei = best_key % n_;
    ej = best_key / n_;
    return true;
  }

  // Returns true when the pivot was degenerate (zero step).
  bool pivot(Index ei, Index ej) {
    // Cycle: entering cell, then the tree path row ei -> lca -> column ej.
    // Cells on the row side go into side_a_, column side into side_b_.
    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    for (Index x = ei; x >= 0; x = up_node_[x]) mark_[x] = stamp_;
    side_b_.clear();
    Index lca = col_node(ej);
    while (mark_[lca] != stamp_) {
      side_b_.push_back(up_cell_[lca]);
      lca = up_node_[lca];
    }
    side_a_.clear();
    for (Index x = ei; x != lca; x = up_node_[x]) side_a_.push_back(up_cell_[x]);
    path_.assign(side_a_.begin(), side_a_.end());
    path_.insert(path_.end(), side_b_.rbegin(), side_b_.rend());

    // The cell touching row ei is path_[0] and loses mass; signs alternate.
    Scalar theta = std::numeric_limits<Scalar>::infinity();
    std::size_t leave_pos = 0;
    Index leave_key = 0;
    for (std::size_t p = 0; p < path_.size(); p += 2) {
      const Cell& cell = cells_[path_[p]];
      const Index k = key(cell.i, cell.j);
      if (cell.x < theta || (cell.x == theta && k < leave_key)) {
        theta = cell.x;
        leave_pos = p;
        leave_key = k;
      }
    }
    for (std::size_t p = 0; p < path_.size(); ++p) {
      Cell& cell = cells_[path_[p]];
      if (p % 2 == 0)
        cell.x -= theta;
      else
        cell.x += theta;
    }

    // Removing the leaving cell cuts off the subtree below its lower end; the
    // entering endpoint on that side becomes the subtree's new top.
    const int leave = path_[leave_pos];
    const Cell gone = cells_[leave];
    const Index lower = up_cell_[gone.i] == leave ? gone.i : col_node(gone.j);
    const bool row_side = leave_pos < side_a_.size();
    const Index top = row_side ? ei : col_node(ej);
    const Index anchor = row_side ? col_node(ej) : ei;
    const Scalar rc = reduced_cost(ei, ej);
    const Index cut = size_[lower];

    for (Index x = up_node_[lower]; x >= 0; x = up_node_[x]) size_[x] -= cut;
    // Reverse links on top -> lower; sizes along that chain are re-derived
    // from the bottom up.
    chain_.clear();
    for (Index x = top;; x = up_node_[x]) {
      chain_.push_back(x);
      if (x == lower) break;
    }
    for (std::size_t k = chain_.size(); k-- > 1;)
      size_[chain_[k]] -= size_[chain_[k - 1]];
    for (std::size_t k = chain_.size() - 1; k-- > 0;) size_[chain_[k]] += size_[chain_[k + 1]];

    cells_[leave].x = 0;
    remove_cell(leave);
    const int enter = add_cell(ei, ej, theta);

    Index node = top, prev = anchor;
    int prev_cell = enter;
    for (;;) {
      const Index next = up_node_[node];
      const int next_cell = up_cell_[node];
      up_node_[node] = prev;
      up_cell_[node] = prev_cell;
      if (node == lower) break;
      prev = node;
      prev_cell = next_cell;
      node = next;
    }
    for (Index x = anchor; x >= 0; x = up_node_[x]) size_[x] += cut;

    // Make the entering cell tight by shifting whichever side is smaller.
    const bool top_is_row = top < n_;
    if (2 * cut <= n_ + m_)
      shift_component(top, enter, top_is_row ? rc : -rc);
    else
      shift_component(anchor, enter, top_is_row ? -rc : rc);
    return theta == Scalar(0);
  }

  const VectorX<Scalar>& a_;
  const VectorX<Scalar>& b_;
  const MatrixX<Scalar>& c_;
  Index n_, m_;
  SimplexOptions opts_;
  const MatrixX<Scalar>* warm_;

  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adj_;
  std::vector<char> basic_;
  std::vector<Scalar> pot_;
  std::vector<Index> up_node_, size_, order_, chain_;
  std::vector<int> up_cell_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  std::vector<Index> stack_;
  std::vector<int> path_, side_a_, side_b_, via_;
  Index cursor_ = 0;
  Index block_ = 1;
};

}  // namespace detail

/// Exact solution of min <gamma, cost> over couplings of (a, b).
///
/// Deterministic for a fixed input; the returned coupling is a basic
/// solution, so it has at most n + m - 1 nonzero entries. `warm`, when given,
/// is a basic coupling of the same marginals to start the pivots from; an
/// unusable one is ignored.
template <typename Scalar>
TransportResult<Scalar> solve_transport(const VectorX<Scalar>& a, const VectorX<Scalar>& b,
                                        const MatrixX<Scalar>& cost, SimplexOptions opts = {},
                                        const MatrixX<Scalar>* warm = nullptr) {
  return detail::TransportSimplex<Scalar>(a, b, cost, opts, warm).run();
}

/// Squared 2-Wasserstein distance between two empirical measures.
template <typename Scalar>
TransportResult<Scalar> solve_w2(const EmpiricalMeasure<Scalar>& nu,
                                 const EmpiricalMeasure<Scalar>& mu, SimplexOptions opts = {},
                                 const MatrixX<Scalar>* warm = nullptr) {
  const MatrixX<Scalar> cost = cost_matrix(nu, mu);
  return solve_transport(nu.weights(), mu.weights(), cost, opts, warm);
}

struct OracleOptions {
  Index max_cells = 64;
};

namespace detail {

// Branch and bound over the vertices of U(a, b). Every vertex is reached by
// repeatedly picking a live (row, column) pair and saturating whichever line
// has less remaining mass; partial states are memoized by (cells, removed
// rows, removed columns), which determines the partial flow uniquely.
//
// The bound for a state is the objective of a dual-feasible pair (u, v) on
// the residual problem. The pair comes from the simplex, but column
// potentials are re-derived as v_j = min_i (c_ij - u_i), so the bound is
// valid whatever the simplex returned; it only affects how much is pruned.
template <typename Scalar>
class VertexEnumerator {
 public:
  VertexEnumerator(const VectorX<Scalar>& a, const VectorX<Scalar>& b, const MatrixX<Scalar>& c)
      : a_(a), b_(b), c_(c), n_(a.size()), m_(b.size()) {}

  MatrixX<Scalar> run(Scalar& best_cost, Index& nodes) {
    s_.assign(a_.data(), a_.data() + n_);
    d_.assign(b_.data(), b_.data() + m_);
    current_ = MatrixX<Scalar>::Zero(n_, m_);
    best_ = current_;
    best_cost_ = std::numeric_limits<Scalar>::infinity();
    nodes_ = 0;
    search(0, ~std::uint64_t(0) >> (64 - n_), ~std::uint64_t(0) >> (64 - m_), Scalar(0));
    best_cost = best_cost_;
    nodes = nodes_;
    return best_;
  }

 private:
  struct Key {
    std::uint64_t cells, rows, cols;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.cells * 0x9E3779B97F4A7C15ull;
      h ^= k.rows + 0x7F4A7C15ull + (h << 6) + (h >> 2);
      h ^= k.cols + 0x94D049BBull + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  // Lower bound on the residual cost; fills reduced costs of live cells.
  Scalar residual_bound(const std::vector<Index>& rows, const std::vector<Index>& cols,
                        MatrixX<Scalar>& reduced) const {
    const Index r = static_cast<Index>(rows.size()), k = static_cast<Index>(cols.size());
    VectorX<Scalar> sa(r), sb(k);
    MatrixX<Scalar> sc(r, k);
    for (Index p = 0; p < r; ++p) sa(p) = std::max<Scalar>(s_[rows[p]], 0);
    for (Index q = 0; q < k; ++q) sb(q) = std::max<Scalar>(d_[cols[q]], 0);
    for (Index q = 0; q < k; ++q)
      for (Index p = 0; p < r; ++p) sc(p, q) = c_(rows[p], cols[q]);
    VectorX<Scalar> u = VectorX<Scalar>::Zero(r);
    try {
      // Rebalance rounding drift so the residual problem is feasible.
      const Scalar ta = sa.sum(), tb = sb.sum();
      if (ta > 0 && tb > 0) sb *= ta / tb;
      if (ta > 0 && tb > 0) u = TransportSimplex<Scalar>(sa, sb, sc, {}).run().row_potentials;
    } catch (const Error&) {
      // Any u is a valid starting point; zero gives the column-minimum bound.
    }
    Scalar bound = 0;
    for (Index p = 0; p < r; ++p) bound += s_[rows[p]] * u(p);
    reduced.resize(r, k);
    for (Index q = 0; q < k; ++q) {
      Scalar v = std::numeric_limits<Scalar>::infinity();
      for (Index p = 0; p < r; ++p) v = std::min(v, sc(p, q) - u(p));
      bound += d_[cols[q]] * v;
      for (Index p = 0; p < r; ++p) reduced(p, q) = sc(p, q) - u(p) - v;
    }
    return bound;
  }

  void search(std::uint64_t cells, std::uint64_t rows, std::uint64_t cols, Scalar cost) {
    if (rows == 0 || cols == 0) {
      if (cost < best_cost_) {
        best_cost_ = cost;
        best_ = current_;
      }
      return;
    }
    if (!visited_.insert(Key{cells, rows, cols}).second) return;
    ++nodes_;

    std::vector<Index> live_rows, live_cols;
    for (Index i = 0; i < n_; ++i)
      if (rows >> i & 1) live_rows.push_back(i);
    for (Index j = 0; j < m_; ++j)
      if (cols >> j & 1) live_cols.push_back(j);
    MatrixX<Scalar> reduced;
    const Scalar bound = cost + residual_bound(live_rows, live_cols, reduced);
    const Scalar slack = Scalar(1e-12) * (1 + std::abs(best_cost_));
    if (std::isfinite(best_cost_) && bound > best_cost_ - slack) return;

    // Cheapest reduced cost first, so the first leaf is usually optimal.
    struct Branch {
      Scalar rc;
      Index i, j;
    };
    std::vector<Branch> branches;
    for (Index q = 0; q < static_cast<Index>(live_cols.size()); ++q)
      for (Index p = 0; p < static_cast<Index>(live_rows.size()); ++p)
        branches.push_back({reduced(p, q), live_rows[p], live_cols[q]});
    std::stable_sort(branches.begin(), branches.end(),
                     [](const Branch& x, const Branch& y) { return x.rc < y.rc; });

    const Scalar tie = Scalar(64) * std::numeric_limits<Scalar>::epsilon();
    for (const Branch& br : branches) {
      const Index i = br.i, j = br.j;
      const Scalar si = s_[i], dj = d_[j];
      std::uint64_t next_rows = rows, next_cols = cols;
      Scalar x;
      if (si < dj - tie) {
        x = si;
        next_rows &= ~(std::uint64_t(1) << i);
      } else if (dj < si - tie) {
        x = dj;
        next_cols &= ~(std::uint64_t(1) << j);
      } else {
        x = std::min(si, dj);
        next_rows &= ~(std::uint64_t(1) << i);
        next_cols &= ~(std::uint64_t(1) << j);
      }
      s_[i] -= x;
      d_[j] -= x;
      current_(i, j) = x;
      search(cells | std::uint64_t(1) << (i * m_ + j), next_rows, next_cols,
             cost + x * c_(i, j));
      current_(i, j) = 0;
      s_[i] = si;
      d_[j] = dj;
    }
  }

  const VectorX<Scalar>& a_;
  const VectorX<Scalar>& b_;
  const MatrixX<Scalar>& c_;
  Index n_, m_;
  std::vector<Scalar> s_, d_;
  MatrixX<Scalar> current_, best_;
  Scalar best_cost_ = 0;
  Index nodes_ = 0;
  std::unordered_set<Key, KeyHash> visited_;
};

}  // namespace detail

/// Brute-force optimum over all vertices of the coupling polytope, for
/// verifying solve_w2 on small instances. Uniform square instances are
/// enumerated as permutations; everything else by branch and bound over
/// vertices with a dual bound that does not trust the simplex.
template <typename Scalar>
TransportResult<Scalar> solve_w2_oracle(const EmpiricalMeasure<Scalar>& nu,
                                        const EmpiricalMeasure<Scalar>& mu,
                                        OracleOptions opts = {}) {
  const Index n = nu.size(), m = mu.size();
  if (n * m > opts.max_cells || n * m > 64)
    throw Error(ErrorKind::InstanceTooLarge,
                "oracle is capped at " + std::to_string(std::min<Index>(opts.max_cells, 64)) +
                    " cells, instance has " + std::to_string(n * m));
  const MatrixX<Scalar> cost = cost_matrix(nu, mu);
  MatrixX<Scalar> best;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  Index visited = 0;

  if (n == m && nu.is_uniform() && mu.is_uniform()) {
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index(0));
    std::vector<Index> best_perm = perm;
    do {
      Scalar s = 0;
      for (Index i = 0; i < n; ++i) s += cost(i, perm[i]);
      ++visited;
      if (s < best_cost) {
        best_cost = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    best = MatrixX<Scalar>::Zero(n, m);
    for (Index i = 0; i < n; ++i) best(i, best_perm[i]) = nu.weights()(i);
    best_cost = (best.array() * cost.array()).sum();
  } else {
    detail::VertexEnumerator<Scalar> enumerator(nu.weights(), mu.weights(), cost);
    best = enumerator.run(best_cost, visited);
    best_cost = (best.array() * cost.array()).sum();
  }
  Coupling<Scalar> coupling(std::move(best), nu.weights(), mu.weights());
  return {best_cost, std::move(coupling), visited, Scalar(0), VectorX<Scalar>(), VectorX<Scalar>()};
}

}  // namespace lotdecomp

#endif  // LOTDECOMP_EXACT_OT_HPP
