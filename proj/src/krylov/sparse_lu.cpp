#include "fsi/krylov/sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace fsi::krylov {

namespace {

// Adjacency of A + A' without the diagonal.
std::vector<std::vector<Index>> symmetric_adjacency(const CsrMatrix& a) {
  const Index n = a.rows();
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  for (Index i = 0; i < n; ++i) {
    for (Index p = rp[i]; p < rp[i + 1]; ++p) {
      const Index j = ci[p];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

// BFS levels from `root`; returns the last level's nodes and the depth.
std::pair<std::vector<Index>, int> bfs_last_level(const std::vector<std::vector<Index>>& adj, Index root,
                                                  std::vector<int>& level) {
  std::fill(level.begin(), level.end(), -1);
  std::vector<Index> frontier{root};
  level[root] = 0;
  int depth = 0;
  std::vector<Index> last = frontier;
  while (!frontier.empty()) {
    last = frontier;
    std::vector<Index> next;
    for (Index u : frontier)
      for (Index w : adj[u])
        if (level[w] < 0) {
          level[w] = depth + 1;
          next.push_back(w);
        }
    if (!next.empty()) ++depth;
    frontier = std::move(next);
  }
  return {last, depth};
}

}  // namespace

std::vector<Index> reverse_cuthill_mckee(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw Error("reverse_cuthill_mckee: matrix not square");
  const Index n = a.rows();
  const auto adj = symmetric_adjacency(a);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  auto degree = [&](Index v) { return adj[v].size(); };

  for (Index seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    // Pseudo-peripheral start node (George-Liu).
    Index root = seed;
    auto [last, depth] = bfs_last_level(adj, root, level);
    for (int it = 0; it < 8; ++it) {
      Index cand = *std::min_element(last.begin(), last.end(),
                                     [&](Index x, Index y) { return degree(x) < degree(y); });
      auto [l2, d2] = bfs_last_level(adj, cand, level);
      if (d2 <= depth) break;
      root = cand;
      last = std::move(l2);
      depth = d2;
    }
    std::queue<Index> bfs;
    bfs.push(root);
    visited[root] = 1;
    std::vector<Index> nbrs;
    while (!bfs.empty()) {
      const Index u = bfs.front();
      bfs.pop();
      order.push_back(u);
      nbrs.clear();
      for (Index w : adj[u])
        if (!visited[w]) {
          visited[w] = 1;
          nbrs.push_back(w);
        }
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](Index x, Index y) { return degree(x) < degree(y); });
      for (Index w : nbrs) bfs.push(w);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

SparseLU::SparseLU(const CsrMatrix& a, double pivot_threshold) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw Error("SparseLU: matrix not square");
  const Index n = n_;
  q_ = reverse_cuthill_mckee(a);

  // CSC of A is the CSR of A'.
  const CsrMatrix at = a.transpose();
  const auto ap = at.row_ptr();
  const auto ai = at.col_idx();
  const auto ax = at.values();

  pinv_.assign(static_cast<std::size_t>(n), -1);
  lp_.assign(static_cast<std::size_t>(n) + 1, 0);
  up_.assign(static_cast<std::size_t>(n) + 1, 0);
  const std::size_t guess = static_cast<std::size_t>(4 * a.nnz() + n);
  li_.reserve(guess);
  lx_.reserve(guess);
  ui_.reserve(guess);
  ux_.reserve(guess);

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> xi(static_cast<std::size_t>(2 * n));
  std::vector<Index> stack(static_cast<std::size_t>(n));
  std::vector<Index> pstack(static_cast<std::size_t>(n));
  std::vector<Index> mark(static_cast<std::size_t>(n), -1);

  for (Index k = 0; k < n; ++k) {
    lp_[k] = static_cast<Index>(li_.size());
    up_[k] = static_cast<Index>(ui_.size());
    const Index col = q_[k];

    // Nonzero pattern of L \ A(:,col) via depth-first search in the graph of L.
    // Rows not yet pivotal are leaves. Output in topological order xi[top..n).
    Index top = n;
    double colmax = 0.0;
    for (Index p = ap[col]; p < ap[col + 1]; ++p) {
      colmax = std::max(colmax, std::abs(ax[p]));
      const Index start = ai[p];
      if (mark[start] == k) continue;
      Index head = 0;
      stack[0] = start;
      while (head >= 0) {
        const Index j = stack[head];
        const Index jcol = pinv_[j];
        if (mark[j] != k) {
          mark[j] = k;
          pstack[head] = jcol < 0 ? 0 : lp_[jcol] + 1;  // skip unit diagonal
        }
        bool done = true;
        if (jcol >= 0) {
          const Index end = lp_[jcol + 1];
          for (Index p2 = pstack[head]; p2 < end; ++p2) {
            const Index i = li_[p2];
            if (mark[i] == k) continue;
            pstack[head] = p2 + 1;
            stack[++head] = i;
            done = false;
            break;
          }
        }
        if (done) {
          --head;
          xi[--top] = j;
        }
      }
    }

    // Numeric sparse triangular solve.
    for (Index p = top; p < n; ++p) x[xi[p]] = 0.0;
    for (Index p = ap[col]; p < ap[col + 1]; ++p) x[ai[p]] = ax[p];
    for (Index p = top; p < n; ++p) {
      const Index j = xi[p];
      const Index jcol = pinv_[j];
      if (jcol < 0) continue;
      const double xj = x[j];
      for (Index q = lp_[jcol] + 1; q < lp_[jcol + 1]; ++q) x[li_[q]] -= lx_[q] * xj;
    }

    // Pivot selection.
    Index ipiv = -1;
    double amax = -1.0;
    for (Index p = top; p < n; ++p) {
      const Index i = xi[p];
      if (pinv_[i] < 0) {
        const double t = std::abs(x[i]);
        if (t > amax) {
          amax = t;
          ipiv = i;
        }
      } else {
        ui_.push_back(pinv_[i]);
        ux_.push_back(x[i]);
      }
    }
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * colmax;
    if (ipiv < 0 || amax <= tiny || !std::isfinite(amax)) {
      throw SingularMatrixError(k, "SparseLU: matrix is singular at pivot " + std::to_string(k) +
                                       " (column " + std::to_string(col) + ")");
    }
    if (pinv_[col] < 0 && std::abs(x[col]) >= pivot_threshold * amax) ipiv = col;

    const double pivot = x[ipiv];
    ui_.push_back(k);
    ux_.push_back(pivot);
    pinv_[ipiv] = k;
    li_.push_back(ipiv);
    lx_.push_back(1.0);
    for (Index p = top; p < n; ++p) {
      const Index i = xi[p];
      if (pinv_[i] < 0) {
        li_.push_back(i);
        lx_.push_back(x[i] / pivot);
      }
      x[i] = 0.0;
    }
  }
  lp_[n] = static_cast<Index>(li_.size());
  up_[n] = static_cast<Index>(ui_.size());
  for (Index& i : li_) i = pinv_[i];
}

void SparseLU::solve(std::span<const double> b, std::span<double> x) const {
  const Index n = n_;
  if (b.size() != static_cast<std::size_t>(n) || x.size() != static_cast<std::size_t>(n))
    throw Error("SparseLU::solve: size mismatch");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) w[pinv_[i]] = b[i];
  for (Index j = 0; j < n; ++j) {
    const double wj = w[j];
    if (wj == 0.0) continue;
    for (Index p = lp_[j] + 1; p < lp_[j + 1]; ++p) w[li_[p]] -= lx_[p] * wj;
  }
  for (Index j = n - 1; j >= 0; --j) {
    w[j] /= ux_[up_[j + 1] - 1];
    const double wj = w[j];
    if (wj == 0.0) continue;
    for (Index p = up_[j]; p < up_[j + 1] - 1; ++p) w[ui_[p]] -= ux_[p] * wj;
  }
  for (Index k = 0; k < n; ++k) x[q_[k]] = w[k];
}

std::vector<double> SparseLU::solve(std::span<const double> b) const {
  std::vector<double> x(b.size());
  solve(b, x);
  return x;
}

}  // namespace fsi::krylov
