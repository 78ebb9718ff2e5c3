#include <algorithm>
#include <cmath>
#include <vector>

#include "sphereot/solver.hpp"

namespace sphereot {
namespace detail {

// Primal transportation simplex on the dense bipartite graph. The basis is a
// spanning tree over sources 0..n1-1 and sinks n1..n1+n2-1. Supplies are
// perturbed to keep pivots nondegenerate; the final flows are recomputed from
// the optimal basis with the unperturbed data (basis optimality depends on
// reduced costs only).
class TransportSimplex {
 public:
  TransportSimplex(const Mat& cost, Vec supply, Vec demand)
      : C_(cost),
        n1_(static_cast<int>(supply.size())),
        n2_(static_cast<int>(demand.size())),
        a_(std::move(supply)),
        b_(std::move(demand)) {}

  Mat solve() {
    const double total = a_.sum();
    const double delta = 2e-11 * total / (static_cast<double>(n1_) * (n1_ + 1));
    Vec pa = a_, pb = b_;
    for (int i = 0; i < n1_; ++i) pa(i) += delta * (i + 1);
    pb(n2_ - 1) += delta * (static_cast<double>(n1_) * (n1_ + 1) / 2.0);

    northwest_corner(pa, pb);
    rebuild_tree();

    const double tol = 1e-11 * (1.0 + C_.cwiseAbs().maxCoeff());
    const long max_pivots = 300L * (n1_ + n2_) + 10000L;
    for (long pivot = 0;; ++pivot) {
      if (pivot > max_pivots)
        throw NoConvergence(static_cast<int>(pivot), 0.0,
                            "network simplex exceeded its pivot limit");
      int ei = -1, ej = -1;
      double best = -tol;
      for (int i = 0; i < n1_; ++i) {
        const double ui = u_(i);
        for (int j = 0; j < n2_; ++j) {
          const double r = C_(i, j) - ui - v_(j);
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
          }
        }
      }
      if (ei < 0) break;  // reduced-cost optimal
      pivot_on(ei, ej);
    }
    return flows_with(a_, b_);
  }

 private:
  struct Arc {
    int src, snk;
    double flow;
  };

  void northwest_corner(Vec rema, Vec remb) {
    arcs_.clear();
    int i = 0, j = 0;
    while (static_cast<int>(arcs_.size()) < n1_ + n2_ - 1) {
      const double t = std::min(rema(i), remb(j));
      arcs_.push_back({i, j, t});
      rema(i) -= t;
      remb(j) -= t;
      if (rema(i) <= remb(j) && i < n1_ - 1)
        ++i;
      else
        ++j;
    }
  }

  void rebuild_tree() {
    const int V = n1_ + n2_;
    adj_.assign(V, {});
    for (int k = 0; k < static_cast<int>(arcs_.size()); ++k) {
      adj_[arcs_[k].src].push_back(k);
      adj_[n1_ + arcs_[k].snk].push_back(k);
    }
    parent_.assign(V, -1);
    parent_arc_.assign(V, -1);
    depth_.assign(V, 0);
    u_.resize(n1_);
    v_.resize(n2_);
    // BFS from source 0 with u_0 = 0
    std::vector<int> queue{0};
    std::vector<char> seen(V, 0);
    seen[0] = 1;
    u_(0) = 0.0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int node = queue[q];
      for (int k : adj_[node]) {
        const Arc& arc = arcs_[k];
        const int other = (node == arc.src) ? n1_ + arc.snk : arc.src;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_[other] = node;
        parent_arc_[other] = k;
        depth_[other] = depth_[node] + 1;
        if (other >= n1_)
          v_(other - n1_) = C_(arc.src, arc.snk) - u_(arc.src);
        else
          u_(other) = C_(arc.src, arc.snk) - v_(arc.snk);
        queue.push_back(other);
      }
    }
  }

  void pivot_on(int ei, int ej) {
    // cycle = entering arc + tree path between its endpoints
    const int from = ei, to = n1_ + ej;
    std::vector<int> up_from, up_to;
    for (int x = from; x >= 0; x = parent_[x]) up_from.push_back(x);
    for (int x = to; x >= 0; x = parent_[x]) up_to.push_back(x);
    std::vector<char> mark(static_cast<std::size_t>(n1_ + n2_), 0);
    for (int x : up_from) mark[static_cast<std::size_t>(x)] = 1;
    int lca = -1;
    for (int x : up_to)
      if (mark[static_cast<std::size_t>(x)]) {
        lca = x;
        break;
      }

    // walking from the sink side toward the source side: arcs traversed
    // sink->source lose flow, source->sink gain flow
    double theta = 1e300;
    int leaving = -1;
    auto scan = [&](int start, bool sink_side) {
      for (int x = start; x != lca; x = parent_[x]) {
        const Arc& arc = arcs_[parent_arc_[x]];
        const bool toward_source = sink_side ? (x >= n1_) : (x < n1_);
        // on the sink-side path the traversal direction is x -> parent; on
        // the source side the cycle direction is parent -> x, so the role
        // flips
        const bool decreasing = toward_source;
        if (decreasing && arc.flow < theta) {
          theta = arc.flow;
          leaving = parent_arc_[x];
        }
      }
    };
    scan(to, true);
    scan(from, false);

    for (int x = to; x != lca; x = parent_[x]) {
      Arc& arc = arcs_[parent_arc_[x]];
      arc.flow += (x >= n1_) ? -theta : theta;
    }
    for (int x = from; x != lca; x = parent_[x]) {
      Arc& arc = arcs_[parent_arc_[x]];
      arc.flow += (x < n1_) ? -theta : theta;
    }
    arcs_[static_cast<std::size_t>(leaving)] = {ei, ej, theta};
    rebuild_tree();
  }

  Mat flows_with(const Vec& a, const Vec& b) const {
    const int V = n1_ + n2_;
    Vec excess(V);
    excess.head(n1_) = a;
    excess.tail(n2_) = -b;
    std::vector<int> order(V);
    for (int x = 0; x < V; ++x) order[static_cast<std::size_t>(x)] = x;
    std::sort(order.begin(), order.end(),
              [&](int p, int q) { return depth_[p] > depth_[q]; });
    Mat X = Mat::Zero(n1_, n2_);
    for (int node : order) {
      if (parent_[node] < 0) continue;
      const Arc& arc = arcs_[parent_arc_[node]];
      double f;
      if (node < n1_) {
        f = excess(node);  // source leaf sends its excess to the parent sink
        excess(n1_ + arc.snk) += f;
      } else {
        f = -excess(node);  // sink leaf pulls what it still lacks
        excess(arc.src) -= f;
      }
      X(arc.src, arc.snk) += std::max(0.0, f);
    }
    return X;
  }

  const Mat& C_;
  int n1_, n2_;
  Vec a_, b_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_;
  Vec u_, v_;
};

Mat network_simplex_transport(const Mat& cost, const Vec& supply,
                              const Vec& demand) {
  return TransportSimplex(cost, supply, demand).solve();
}

}  // namespace detail
}  // namespace sphereot
