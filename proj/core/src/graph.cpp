#include "matnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace matnet {

std::vector<int> Graph::nodes_in_split(Split s) const {
  std::vector<int> out;
  for (int i = 0; i < node_count; ++i) {
    if (i < static_cast<int>(split.size()) && split[i] == s) out.push_back(i);
  }
  return out;
}

Graph make_graph(int node_count, const std::vector<std::pair<int, int>>& edge_list) {
  if (node_count < 1) throw ValueError("graph: node_count must be >= 1");
  std::set<std::pair<int, int>> dedup;
  for (auto [u, v] : edge_list) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count) {
      throw ValueError("graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") out of range for " + std::to_string(node_count) + " nodes");
    }
    if (u == v) continue;
    dedup.insert({std::min(u, v), std::max(u, v)});
  }
  Graph g;
  g.node_count = node_count;
  g.edges.assign(dedup.begin(), dedup.end());
  g.adjacency.assign(node_count, {});
  for (auto [u, v] : g.edges) {
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

Matrix normalized_adjacency(const Graph& g) {
  Matrix a(g.node_count, g.node_count);
  for (int i = 0; i < g.node_count; ++i) {
    if (g.adjacency[i].empty()) continue;
    double w = 1.0 / static_cast<double>(g.adjacency[i].size());
    for (int j : g.adjacency[i]) a(i, j) = w;
  }
  return a;
}

Matrix cln_aggregate(const Matrix& h, const Matrix& a_norm) {
  return matmul(a_norm, h);
}

Matrix cln_aggregate(const Matrix& h, const Graph& g) {
  if (h.rows() != g.node_count) {
    throw ShapeError("cln_aggregate: feature rows " + std::to_string(h.rows()) +
                     " != node count " + std::to_string(g.node_count));
  }
  Matrix out(h.rows(), h.cols());
  for (int i = 0; i < g.node_count; ++i) {
    const auto& nbrs = g.adjacency[i];
    if (nbrs.empty()) continue;
    double inv = 1.0 / static_cast<double>(nbrs.size());
    for (int j : nbrs)
      for (int c = 0; c < h.cols(); ++c) out(i, c) += inv * h(j, c);
  }
  return out;
}

NodeId cln_aggregate(Tape& t, NodeId h, const Graph& g, int dense_threshold) {
  if (g.node_count <= dense_threshold) {
    return t.matmul(t.constant(normalized_adjacency(g)), h);
  }
  auto support = std::make_shared<SupportLists>(g.adjacency);
  return t.neighbor_mean(h, support);
}

ClnUpdateParams ClnUpdateParams::create(int dim, int agg_dim, std::mt19937_64& rng,
                                        Activation act) {
  ClnUpdateParams p;
  p.gate_self = glorot_uniform(dim, dim, rng);
  p.gate_agg = glorot_uniform(agg_dim, dim, rng);
  p.gate_bias = Matrix(1, dim);
  p.cand_self = glorot_uniform(dim, dim, rng);
  p.cand_agg = glorot_uniform(agg_dim, dim, rng);
  p.cand_bias = Matrix(1, dim);
  p.act = act;
  return p;
}

std::size_t ClnUpdateParams::parameter_total() const {
  return gate_self.size() + gate_agg.size() + gate_bias.size() + cand_self.size() +
         cand_agg.size() + cand_bias.size();
}

ClnUpdateNodes bind(Binder& b, ClnUpdateParams& p) {
  return {b(p.gate_self), b(p.gate_agg), b(p.gate_bias),
          b(p.cand_self), b(p.cand_agg), b(p.cand_bias), p.act};
}

// H_prev W_self + H_agg W_agg + ones * bias_row, per node.
static NodeId two_branch_affine(Tape& t, NodeId h_prev, NodeId h_agg, NodeId w_self,
                                NodeId w_agg, NodeId bias_row) {
  NodeId ones = t.constant(Matrix::ones(t.value(h_prev).rows(), 1));
  return t.add(t.add(t.matmul(h_prev, w_self), t.matmul(h_agg, w_agg)),
               t.matmul(ones, bias_row));
}

NodeId cln_update(Tape& t, NodeId h_prev, NodeId h_agg, const ClnUpdateNodes& p) {
  NodeId z = t.sigmoid(
      two_branch_affine(t, h_prev, h_agg, p.gate_self, p.gate_agg, p.gate_bias));
  NodeId cand = t.activation(
      two_branch_affine(t, h_prev, h_agg, p.cand_self, p.cand_agg, p.cand_bias), p.act);
  NodeId keep = t.sub(h_prev, t.hadamard(z, h_prev));
  return t.add(keep, t.hadamard(z, cand));
}

Matrix cln_update_eval(const Matrix& h_prev, const Matrix& h_agg,
                       const ClnUpdateParams& p) {
  Matrix ones = Matrix::ones(h_prev.rows(), 1);
  Matrix z = sigmoid(add(add(matmul(h_prev, p.gate_self), matmul(h_agg, p.gate_agg)),
                         matmul(ones, p.gate_bias)));
  Matrix cand = apply_activation(
      add(add(matmul(h_prev, p.cand_self), matmul(h_agg, p.cand_agg)),
          matmul(ones, p.cand_bias)),
      p.act);
  return add(sub(h_prev, hadamard(z, h_prev)), hadamard(z, cand));
}

AttentionHeadParams AttentionHeadParams::create(int dim, std::mt19937_64& rng) {
  AttentionHeadParams p;
  p.W = glorot_uniform(dim, dim, rng);
  p.a = glorot_uniform(dim, 1, rng);
  p.b = glorot_uniform(dim, 1, rng);
  p.c = Matrix(1, 1);
  return p;
}

AttentionHeadNodes bind(Binder& b, AttentionHeadParams& p) {
  return {b(p.W), b(p.a), b(p.b), b(p.c)};
}

// Pairwise scores S_ij = h_i' W h_j + a'h_i + b'h_j + c assembled as
// H W H' + (H a) 1' + 1 (H b)' + 1 c 1'.
static NodeId pairwise_scores(Tape& t, NodeId h, const AttentionHeadNodes& head) {
  const int n = t.value(h).rows();
  NodeId ones_col = t.constant(Matrix::ones(n, 1));
  NodeId ones_row = t.constant(Matrix::ones(1, n));
  NodeId bilinear = t.matmul(t.matmul(h, head.W), t.transpose(h));
  NodeId row_term = t.matmul(t.matmul(h, head.a), ones_row);
  NodeId col_term = t.matmul(ones_col, t.transpose(t.matmul(h, head.b)));
  NodeId const_term = t.matmul(t.matmul(ones_col, head.c), ones_row);
  return t.add_n({bilinear, row_term, col_term, const_term});
}

NodeId attention_matrix(Tape& t, NodeId h, const AttentionHeadNodes& head,
                        SupportPtr support) {
  return t.masked_row_softmax(pairwise_scores(t, h, head), std::move(support));
}

Matrix attention_matrix_eval(const Matrix& h, const AttentionHeadParams& head,
                             const SupportLists& support) {
  const int n = h.rows();
  if (static_cast<int>(support.size()) != n) {
    throw ShapeError("attention_matrix: support size does not match node count");
  }
  Matrix hw = matmul(h, head.W);
  Matrix ha = matmul(h, head.a);
  Matrix hb = matmul(h, head.b);
  Matrix lambda(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = support[i];
    if (nbrs.empty()) continue;
    std::vector<double> scores;
    scores.reserve(nbrs.size());
    for (int j : nbrs) {
      double s = head.c(0, 0) + ha(i, 0) + hb(j, 0);
      for (int d = 0; d < h.cols(); ++d) s += hw(i, d) * h(j, d);
      scores.push_back(s);
    }
    double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double& s : scores) {
      s = std::exp(s - mx);
      z += s;
    }
    for (std::size_t k = 0; k < nbrs.size(); ++k) lambda(i, nbrs[k]) = scores[k] / z;
  }
  return lambda;
}

NodeId multi_attention_aggregate(Tape& t, NodeId h,
                                 const std::vector<AttentionHeadNodes>& heads,
                                 SupportPtr support) {
  if (heads.empty()) throw ValueError("multi_attention_aggregate: need >= 1 head");
  std::vector<NodeId> blocks;
  blocks.reserve(heads.size());
  for (const auto& head : heads) {
    blocks.push_back(t.matmul(attention_matrix(t, h, head, support), h));
  }
  return blocks.size() == 1 ? blocks[0] : t.concat_cols(blocks);
}

Matrix multi_attention_aggregate_eval(const Matrix& h,
                                      const std::vector<AttentionHeadParams>& heads,
                                      const SupportLists& support) {
  if (heads.empty()) throw ValueError("multi_attention_aggregate: need >= 1 head");
  Matrix out(h.rows(), static_cast<int>(heads.size()) * h.cols());
  int off = 0;
  for (const auto& head : heads) {
    Matrix block = matmul(attention_matrix_eval(h, head, support), h);
    for (int i = 0; i < h.rows(); ++i)
      for (int j = 0; j < h.cols(); ++j) out(i, off + j) = block(i, j);
    off += h.cols();
  }
  return out;
}

Matrix gcn_propagation_matrix(const Graph& g) {
  const int n = g.node_count;
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)) + 1.0);
  }
  Matrix p(n, n);
  for (int i = 0; i < n; ++i) {
    p(i, i) = inv_sqrt_deg[i] * inv_sqrt_deg[i];
    for (int j : g.adjacency[i]) p(i, j) = inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  return p;
}

Matrix gcn_propagate(const Matrix& x, const Graph& g, const Matrix& theta) {
  return matmul(matmul(gcn_propagation_matrix(g), x), theta);
}

NodeId gcn_propagate(Tape& t, NodeId x, const Graph& g, NodeId theta) {
  return t.matmul(t.matmul(t.constant(gcn_propagation_matrix(g)), x), theta);
}

Matrix normalized_laplacian(const Graph& g) {
  const int n = g.node_count;
  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (g.degree(i) > 0) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));
  }
  Matrix l = Matrix::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j : g.adjacency[i]) l(i, j) -= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  return l;
}

Matrix scaled_laplacian(const Graph& g) {
  // 2L/lambda_max - I with lambda_max fixed at 2; no eigensolve.
  return sub(normalized_laplacian(g), Matrix::identity(g.node_count));
}

std::vector<double> chebyshev_eval(int order, double x) {
  if (order < 1) throw ValueError("chebyshev_eval: order must be >= 1");
  std::vector<double> t(order);
  t[0] = 1.0;
  if (order > 1) t[1] = x;
  for (int k = 2; k < order; ++k) t[k] = 2.0 * x * t[k - 1] - t[k - 2];
  return t;
}

Matrix chebyshev_graph_filter(const std::function<Matrix(const Matrix&)>& apply_scaled,
                              const Matrix& x, const std::vector<double>& theta) {
  if (theta.empty()) throw ValueError("chebyshev_graph_filter: need >= 1 coefficient");
  Matrix t_prev = x;  // T_0(L)x
  Matrix acc = scale(t_prev, theta[0]);
  if (theta.size() == 1) return acc;
  Matrix t_curr = apply_scaled(x);  // T_1(L)x
  acc = add(acc, scale(t_curr, theta[1]));
  for (std::size_t k = 2; k < theta.size(); ++k) {
    Matrix t_next = sub(scale(apply_scaled(t_curr), 2.0), t_prev);
    acc = add(acc, scale(t_next, theta[k]));
    t_prev = std::move(t_curr);
    t_curr = std::move(t_next);
  }
  return acc;
}

SupportLists sample_neighbors(const Graph& g, int k, std::mt19937_64& rng) {
  if (k < 1) throw ValueError("sample_neighbors: k must be >= 1");
  SupportLists out(g.node_count);
  for (int i = 0; i < g.node_count; ++i) {
    const auto& nbrs = g.adjacency[i];
    if (static_cast<int>(nbrs.size()) <= k) {
      out[i] = nbrs;
      continue;
    }
    // partial Fisher-Yates over a copy, take the first k
    std::vector<int> pool = nbrs;
    for (int s = 0; s < k; ++s) {
      std::uniform_int_distribution<int> pick(s, static_cast<int>(pool.size()) - 1);
      std::swap(pool[s], pool[pick(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    out[i] = std::move(pool);
  }
  return out;
}

SupportLists eval_neighbors(const Graph& g, int k) {
  SupportLists out(g.node_count);
  for (int i = 0; i < g.node_count; ++i) {
    const auto& nbrs = g.adjacency[i];
    int take = std::min<int>(k, static_cast<int>(nbrs.size()));
    out[i].assign(nbrs.begin(), nbrs.begin() + take);
  }
  return out;
}

}  // namespace matnet
