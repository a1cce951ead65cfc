#pragma once

#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "matnet/layers.hpp"

namespace matnet {

enum class Split { train, val, test };

// Undirected graph with per-node features, labels and split tags. Edges are
// stored deduplicated (one entry per unordered pair, self-loops dropped);
// adjacency lists are kept sorted for deterministic iteration.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;
  Matrix features;            // node_count x feature dim
  std::vector<int> labels;   // empty or node_count entries
  std::vector<Split> split;  // empty or node_count entries

  int degree(int i) const { return static_cast<int>(adjacency[i].size()); }
  std::vector<int> nodes_in_split(Split s) const;
};

// Builds adjacency from an edge list, deduplicating unordered pairs and
// dropping self-loops. Endpoints must lie in [0, node_count).
Graph make_graph(int node_count, const std::vector<std::pair<int, int>>& edge_list);

// Row i holds 1/|N(i)| at i's neighbors, 0 elsewhere; isolated nodes get an
// all-zero row.
Matrix normalized_adjacency(const Graph& g);

// Neighbor-mean aggregation: dense route via the normalized adjacency, and a
// list route that never materializes the |V| x |V| matrix.
Matrix cln_aggregate(const Matrix& h, const Matrix& a_norm);
Matrix cln_aggregate(const Matrix& h, const Graph& g);

// Default node-count bound below which the dense aggregation route is used.
inline constexpr int kDenseAggregationThreshold = 4096;

NodeId cln_aggregate(Tape& t, NodeId h, const Graph& g,
                     int dense_threshold = kDenseAggregationThreshold);

// Per-node gated update combining a node's own state with its neighbor
// aggregate: each of the gate and the candidate applies one linear branch to
// H_prev and one to H_agg (plus a shared row bias), then the gate interpolates
// H_prev against the candidate.
struct ClnUpdateParams {
  Matrix gate_self, gate_agg, gate_bias;  // d x d, d_agg x d, 1 x d
  Matrix cand_self, cand_agg, cand_bias;
  Activation act = Activation::relu;

  static ClnUpdateParams create(int dim, int agg_dim, std::mt19937_64& rng,
                                Activation act = Activation::relu);
  std::size_t parameter_total() const;
};

struct ClnUpdateNodes {
  NodeId gate_self, gate_agg, gate_bias;
  NodeId cand_self, cand_agg, cand_bias;
  Activation act;
};

ClnUpdateNodes bind(Binder& b, ClnUpdateParams& p);

NodeId cln_update(Tape& t, NodeId h_prev, NodeId h_agg, const ClnUpdateNodes& p);
Matrix cln_update_eval(const Matrix& h_prev, const Matrix& h_agg,
                       const ClnUpdateParams& p);

// Bilinear pairwise scorer g(x, y) = x'Wy + a'x + b'y + c.
struct AttentionHeadParams {
  Matrix W;  // d x d
  Matrix a;  // d x 1
  Matrix b;  // d x 1
  Matrix c;  // 1 x 1

  static AttentionHeadParams create(int dim, std::mt19937_64& rng);
  std::size_t parameter_total() const { return W.size() + a.size() + b.size() + c.size(); }
};

struct AttentionHeadNodes {
  NodeId W, a, b, c;
};

AttentionHeadNodes bind(Binder& b, AttentionHeadParams& p);

// Attention matrix over sampled neighborhoods: row i is the softmax of the
// bilinear scores g(h_i, h_j) over j in support[i], zero outside. Isolated
// rows stay all-zero.
NodeId attention_matrix(Tape& t, NodeId h, const AttentionHeadNodes& head,
                        SupportPtr support);
Matrix attention_matrix_eval(const Matrix& h, const AttentionHeadParams& head,
                             const SupportLists& support);

// Per head i: Lambda_i H, concatenated along columns -> |V| x (n_heads * d).
NodeId multi_attention_aggregate(Tape& t, NodeId h,
                                 const std::vector<AttentionHeadNodes>& heads,
                                 SupportPtr support);
Matrix multi_attention_aggregate_eval(const Matrix& h,
                                      const std::vector<AttentionHeadParams>& heads,
                                      const SupportLists& support);

// Symmetric-normalized propagation matrix with self-loops added before
// normalization (the renormalized operator).
Matrix gcn_propagation_matrix(const Graph& g);

// Y = (renormalized propagation) X Theta.
Matrix gcn_propagate(const Matrix& x, const Graph& g, const Matrix& theta);
NodeId gcn_propagate(Tape& t, NodeId x, const Graph& g, NodeId theta);

// Symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2}, and its shifted
// form L - I used by the polynomial filter under the lambda_max ~= 2 bound.
Matrix normalized_laplacian(const Graph& g);
Matrix scaled_laplacian(const Graph& g);

// First K Chebyshev polynomial values T_0..T_{K-1} at x via the two-term
// recursion T_k = 2 x T_{k-1} - T_{k-2}.
std::vector<double> chebyshev_eval(int order, double x);

// (sum_k theta_k T_k(L~)) x evaluated with the same recursion on vectors;
// apply_scaled applies L~ to a column vector. No eigendecomposition.
Matrix chebyshev_graph_filter(const std::function<Matrix(const Matrix&)>& apply_scaled,
                              const Matrix& x, const std::vector<double>& theta);

// Per node, min(k, degree) distinct neighbors drawn without replacement;
// deterministic under a fixed seed.
SupportLists sample_neighbors(const Graph& g, int k, std::mt19937_64& rng);

// Deterministic evaluation-time neighborhoods: full lists capped at k in
// lowest-index order.
SupportLists eval_neighbors(const Graph& g, int k);

}  // namespace matnet
