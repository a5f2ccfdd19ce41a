#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbmlift {

// One vertex of a decorated rooted tree. `slot` binds the vertex to a
// frequency (order-3 kernels) and survives cutting; it defaults to the
// vertex index.
struct TreeVertex {
  int parent;  // -1 for the root
  int label;
  int slot;
};

// Vertices are indexed 0..n-1 with the root at 0 and parent(v) < v.
class DecoratedTree {
 public:
  DecoratedTree() = default;
  explicit DecoratedTree(std::vector<TreeVertex> vertices);

  static DecoratedTree singleton(int label, int slot = 0);
  // Linear chain, labels listed from the root upward.
  static DecoratedTree chain(const std::vector<int>& labels);
  static DecoratedTree from_parents(const std::vector<int>& parents,
                                    const std::vector<int>& labels);

  std::size_t size() const { return vertices_.size(); }
  std::span<const TreeVertex> vertices() const { return vertices_; }
  const TreeVertex& operator[](std::size_t v) const { return vertices_[v]; }
  std::vector<int> children(int v) const;
  // True if `ancestor` lies strictly below `v` on the path to the root.
  bool is_ancestor(int ancestor, int v) const;

  // Bracket serialization with children sorted, e.g. "[1[2][3]]".
  std::string canonical() const;
  bool operator==(const DecoratedTree& other) const { return canonical() == other.canonical(); }

 private:
  std::vector<TreeVertex> vertices_;
};

class DecoratedForest {
 public:
  DecoratedForest() = default;
  explicit DecoratedForest(std::vector<DecoratedTree> trees) : trees_(std::move(trees)) {}

  std::span<const DecoratedTree> trees() const { return trees_; }
  std::size_t vertex_count() const;
  // Concatenated canonical components in sorted order, e.g. "[1][2[3]]".
  std::string canonical() const;
  bool operator==(const DecoratedForest& other) const { return canonical() == other.canonical(); }

 private:
  std::vector<DecoratedTree> trees_;
};

// Sorted vertex ids of a nonempty antichain of non-root vertices.
using AdmissibleCut = std::vector<int>;

std::vector<AdmissibleCut> enumerate_admissible_cuts(const DecoratedTree& tree);
bool is_admissible_cut(const DecoratedTree& tree, const AdmissibleCut& cut);

struct CutSplit {
  DecoratedTree left;     // contains the root
  DecoratedForest right;  // one tree per cut vertex, rooted there
};

CutSplit split_cut(const DecoratedTree& tree, const AdmissibleCut& cut);

struct SignedForest {
  int sign;
  DecoratedForest forest;
};

struct SignedForestSum {
  std::vector<SignedForest> terms;
  std::string to_string() const;  // e.g. "+[1][2[3]] -[2[1][3]]"
};

std::string serialize(const DecoratedTree& tree);
std::string serialize(const DecoratedForest& forest);
// Vertices are numbered in preorder; slots equal the vertex ids.
DecoratedTree parse_tree(std::string_view text);
DecoratedForest parse_forest(std::string_view text);

// dGamma_label / du at u.
using PathDerivative = std::function<double(int label, double u)>;

inline constexpr int kDefaultGaussNodes = 64;

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// [I_T]_ts by nested Gauss-Legendre quadrature, one rule per nesting level.
double tree_integral(const DecoratedTree& tree, const PathDerivative& path,
                     double s, double t, int nodes = kDefaultGaussNodes);
double tree_integral(const DecoratedForest& forest, const PathDerivative& path,
                     double s, double t, int nodes = kDefaultGaussNodes);

// |I_ts - I_tu - I_us - sum_cuts I_L(u,t) I_R(s,u)|
double check_tree_chen(const DecoratedTree& tree, const PathDerivative& path,
                       double s, double u, double t, int nodes = kDefaultGaussNodes);

// Residual of I_T(u,t) = Sk_t - Sk_u - sum_cuts I_L(u,t) Sk_R(u), Sk_x = I(b, x).
double check_skeleton_decomposition(const DecoratedTree& tree,
                                    const PathDerivative& path, double base,
                                    double u, double t,
                                    int nodes = kDefaultGaussNodes);

// Rewrites the triple integral over s < u3 < u2 < u1 < t, integrated in the
// order u_{sigma(1)} (outermost) .. u_{sigma(3)}, as signed forests. Vertex j
// of each forest sits in slot j and carries label sigma(j).
SignedForestSum fubini_expand(const std::array<int, 3>& sigma);

// |prod of chain integrals - sum over interleavings|; words of total length <= 3.
double check_shuffle(const std::vector<int>& word1, const std::vector<int>& word2,
                     const PathDerivative& path, double s, double t,
                     int nodes = kDefaultGaussNodes);

}  // namespace fbmlift
