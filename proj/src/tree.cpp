#include "fbmlift/tree.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbmlift {

DecoratedTree::DecoratedTree(std::vector<TreeVertex> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw std::invalid_argument("tree needs at least one vertex");
  if (vertices_[0].parent != -1) throw std::invalid_argument("vertex 0 must be the root");
  for (std::size_t v = 1; v < vertices_.size(); ++v) {
    const int p = vertices_[v].parent;
    if (p < 0 || p >= static_cast<int>(v))
      throw std::invalid_argument("tree vertices must satisfy 0 <= parent(v) < v");
  }
}

DecoratedTree DecoratedTree::singleton(int label, int slot) {
  return DecoratedTree({{-1, label, slot}});
}

DecoratedTree DecoratedTree::chain(const std::vector<int>& labels) {
  std::vector<TreeVertex> vs;
  for (std::size_t k = 0; k < labels.size(); ++k)
    vs.push_back({static_cast<int>(k) - 1, labels[k], static_cast<int>(k)});
  return DecoratedTree(std::move(vs));
}

DecoratedTree DecoratedTree::from_parents(const std::vector<int>& parents,
                                          const std::vector<int>& labels) {
  if (parents.size() != labels.size()) throw std::invalid_argument("parents/labels size mismatch");
  std::vector<TreeVertex> vs;
  for (std::size_t k = 0; k < parents.size(); ++k)
    vs.push_back({parents[k], labels[k], static_cast<int>(k)});
  return DecoratedTree(std::move(vs));
}

std::vector<int> DecoratedTree::children(int v) const {
  std::vector<int> out;
  for (std::size_t w = static_cast<std::size_t>(v) + 1; w < vertices_.size(); ++w)
    if (vertices_[w].parent == v) out.push_back(static_cast<int>(w));
  return out;
}

bool DecoratedTree::is_ancestor(int ancestor, int v) const {
  for (int p = vertices_[v].parent; p >= 0; p = vertices_[p].parent)
    if (p == ancestor) return true;
  return false;
}

std::string DecoratedTree::canonical() const {
  std::function<std::string(int)> rec = [&](int v) {
    std::vector<std::string> parts;
    for (int c : children(v)) parts.push_back(rec(c));
    std::sort(parts.begin(), parts.end());
    std::string out = "[" + std::to_string(vertices_[v].label);
    for (const auto& p : parts) out += p;
    return out + "]";
  };
  return vertices_.empty() ? std::string() : rec(0);
}

std::size_t DecoratedForest::vertex_count() const {
  std::size_t n = 0;
  for (const auto& t : trees_) n += t.size();
  return n;
}

std::string DecoratedForest::canonical() const {
  std::vector<std::string> parts;
  for (const auto& t : trees_) parts.push_back(t.canonical());
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += p;
  return out;
}

std::vector<AdmissibleCut> enumerate_admissible_cuts(const DecoratedTree& tree) {
  std::vector<AdmissibleCut> out;
  AdmissibleCut current;
  const int n = static_cast<int>(tree.size());
  // Ancestors have smaller ids, so checking them at insertion time suffices.
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      if (!current.empty()) out.push_back(current);
      return;
    }
    rec(v + 1);
    bool free = true;
    for (int c : current)
      if (tree.is_ancestor(c, v)) free = false;
    if (free) {
      current.push_back(v);
      rec(v + 1);
      current.pop_back();
    }
  };
  if (n > 1) rec(1);
  return out;
}

bool is_admissible_cut(const DecoratedTree& tree, const AdmissibleCut& cut) {
  if (cut.empty()) return false;
  for (std::size_t a = 0; a < cut.size(); ++a) {
    if (cut[a] <= 0 || cut[a] >= static_cast<int>(tree.size())) return false;
    for (std::size_t b = 0; b < cut.size(); ++b) {
      if (a == b) continue;
      if (cut[a] == cut[b] || tree.is_ancestor(cut[a], cut[b])) return false;
    }
  }
  return true;
}

namespace {

// Subtree of `tree` on the ascending vertex list `keep`, whose first entry
// becomes the root.
DecoratedTree restrict_to(const DecoratedTree& tree, const std::vector<int>& keep) {
  std::vector<int> index(tree.size(), -1);
  std::vector<TreeVertex> vs;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const TreeVertex& src = tree[keep[k]];
    index[keep[k]] = static_cast<int>(k);
    vs.push_back({k == 0 ? -1 : index[src.parent], src.label, src.slot});
  }
  return DecoratedTree(std::move(vs));
}

}  // namespace

CutSplit split_cut(const DecoratedTree& tree, const AdmissibleCut& cut) {
  if (!is_admissible_cut(tree, cut)) throw std::invalid_argument("split_cut: inadmissible cut");
  AdmissibleCut sorted = cut;
  std::sort(sorted.begin(), sorted.end());
  std::vector<bool> taken(tree.size(), false);
  std::vector<DecoratedTree> right;
  for (int c : sorted) {
    std::vector<int> keep;
    for (int v = 0; v < static_cast<int>(tree.size()); ++v)
      if (v == c || tree.is_ancestor(c, v)) {
        keep.push_back(v);
        taken[v] = true;
      }
    right.push_back(restrict_to(tree, keep));
  }
  std::vector<int> rest;
  for (int v = 0; v < static_cast<int>(tree.size()); ++v)
    if (!taken[v]) rest.push_back(v);
  return {restrict_to(tree, rest), DecoratedForest(std::move(right))};
}

std::string SignedForestSum::to_string() const {
  std::string out;
  for (const auto& term : terms) {
    if (!out.empty()) out += " ";
    out += term.sign > 0 ? "+" : "-";
    out += serialize(term.forest);
  }
  return out;
}

std::string serialize(const DecoratedTree& tree) { return tree.canonical(); }
std::string serialize(const DecoratedForest& forest) { return forest.canonical(); }

namespace {

struct BracketParser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("bracket parse error at " + std::to_string(pos) + ": " + why);
  }

  void tree(std::vector<TreeVertex>& out, int parent) {
    if (pos >= text.size() || text[pos] != '[') fail("expected '['");
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected a label");
    const int label = std::stoi(std::string(text.substr(start, pos - start)));
    const int id = static_cast<int>(out.size());
    out.push_back({parent, label, id});
    while (pos < text.size() && text[pos] == '[') tree(out, id);
    if (pos >= text.size() || text[pos] != ']') fail("expected ']'");
    ++pos;
  }
};

}  // namespace

DecoratedTree parse_tree(std::string_view text) {
  BracketParser p{text};
  std::vector<TreeVertex> vs;
  p.tree(vs, -1);
  if (p.pos != text.size()) p.fail("trailing characters");
  return DecoratedTree(std::move(vs));
}

DecoratedForest parse_forest(std::string_view text) {
  BracketParser p{text};
  std::vector<DecoratedTree> trees;
  while (p.pos < text.size()) {
    std::vector<TreeVertex> vs;
    p.tree(vs, -1);
    trees.emplace_back(std::move(vs));
  }
  return DecoratedForest(std::move(trees));
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

class NestedIntegrator {
 public:
  NestedIntegrator(const DecoratedTree& tree, const PathDerivative& path, int nodes)
      : tree_(tree), path_(path) {
    gauss_legendre(nodes, x_, w_);
    for (std::size_t v = 0; v < tree.size(); ++v) kids_.push_back(tree.children(static_cast<int>(v)));
  }

  // int_s^upper dGamma_{label(v)}(y) prod_children value(child, s, y)
  double value(int v, double s, double upper) const {
    if (upper == s) return 0.0;
    const double half = 0.5 * (upper - s);
    const double mid = 0.5 * (upper + s);
    double acc = 0.0;
    for (std::size_t k = 0; k < x_.size(); ++k) {
      const double y = mid + half * x_[k];
      double f = path_(tree_[v].label, y);
      for (int c : kids_[v]) f *= value(c, s, y);
      acc += w_[k] * f;
    }
    return half * acc;
  }

 private:
  const DecoratedTree& tree_;
  const PathDerivative& path_;
  std::vector<double> x_, w_;
  std::vector<std::vector<int>> kids_;
};

}  // namespace

double tree_integral(const DecoratedTree& tree, const PathDerivative& path,
                     double s, double t, int nodes) {
  return NestedIntegrator(tree, path, nodes).value(0, s, t);
}

double tree_integral(const DecoratedForest& forest, const PathDerivative& path,
                     double s, double t, int nodes) {
  double prod = 1.0;
  for (const auto& tr : forest.trees()) prod *= tree_integral(tr, path, s, t, nodes);
  return prod;
}

double check_tree_chen(const DecoratedTree& tree, const PathDerivative& path,
                       double s, double u, double t, int nodes) {
  const double delta = tree_integral(tree, path, s, t, nodes) -
                       tree_integral(tree, path, u, t, nodes) -
                       tree_integral(tree, path, s, u, nodes);
  double cuts = 0.0;
  for (const auto& cut : enumerate_admissible_cuts(tree)) {
    const CutSplit sp = split_cut(tree, cut);
    cuts += tree_integral(sp.left, path, u, t, nodes) *
            tree_integral(sp.right, path, s, u, nodes);
  }
  return std::abs(delta - cuts);
}

double check_skeleton_decomposition(const DecoratedTree& tree,
                                    const PathDerivative& path, double base,
                                    double u, double t, int nodes) {
  const double lhs = tree_integral(tree, path, u, t, nodes);
  double rhs = tree_integral(tree, path, base, t, nodes) -
               tree_integral(tree, path, base, u, nodes);
  for (const auto& cut : enumerate_admissible_cuts(tree)) {
    const CutSplit sp = split_cut(tree, cut);
    rhs -= tree_integral(sp.left, path, u, t, nodes) *
           tree_integral(sp.right, path, base, u, nodes);
  }
  return std::abs(lhs - rhs);
}

SignedForestSum fubini_expand(const std::array<int, 3>& sigma) {
  std::array<bool, 4> seen{};
  for (int k : sigma) {
    if (k < 1 || k > 3 || seen[k]) throw std::invalid_argument("fubini_expand: not a permutation of {1,2,3}");
    seen[k] = true;
  }
  // slot_of[k] = integration position of variable u_k.
  std::array<int, 4> slot_of{};
  for (int j = 0; j < 3; ++j) slot_of[sigma[j]] = j;

  // Per position: list of (sign, parent slot) alternatives.
  std::array<std::vector<std::pair<int, int>>, 3> choices;
  for (int j = 0; j < 3; ++j) {
    const int k = sigma[j];
    int lower = -1, upper = -1;  // variable indices of the nearest fixed bounds
    for (int m = k + 1; m <= 3 && lower < 0; ++m)
      if (slot_of[m] < j) lower = m;
    for (int m = k - 1; m >= 1 && upper < 0; --m)
      if (slot_of[m] < j) upper = m;
    const int up_parent = upper < 0 ? -1 : slot_of[upper];
    // int_L^U = int_s^U - int_s^L
    choices[j].push_back({+1, up_parent});
    if (lower >= 0) choices[j].push_back({-1, slot_of[lower]});
  }

  SignedForestSum out;
  for (const auto& c0 : choices[0])
    for (const auto& c1 : choices[1])
      for (const auto& c2 : choices[2]) {
        const std::array<int, 3> parent{c0.second, c1.second, c2.second};
        std::vector<DecoratedTree> trees;
        for (int r = 0; r < 3; ++r) {
          if (parent[r] != -1) continue;
          // Collect the component of root r; parents precede children.
          std::vector<int> members{r};
          for (int v = r + 1; v < 3; ++v)
            if (std::find(members.begin(), members.end(), parent[v]) != members.end())
              members.push_back(v);
          std::vector<TreeVertex> vs;
          for (std::size_t q = 0; q < members.size(); ++q) {
            const int v = members[q];
            int p = -1;
            if (q > 0)
              p = static_cast<int>(std::find(members.begin(), members.end(), parent[v]) - members.begin());
            vs.push_back({p, sigma[v], v});
          }
          trees.emplace_back(std::move(vs));
        }
        out.terms.push_back({c0.first * c1.first * c2.first, DecoratedForest(std::move(trees))});
      }
  return out;
}

double check_shuffle(const std::vector<int>& word1, const std::vector<int>& word2,
                     const PathDerivative& path, double s, double t, int nodes) {
  const std::size_t n1 = word1.size(), n2 = word2.size(), n = n1 + n2;
  if (n1 == 0 || n2 == 0 || n > 3)
    throw std::invalid_argument("check_shuffle: words must be nonempty with total length <= 3");
  const double product = tree_integral(DecoratedTree::chain(word1), path, s, t, nodes) *
                         tree_integral(DecoratedTree::chain(word2), path, s, t, nodes);
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != n1) continue;
    std::vector<int> word;
    std::size_t a = 0, b = 0;
    for (std::size_t k = 0; k < n; ++k)
      word.push_back((mask >> k) & 1u ? word1[a++] : word2[b++]);
    sum += tree_integral(DecoratedTree::chain(word), path, s, t, nodes);
  }
  return std::abs(product - sum);
}

}  // namespace fbmlift
