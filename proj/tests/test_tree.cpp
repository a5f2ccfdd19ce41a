#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "fbmlift/tree.hpp"

using namespace fbmlift;

namespace {

// Gamma_i(u) = u for every component.
double linear_path(int, double) { return 1.0; }

// Gamma_i(u) = u^2 / 2 + i u, a polynomial path.
double poly_path(int label, double u) { return u + label; }

// Gamma_i(u) = sin(w_i u + p_i) + 0.3 u.
double trig_path(int label, double u) {
  static const double w[3] = {1.3, 2.1, 0.7};
  static const double ph[3] = {0.2, -0.5, 1.1};
  const int i = (label - 1) % 3;
  return w[i] * std::cos(w[i] * u + ph[i]) + 0.3;
}

double trig_value(int label, double u) {
  static const double w[3] = {1.3, 2.1, 0.7};
  static const double ph[3] = {0.2, -0.5, 1.1};
  const int i = (label - 1) % 3;
  return std::sin(w[i] * u + ph[i]) + 0.3 * u;
}

std::set<std::vector<int>> as_set(const std::vector<AdmissibleCut>& cuts) {
  return {cuts.begin(), cuts.end()};
}

// Every rooted tree shape with n vertices in parent-array form (parent[v] < v).
void for_each_shape(int n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> parent(n, -1);
  std::function<void(int)> rec = [&](int v) {
    if (v == n) return f(parent);
    for (int p = 0; p < v; ++p) {
      parent[v] = p;
      rec(v + 1);
    }
  };
  rec(1);
}

std::vector<DecoratedTree> fubini_components() {
  std::vector<DecoratedTree> out;
  std::set<std::string> seen;
  std::array<int, 3> sigma{1, 2, 3};
  do {
    for (const auto& term : fubini_expand(sigma).terms)
      for (const auto& tr : term.forest.trees())
        if (seen.insert(tr.canonical()).second) out.push_back(tr);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

}  // namespace

TEST(Serialize, RoundTrip) {
  for (const char* text : {"[1]", "[1[2]]", "[1[2][3]]", "[2[1[3]][1]]", "[1[2[3[4[5]]]]]"}) {
    const DecoratedTree t = parse_tree(text);
    EXPECT_EQ(serialize(t), text);
    EXPECT_EQ(parse_tree(serialize(t)), t);
  }
  const DecoratedForest f = parse_forest("[1][2[3]]");
  EXPECT_EQ(f.trees().size(), 2u);
  EXPECT_EQ(f.vertex_count(), 3u);
  EXPECT_EQ(serialize(f), "[1][2[3]]");
}

TEST(Serialize, CanonicalSortsChildren) {
  EXPECT_EQ(parse_tree("[1[3][2]]").canonical(), "[1[2][3]]");
  EXPECT_EQ(parse_tree("[1[3][2]]"), parse_tree("[1[2][3]]"));
  EXPECT_NE(parse_tree("[1[2[3]]]"), parse_tree("[1[2][3]]"));
  EXPECT_EQ(parse_forest("[2[3]][1]").canonical(), "[1][2[3]]");
}

TEST(Serialize, RejectsMalformed) {
  for (const char* bad : {"", "[", "[1", "1]", "[a]", "[1]]", "[1][2]"}) EXPECT_THROW(parse_tree(bad), std::invalid_argument) << bad;
  EXPECT_THROW(parse_forest("[1]x"), std::invalid_argument);
}

TEST(AdmissibleCuts, Singleton) {
  EXPECT_TRUE(enumerate_admissible_cuts(DecoratedTree::singleton(1)).empty());
}

TEST(AdmissibleCuts, Cherry) {
  const DecoratedTree cherry = parse_tree("[1[2][3]]");
  const auto cuts = enumerate_admissible_cuts(cherry);
  EXPECT_EQ(cuts.size(), 3u);
  EXPECT_EQ(as_set(cuts), (std::set<std::vector<int>>{{1}, {2}, {1, 2}}));
}

TEST(AdmissibleCuts, Chain) {
  const auto cuts = enumerate_admissible_cuts(DecoratedTree::chain({1, 2, 3}));
  EXPECT_EQ(as_set(cuts), (std::set<std::vector<int>>{{1}, {2}}));
  EXPECT_FALSE(is_admissible_cut(DecoratedTree::chain({1, 2, 3}), {1, 2}));
  EXPECT_FALSE(is_admissible_cut(DecoratedTree::chain({1, 2, 3}), {0}));
  EXPECT_FALSE(is_admissible_cut(DecoratedTree::chain({1, 2, 3}), {}));
}

TEST(AdmissibleCuts, MatchesAntichainFilterExhaustively) {
  int trees = 0;
  for (int n = 1; n <= 5; ++n) {
    for_each_shape(n, [&](const std::vector<int>& parent) {
      for (int lab = 0; lab < (1 << n); ++lab) {
        std::vector<int> labels(n);
        for (int k = 0; k < n; ++k) labels[k] = 1 + ((lab >> k) & 1);
        const DecoratedTree t = DecoratedTree::from_parents(parent, labels);
        std::set<std::vector<int>> brute;
        for (int mask = 2; mask < (1 << n); mask += 2) {
          std::vector<int> set;
          for (int k = 1; k < n; ++k)
            if (mask >> k & 1) set.push_back(k);
          bool antichain = true;
          for (int a : set)
            for (int b : set)
              if (a != b && t.is_ancestor(a, b)) antichain = false;
          if (antichain) brute.insert(set);
        }
        const auto cuts = enumerate_admissible_cuts(t);
        EXPECT_EQ(cuts.size(), as_set(cuts).size());
        EXPECT_EQ(as_set(cuts), brute) << serialize(t);
        ++trees;
      }
    });
  }
  EXPECT_EQ(trees, 2 * 1 + 4 * 1 + 8 * 2 + 16 * 6 + 32 * 24);
}

TEST(SplitCut, Examples) {
  const CutSplit chain = split_cut(DecoratedTree::chain({1, 2}), {1});
  EXPECT_EQ(serialize(chain.left), "[1]");
  EXPECT_EQ(serialize(chain.right), "[2]");

  const CutSplit cherry = split_cut(parse_tree("[1[2][3]]"), {1, 2});
  EXPECT_EQ(serialize(cherry.left), "[1]");
  EXPECT_EQ(cherry.right.canonical(), "[2][3]");
  EXPECT_THROW(split_cut(DecoratedTree::chain({1, 2, 3}), {1, 2}), std::invalid_argument);
}

TEST(SplitCut, ConservesVerticesAndLabels) {
  std::mt19937_64 rng(77);
  int checked = 0;
  while (checked < 1000) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<int> parent(n, -1), labels(n);
    for (int v = 1; v < n; ++v) parent[v] = static_cast<int>(rng() % v);
    for (int v = 0; v < n; ++v) labels[v] = 1 + static_cast<int>(rng() % 3);
    const DecoratedTree t = DecoratedTree::from_parents(parent, labels);
    const auto cuts = enumerate_admissible_cuts(t);
    const AdmissibleCut& cut = cuts[rng() % cuts.size()];
    const CutSplit sp = split_cut(t, cut);
    EXPECT_EQ(sp.left.size() + sp.right.vertex_count(), t.size());

    std::multiset<std::pair<int, int>> before, after;
    for (const auto& v : t.vertices()) before.insert({v.slot, v.label});
    for (const auto& v : sp.left.vertices()) after.insert({v.slot, v.label});
    for (const auto& tr : sp.right.trees())
      for (const auto& v : tr.vertices()) after.insert({v.slot, v.label});
    EXPECT_EQ(before, after);

    std::set<int> roots, cut_slots;
    for (const auto& tr : sp.right.trees()) roots.insert(tr[0].slot);
    for (int v : cut) cut_slots.insert(t[v].slot);
    EXPECT_EQ(roots, cut_slots);
    ++checked;
  }
}

TEST(TreeIntegral, Examples) {
  const double s = 0.2, t = 1.3;
  for (int i : {1, 2, 3})
    EXPECT_NEAR(tree_integral(DecoratedTree::singleton(i), trig_path, s, t), trig_value(i, t) - trig_value(i, s), 1e-13);
  EXPECT_NEAR(tree_integral(DecoratedTree::chain({1, 2}), linear_path, 0.0, 1.0), 0.5, 1e-14);
  EXPECT_NEAR(tree_integral(DecoratedTree::chain({1, 2, 3}), linear_path, 0.0, 1.0), 1.0 / 6.0, 1e-14);
  // Cherry with linear path: int_0^1 u^2 du = 1/3.
  EXPECT_NEAR(tree_integral(parse_tree("[1[2][3]]"), linear_path, 0.0, 1.0), 1.0 / 3.0, 1e-14);
}

TEST(TreeIntegral, PolynomialChain) {
  // int_0^1 (u1 + 1) int_0^{u1} (u2 + 2) du2 du1 = int_0^1 (u1 + 1)(u1^2/2 + 2 u1) du1.
  const double expect = 1.0 / 8.0 + 2.0 / 3.0 + 1.0 / 6.0 + 1.0;
  EXPECT_NEAR(tree_integral(DecoratedTree::chain({1, 2}), poly_path, 0.0, 1.0), expect, 1e-13);
}

TEST(TreeIntegral, ForestOrderIrrelevant) {
  const DecoratedForest a = parse_forest("[1][2[3]]"), b = parse_forest("[2[3]][1]");
  EXPECT_NEAR(tree_integral(a, trig_path, -0.4, 0.9), tree_integral(b, trig_path, -0.4, 0.9), 1e-14);
  EXPECT_NEAR(tree_integral(a, trig_path, -0.4, 0.9),
              tree_integral(DecoratedTree::singleton(1), trig_path, -0.4, 0.9) *
                  tree_integral(DecoratedTree::chain({2, 3}), trig_path, -0.4, 0.9),
              1e-14);
}

TEST(TreeChen, SingletonExact) {
  EXPECT_EQ(check_tree_chen(DecoratedTree::singleton(2), linear_path, 0.0, 0.5, 1.0), 0.0);
}

TEST(TreeChen, PolynomialChain) {
  EXPECT_LT(check_tree_chen(DecoratedTree::chain({1, 2}), poly_path, -0.5, 0.3, 1.1), 1e-10);
}

TEST(TreeChen, FubiniTreesTrigPath) {
  for (const auto& t : fubini_components())
    for (auto [s, u, tt] : {std::array{0.0, 0.4, 1.0}, {-0.7, 0.1, 0.9}, {0.2, 1.3, 1.5}})
      EXPECT_LT(check_tree_chen(t, trig_path, s, u, tt), 1e-8) << serialize(t);
}

TEST(Skeleton, BaseAtLeftEndpoint) {
  for (const auto& t : fubini_components()) EXPECT_LT(check_skeleton_decomposition(t, trig_path, 0.4, 0.4, 1.2), 1e-10);
}

TEST(Skeleton, PolynomialChain) {
  EXPECT_LT(check_skeleton_decomposition(DecoratedTree::chain({1, 2}), poly_path, -1.0, 0.2, 0.8), 1e-10);
}

TEST(Skeleton, CherryTrigPath) {
  EXPECT_LT(check_skeleton_decomposition(parse_tree("[1[2][3]]"), trig_path, 0.0, 0.3, 1.4), 1e-8);
}

TEST(Skeleton, ResidualsShrinkWithNodes) {
  const DecoratedTree t = parse_tree("[1[2][3]]");
  // A rougher path makes the low-node error visible.
  auto path = [](int label, double u) { return std::cos(7.0 * label * u); };
  const double chen4 = check_tree_chen(t, path, 0.0, 0.7, 2.0, 4);
  const double chen8 = check_tree_chen(t, path, 0.0, 0.7, 2.0, 8);
  const double chen16 = check_tree_chen(t, path, 0.0, 0.7, 2.0, 16);
  EXPECT_LT(chen8, chen4);
  EXPECT_LT(chen16, std::max(chen8 * 1e-2, 1e-13));
  const double sk4 = check_skeleton_decomposition(t, path, -1.0, 0.7, 2.0, 4);
  const double sk48 = check_skeleton_decomposition(t, path, -1.0, 0.7, 2.0, 48);
  EXPECT_LT(sk48, std::max(sk4 * 1e-10, 1e-13));
}

TEST(Fubini, Identity) {
  const SignedForestSum e = fubini_expand({1, 2, 3});
  ASSERT_EQ(e.terms.size(), 1u);
  EXPECT_EQ(e.terms[0].sign, 1);
  EXPECT_EQ(serialize(e.terms[0].forest), "[1[2[3]]]");
}

TEST(Fubini, SecondPermutation) {
  const SignedForestSum e = fubini_expand({2, 1, 3});
  ASSERT_EQ(e.terms.size(), 2u);
  EXPECT_EQ(e.terms[0].sign, 1);
  EXPECT_EQ(e.terms[1].sign, -1);
  EXPECT_EQ(e.terms[0].forest.trees().size(), 2u);
  ASSERT_EQ(e.terms[1].forest.trees().size(), 1u);
  EXPECT_EQ(e.terms[1].forest.trees()[0].size(), 3u);
  EXPECT_EQ(e.to_string(), "+[1][2[3]] -[2[1][3]]");
}

TEST(Fubini, TermsCarryAllLabels) {
  std::array<int, 3> sigma{1, 2, 3};
  do {
    for (const auto& term : fubini_expand(sigma).terms) {
      EXPECT_EQ(term.forest.vertex_count(), 3u);
      std::multiset<int> labels, slots;
      for (const auto& tr : term.forest.trees())
        for (const auto& v : tr.vertices()) {
          labels.insert(v.label);
          slots.insert(v.slot);
          EXPECT_EQ(v.label, sigma[v.slot]);
        }
      EXPECT_EQ(labels, (std::multiset<int>{1, 2, 3}));
      EXPECT_EQ(slots, (std::multiset<int>{0, 1, 2}));
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  EXPECT_THROW(fubini_expand({1, 1, 2}), std::invalid_argument);
}

TEST(Fubini, CompletenessAgainstNestedIntegral) {
  for (auto comp : {std::array{1, 2, 3}, std::array{3, 1, 3}}) {
    const PathDerivative path = [&](int k, double u) { return trig_path(comp[k - 1], u); };
    // Direct nested Simpson of int_{s<u3<u2<u1<t} dG(u1) dG(u2) dG(u3).
    const double s = -0.3, t = 1.1;
    const int n = 400;
    const double h = (t - s) / n;
    // Cumulative Simpson per cell, midpoint values from a local cubic.
    auto cumulative = [&](const std::vector<double>& f) {
      std::vector<double> c(n + 1, 0.0);
      for (int k = 1; k <= n; ++k) {
        const double a = s + (k - 1) * h, m = a + h / 2;
        const int k0 = std::clamp(k - 2, 0, n - 3);
        double fm = 0.0;
        for (int j = k0; j < k0 + 4; ++j) {
          double l = 1.0;
          for (int q = k0; q < k0 + 4; ++q)
            if (q != j) l *= (m - (s + q * h)) / ((j - q) * h);
          fm += l * f[j];
        }
        c[k] = c[k - 1] + h / 6.0 * (f[k - 1] + 4.0 * fm + f[k]);
      }
      return c;
    };
    std::vector<double> f3(n + 1);
    for (int k = 0; k <= n; ++k) f3[k] = path(3, s + k * h);
    const std::vector<double> inner = cumulative(f3);
    std::vector<double> f2(n + 1);
    for (int k = 0; k <= n; ++k) f2[k] = path(2, s + k * h) * inner[k];
    const std::vector<double> mid = cumulative(f2);
    std::vector<double> f1(n + 1);
    for (int k = 0; k <= n; ++k) f1[k] = path(1, s + k * h) * mid[k];
    const double direct = cumulative(f1)[n];

    std::array<int, 3> sigma{1, 2, 3};
    do {
      double sum = 0.0;
      for (const auto& term : fubini_expand(sigma).terms) sum += term.sign * tree_integral(term.forest, path, s, t);
      EXPECT_LT(std::abs(sum - direct), 1e-8);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
}

TEST(Shuffle, Examples) {
  EXPECT_LT(check_shuffle({1}, {2}, trig_path, 0.1, 1.7), 1e-10);
  EXPECT_LT(check_shuffle({1}, {2, 3}, linear_path, 0.0, 1.0), 1e-15);
  EXPECT_NEAR(tree_integral(DecoratedTree::chain({1, 2, 3}), linear_path, 0.0, 1.0), 1.0 / 6.0, 1e-15);
  EXPECT_LT(check_shuffle({2}, {2}, trig_path, -0.5, 0.5), 1e-12);
  const double inc = trig_value(2, 0.5) - trig_value(2, -0.5);
  EXPECT_NEAR(2.0 * tree_integral(DecoratedTree::chain({2, 2}), trig_path, -0.5, 0.5), inc * inc, 1e-12);
  EXPECT_LT(check_shuffle({3, 1}, {2}, trig_path, 0.0, 2.0), 1e-10);
  EXPECT_THROW(check_shuffle({1, 2}, {3, 1}, trig_path, 0.0, 1.0), std::invalid_argument);
}
