#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "condrel/trees.hpp"
#include "doctest.h"

using namespace condrel;

namespace {

// Enumeration oracle for rooted trees: build every canonical string on n
// nodes as "(" + sorted children canonicals + ")", children chosen as a
// non-decreasing sequence of smaller canonical trees.
const std::vector<std::string>& rooted_canonicals(int n) {
  static std::vector<std::vector<std::string>> cache{{}, {"()"}};
  while (static_cast<int>(cache.size()) <= n) {
    const int m = static_cast<int>(cache.size());
    std::set<std::string> found;
    std::vector<std::string> children;
    // pick child trees with sizes summing to m-1, non-decreasing by
    // (size, canonical) so each multiset appears once
    std::function<void(int, int, const std::string&)> rec = [&](int remaining, int min_size,
                                                                const std::string& min_str) {
      if (remaining == 0) {
        std::string s = "(";
        for (const auto& c : children) s += c;
        s += ")";
        found.insert(std::move(s));
        return;
      }
      for (int sz = min_size; sz <= remaining; ++sz) {
        for (const auto& c : cache[static_cast<std::size_t>(sz)]) {
          if (sz == min_size && c < min_str) continue;
          children.push_back(c);
          rec(remaining - sz, sz, c);
          children.pop_back();
        }
      }
    };
    rec(m - 1, 1, "");
    cache.emplace_back(found.begin(), found.end());
  }
  return cache[static_cast<std::size_t>(n)];
}

// AHU canonical string of a tree rooted at r.
std::string ahu(const std::vector<std::vector<int>>& adj, int r, int parent) {
  std::vector<std::string> parts;
  for (int c : adj[static_cast<std::size_t>(r)])
    if (c != parent) parts.push_back(ahu(adj, c, r));
  std::sort(parts.begin(), parts.end());
  std::string s = "(";
  for (auto& p : parts) s += p;
  s += ")";
  return s;
}

// Free-tree oracle: enumerate all labelled trees via Pruefer sequences and
// count isomorphism classes by the centroid-rooted canonical form.
std::int64_t free_tree_count(int n) {
  if (n == 1) return 1;
  if (n == 2) return 1;
  std::set<std::string> classes;
  std::vector<int> code(static_cast<std::size_t>(n) - 2, 0);
  for (;;) {
    // decode Pruefer
    std::vector<int> degree(static_cast<std::size_t>(n), 1);
    for (int v : code) ++degree[static_cast<std::size_t>(v)];
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<int> deg = degree;
    std::set<int> leaves;
    for (int v = 0; v < n; ++v)
      if (deg[static_cast<std::size_t>(v)] == 1) leaves.insert(v);
    for (int v : code) {
      const int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      adj[static_cast<std::size_t>(leaf)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(leaf);
      if (--deg[static_cast<std::size_t>(v)] == 1) leaves.insert(v);
    }
    const int u = *leaves.begin(), w = *leaves.rbegin();
    adj[static_cast<std::size_t>(u)].push_back(w);
    adj[static_cast<std::size_t>(w)].push_back(u);

    // centroid(s) by iterative leaf stripping
    std::vector<int> deg2(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
      deg2[static_cast<std::size_t>(v)] = static_cast<int>(adj[static_cast<std::size_t>(v)].size());
    std::vector<int> order;
    for (int v = 0; v < n; ++v)
      if (deg2[static_cast<std::size_t>(v)] <= 1) order.push_back(v);
    std::vector<bool> removed(static_cast<std::size_t>(n), false);
    int alive = n;
    std::vector<int> frontier = order;
    while (alive > 2) {
      std::vector<int> next;
      for (int v : frontier) {
        removed[static_cast<std::size_t>(v)] = true;
        --alive;
        for (int c : adj[static_cast<std::size_t>(v)])
          if (!removed[static_cast<std::size_t>(c)] && --deg2[static_cast<std::size_t>(c)] == 1)
            next.push_back(c);
      }
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
    std::vector<int> centers;
    for (int v = 0; v < n; ++v)
      if (!removed[static_cast<std::size_t>(v)]) centers.push_back(v);
    std::string canon;
    for (int c : centers) {
      std::string s = ahu(adj, c, -1);
      if (canon.empty() || s < canon) canon = std::move(s);
    }
    classes.insert(std::move(canon));

    // next Pruefer code
    int i = n - 3;
    while (i >= 0 && code[static_cast<std::size_t>(i)] == n - 1) {
      code[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++code[static_cast<std::size_t>(i)];
  }
  return static_cast<std::int64_t>(classes.size());
}

}  // namespace

TEST_CASE("rooted counts match the published decade and the enumeration oracle") {
  const TreeCounts tc = tree_counts(12);
  const std::int64_t want_r[] = {1, 1, 2, 4, 9, 20, 48, 115, 286, 719};
  const std::int64_t want_m[] = {1, 1, 1, 2, 3, 6, 11, 23, 47, 106};
  for (int j = 1; j <= 10; ++j) {
    CHECK(tc.r[static_cast<std::size_t>(j)] == want_r[j - 1]);
    CHECK(tc.m[static_cast<std::size_t>(j)] == want_m[j - 1]);
  }
  for (int j = 1; j <= 10; ++j)
    CHECK(tc.r[static_cast<std::size_t>(j)] ==
          static_cast<std::int64_t>(rooted_canonicals(j).size()));
}

TEST_CASE("free counts match the labelled-enumeration oracle up to 8") {
  const TreeCounts tc = tree_counts(8);
  for (int j = 1; j <= 8; ++j)
    CHECK(tc.m[static_cast<std::size_t>(j)] == free_tree_count(j));
}

TEST_CASE("dissimilarity formula flags corrupted rooted counts") {
  // shrinking r_5 drives m_5 below 1, which the consistency check rejects
  std::vector<mpz_class> r = rooted_tree_counts(8);
  r[5] = 1;
  CHECK_THROWS_AS(unrooted_tree_counts(r), Error);
}

TEST_CASE("growth constants stabilize across horizons") {
  const TreeCounts tc = tree_counts(400);
  const OtterConstants at200 = otter_constants(tc, 200);
  const OtterConstants at400 = otter_constants(tc, 400);
  // 4 significant digits of agreement between the horizons
  CHECK(std::abs(at400.rho - at200.rho) < 5e-5 * at400.rho);
  CHECK(at400.rho > 0.33);
  CHECK(at400.rho < 0.35);
  CHECK(at400.rho_spread < 1e-5);
  // the constants in r_j ~ c rho^{-j} j^{-3/2} and m_j ~ c' rho^{-j} j^{-5/2}
  CHECK(at400.c_rooted == doctest::Approx(at200.c_rooted).epsilon(2e-3));
  CHECK(at400.c_free == doctest::Approx(at200.c_free).epsilon(2e-3));
  CHECK(at400.c_rooted > 0.3);
  CHECK(at400.c_rooted < 0.6);
  CHECK(at400.c_free > 0.4);
  CHECK(at400.c_free < 0.7);
}

TEST_CASE("growth constants refuse a tiny horizon") {
  const TreeCounts tc = tree_counts(40);
  CHECK_THROWS_AS(otter_constants(tc), Error);
}

TEST_CASE("log of large counts is consistent with ratios") {
  const TreeCounts tc = tree_counts(120);
  const double l120 = log_mpz(tc.r[120]);
  const double l119 = log_mpz(tc.r[119]);
  mpq_class ratio(tc.r[120], tc.r[119]);
  CHECK(l120 - l119 == doctest::Approx(std::log(ratio.get_d())).epsilon(1e-12));
}
