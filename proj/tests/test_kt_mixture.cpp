#include <doctest.h>

#include <omp.h>

#include <numeric>

#include "ktsbm/errors.hpp"
#include "ktsbm/experiments.hpp"
#include "ktsbm/kt_mixture.hpp"
#include "ktsbm/labeling_enum.hpp"
#include "ktsbm/likelihood.hpp"
#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"
#include "oracles.hpp"

using namespace ktsbm;

TEST_CASE("K(z) examples") {
  CHECK(log_kt_labels(LabelVector({0}, 1), 1) == doctest::Approx(0.0));
  CHECK(log_kt_labels(LabelVector({0}, 2), 2) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_kt_labels(LabelVector({0, 1}, 2), 2) == doctest::Approx(std::log(1.0 / 8)).epsilon(1e-15));
  CHECK(log_kt_labels(LabelVector({0, 0}, 2), 2) == doctest::Approx(std::log(3.0 / 8)).epsilon(1e-15));
}

TEST_CASE("K(z) matches the closed form and the sequential urn") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng.next() % 5);
    const int n = 1 + static_cast<int>(rng.next() % 30);
    std::vector<int> z(n);
    for (auto& v : z) v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k));
    const double lib = log_kt_labels(LabelVector(z, k), k);
    CHECK(lib == doctest::Approx(oracle::kt_labels(z, k)).epsilon(1e-12));
    CHECK(lib == doctest::Approx(oracle::kt_labels_sequential(z, k)).epsilon(1e-12));
  }
}

TEST_CASE("K(z) is exchangeable") {
  Rng rng(5);
  std::vector<int> z{0, 2, 2, 1, 0, 0, 3, 2};
  const double base = log_kt_labels(LabelVector(z, 4), 4);
  for (int t = 0; t < 20; ++t) {
    auto zz = z;
    for (int i = 7; i > 0; --i) std::swap(zz[i], zz[rng.next() % static_cast<std::uint64_t>(i + 1)]);
    CHECK(log_kt_labels(LabelVector(zz, 4), 4) == doctest::Approx(base).epsilon(1e-14));
    std::vector<int> perm{1, 3, 0, 2};
    for (auto& v : zz) v = perm[v];
    CHECK(log_kt_labels(LabelVector(zz, 4), 4) == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("K(x|z) examples and oracle") {
  Graph one(2);
  one.set_edge(0, 1);
  CHECK(log_kt_graph_given_labels(LabelVector({0, 0}, 1), one, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_kt_graph_given_labels(LabelVector({0, 1}, 2), Graph(2), 2) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-14));
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.next() % 12);
    const int k = 1 + static_cast<int>(rng.next() % 4);
    std::vector<int> z(n);
    for (auto& v : z) v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k));
    const auto x = oracle::random_graph(n, rng.uniform(), rng.next());
    CHECK(log_kt_graph_given_labels(LabelVector(z, k), x, k) ==
          doctest::Approx(oracle::kt_graph_given_labels(z, x, k)).epsilon(1e-12));
  }
}

TEST_CASE("K(x) examples") {
  Graph e(2), f(2);
  f.set_edge(0, 1);
  CHECK(log_kt_marginal_exact(e, 1).log_value == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_kt_marginal_exact(f, 1).log_value == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_kt_marginal_exact(f, 2).log_value == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  LogSumExp acc;
  for (const auto& g : all_graphs(3)) acc.add(log_kt_marginal_exact(g, 2).log_value);
  CHECK(std::abs(std::exp(acc.value()) - 1.0) <= 1e-12);
}

TEST_CASE("orbit-reduced enumeration equals the unreduced sum") {
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= 4; ++k) {
      if (std::pow(k, n) > 5000) continue;
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto x = oracle::random_graph(n, 0.5, seed * 31 + static_cast<std::uint64_t>(n));
        CHECK(log_kt_marginal_exact(x, k).log_value == doctest::Approx(oracle::kt_marginal(x, k)).epsilon(1e-12));
      }
    }
  const auto x10 = oracle::random_graph(10, 0.5, 1);
  CHECK(log_kt_marginal_exact(x10, 2).log_value == doctest::Approx(oracle::kt_marginal(x10, 2)).epsilon(1e-12));
}

TEST_CASE("exact-upto agrees with per-k evaluation and the serial reference") {
  const auto x = oracle::random_graph(9, 0.4, 77);
  const auto all = log_kt_marginal_exact_upto(x, 5);
  const auto serial = log_kt_marginal_exact_upto_serial(x, 5);
  REQUIRE(all.size() == 5);
  for (int k = 1; k <= 5; ++k) {
    CHECK(all[k - 1].k == k);
    CHECK(all[k - 1].log_value == doctest::Approx(serial[k - 1].log_value).epsilon(1e-13));
    CHECK(all[k - 1].log_value == doctest::Approx(log_kt_marginal_exact(x, k).log_value).epsilon(1e-13));
  }
}

TEST_CASE("exact KT is bitwise independent of the thread count") {
  const auto x = oracle::random_graph(10, 0.5, 5);
  std::vector<std::vector<double>> runs;
  for (int threads : {1, 3, 8}) {
    omp_set_num_threads(threads);
    std::vector<double> v;
    for (const auto& kv : log_kt_marginal_exact_upto(x, 4)) v.push_back(kv.log_value);
    runs.push_back(v);
  }
  omp_set_num_threads(1);
  CHECK(runs[0] == runs[1]);
  CHECK(runs[0] == runs[2]);
}

TEST_CASE("exact KT refuses infeasible sizes") {
  CHECK_THROWS_AS(log_kt_marginal_exact(Graph(30), 3), InfeasibleError);
  CHECK(canonical_enumeration_feasible(10, 8, kDefaultEnumerationCap));
  CHECK_FALSE(canonical_enumeration_feasible(30, 3, kDefaultEnumerationCap));
}

TEST_CASE("Monte Carlo KT") {
  Graph f(2);
  f.set_edge(0, 1);
  const auto two = log_kt_marginal_mc(f, 2, 100000, 1);
  CHECK(std::abs(two.log_value - std::log(0.5)) <= 3 * two.std_error + 1e-12);

  const auto x = oracle::random_graph(7, 0.5, 3);
  const auto k1 = log_kt_marginal_mc(x, 1, 1000, 4);
  CHECK(k1.std_error == 0.0);
  CHECK(k1.log_value == doctest::Approx(log_kt_marginal_exact(x, 1).log_value).epsilon(1e-13));

  const auto x6 = oracle::random_graph(6, 0.5, 12);
  const auto mc = log_kt_marginal_mc(x6, 2, 1000000, 9);
  CHECK(mc.method == KtMethod::monte_carlo);
  CHECK(std::abs(mc.log_value - log_kt_marginal_exact(x6, 2).log_value) <= 4 * mc.std_error);
}

TEST_CASE("Monte Carlo KT is independent of thread count and error shrinks like 1/sqrt(samples)") {
  const auto x = oracle::random_graph(8, 0.5, 21);
  omp_set_num_threads(1);
  const auto a = log_kt_marginal_mc(x, 3, 100000, 5);
  omp_set_num_threads(6);
  const auto b = log_kt_marginal_mc(x, 3, 100000, 5);
  omp_set_num_threads(1);
  CHECK(a.log_value == b.log_value);
  CHECK(a.std_error == b.std_error);
  const auto serial = log_kt_marginal_mc_serial(x, 3, 100000, 5);
  CHECK(std::abs(serial.log_value - a.log_value) <= 4 * (a.std_error + serial.std_error));

  const double small = log_kt_marginal_mc(x, 3, 10000, 6).std_error;
  const double large = log_kt_marginal_mc(x, 3, 1000000, 6).std_error;
  const double slope = (std::log(large) - std::log(small)) / (std::log(1e6) - std::log(1e4));
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("bound constants") {
  const auto b1 = kt_regret_bound(1, 1000000000);
  CHECK(b1.c_kn == doctest::Approx(0.5 * std::log(oracle::kPi) + 7.0 / 6.0).epsilon(1e-9));
  CHECK(b1.c_kn == doctest::Approx(1.739).epsilon(1e-3));
  const auto b14 = kt_regret_bound(1, 4);
  CHECK(b14.c_kn - (0.5 * std::log(oracle::kPi) + 7.0 / 6.0) == doctest::Approx(1.0 / 48).epsilon(1e-12));
  CHECK(kt_regret_bound(2, 4).slope == 3.5);
  CHECK_THROWS_AS(kt_regret_bound(2, 3), ValidationError);
}

TEST_CASE("bound holds with the exact Bernoulli sup") {
  for (int n : {4, 5}) {
    for (const auto& g : all_graphs(n)) {
      const auto c = verify_kt_regret(g, 1, bernoulli_sup_log_lik(g));
      CHECK(c.holds);
    }
  }
  const auto empty = verify_kt_regret(Graph(5), 1, bernoulli_sup_log_lik(Graph(5)));
  CHECK(bernoulli_sup_log_lik(Graph(5)) == 0.0);
  CHECK(empty.lhs >= 0.0);
  CHECK(empty.lhs <= empty.rhs);
}

TEST_CASE("gamma composition inequality") {
  const std::vector<std::int64_t> single{17};
  const auto eq = gamma_composition_inequality(single);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-14));
  const std::vector<std::int64_t> ones{1, 1};
  const auto two = gamma_composition_inequality(ones);
  CHECK(std::exp(two.lhs) == doctest::Approx(1.0 / oracle::kPi).epsilon(1e-13));
  CHECK(std::exp(two.rhs) == doctest::Approx(4.0 / (3.0 * oracle::kPi)).epsilon(1e-13));
  CHECK(two.holds);
  CHECK(verify_gamma_inequality_suite(1000, 3).passed());
}

TEST_CASE("label and cell ratio bounds") {
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= 3; ++k)
      for (const auto& z : oracle::all_labelings(n, k)) {
        std::vector<std::int64_t> sizes(k, 0);
        for (int v : z) ++sizes[v];
        CHECK(log_label_sup_ratio(sizes, k) <= log_label_ratio_bound(k, n) + 1e-12);
      }
  for (std::int64_t m = 1; m <= 60; ++m)
    for (std::int64_t e = 0; e <= m; ++e) CHECK(log_cell_sup_ratio(e, m) <= log_cell_ratio_bound(m) + 1e-12);
}

TEST_CASE("partition walker") {
  const auto x = oracle::random_graph(6, 0.5, 2);
  long canonical = 0;
  PartitionWalker w(x, 3);
  w.walk({}, [&](const PartitionWalker& s) {
    ++canonical;
    std::vector<int> z(s.labels().begin(), s.labels().end());
    const auto o = oracle::counts(z, x, 3);
    for (int a = 0; a < s.blocks(); ++a) {
      CHECK(s.sizes()[a] == o.n_a[a]);
      for (int b = a; b < s.blocks(); ++b) CHECK(s.edges(a, b) == (a == b ? o.O_ab[a][a] / 2 : o.O_ab[a][b]));
    }
  });
  CHECK(canonical == 1 + 31 + 90);  // S(6,1) + S(6,2) + S(6,3)
  long full = 0;
  PartitionWalker all(x, 2, false);
  all.walk({}, [&](const PartitionWalker&) { ++full; });
  CHECK(full == 64);
  long via_prefix = 0;
  for (const auto& p : PartitionWalker::prefixes(6, 3, 3)) {
    PartitionWalker part(x, 3);
    part.walk(p, [&](const PartitionWalker&) { ++via_prefix; });
  }
  CHECK(via_prefix == canonical);
}
