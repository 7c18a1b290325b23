#include "ktsbm/order_selection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"

namespace ktsbm {
namespace {

void check_penalty_args(int k, std::int64_t n, const PenaltySpec& spec) {
  if (k < 1) throw ValidationError("k must be positive");
  if (n < 1) throw ValidationError("n must be positive");
  if (!(spec.epsilon > 0.0)) throw ValidationError("penalty epsilon must be positive");
}

}  // namespace

double penalty(int k, std::int64_t n, const PenaltySpec& spec) {
  check_penalty_args(k, n, spec);
  double coeff = 0.0;
  for (int i = 1; i <= k - 1; ++i) coeff += (i * (i + 2.0) + 3.0 + spec.epsilon) / 2.0;
  return coeff * std::log(static_cast<double>(n));
}

double penalty_closed_form(int k, std::int64_t n, const PenaltySpec& spec) {
  check_penalty_args(k, n, spec);
  const double kk = k;
  const double coeff =
      kk * (kk - 1.0) * (2.0 * kk - 1.0) / 12.0 + kk * (kk - 1.0) / 2.0 + (3.0 + spec.epsilon) * (kk - 1.0) / 2.0;
  return coeff * std::log(static_cast<double>(n));
}

bool penalty_forms_agree_exactly(int k) {
  if (k < 1) throw ValidationError("k must be positive");
  // Everything scaled by 12 so both forms are integers.
  std::int64_t sum_const = 0, sum_eps = 0;
  for (std::int64_t i = 1; i <= k - 1; ++i) {
    sum_const += 6 * (i * (i + 2) + 3);
    sum_eps += 6;
  }
  const std::int64_t kk = k;
  const std::int64_t closed_const = kk * (kk - 1) * (2 * kk - 1) + 6 * kk * (kk - 1) + 18 * (kk - 1);
  const std::int64_t closed_eps = 6 * (kk - 1);
  return sum_const == closed_const && sum_eps == closed_eps;
}

OrderEstimate estimate_order(const Graph& x, const PenaltySpec& spec, int k_max, const KtOptions& kt) {
  if (k_max < 1) throw ValidationError("k_max must be positive");
  std::vector<KtValue> values;
  if (kt.method == KtMethod::exact) {
    values = log_kt_marginal_exact_upto(x, k_max, kt.cap);
  } else {
    for (int k = 1; k <= k_max; ++k)
      values.push_back(log_kt_marginal_mc(x, k, kt.samples, mix_seed(kt.seed, static_cast<std::uint64_t>(k))));
  }
  OrderEstimate out;
  out.table.n = x.n();
  double best = kNegInf;
  for (const auto& v : values) {
    CriterionRow row;
    row.k = v.k;
    row.log_kt = v.log_value;
    row.pen = penalty(v.k, x.n(), spec);
    row.score = row.log_kt - row.pen;
    row.method = v.method;
    row.std_error = v.std_error;
    if (row.score > best) {
      best = row.score;
      out.k_hat = row.k;
    }
    out.table.rows.push_back(row);
  }
  return out;
}

OverestimationBound overestimation_bound(int k0, int k, int n, const PenaltySpec& spec) {
  if (k0 < 1 || k <= k0) throw ValidationError("overestimation bound needs k > k0 >= 1");
  if (n < std::max(4, k0)) throw ValidationError("overestimation bound needs n >= max(4, k0)");
  const double kk0 = k0;
  const double log_bound = (kk0 * (kk0 + 2.0) - 1.0) / 2.0 * std::log(static_cast<double>(n)) +
                           kt_regret_bound(k0, n).c_kn + penalty(k0, n, spec) - penalty(k, n, spec);
  return {log_bound, std::min(1.0, std::exp(log_bound))};
}

MergeResult merge_blocks(const std::vector<double>& pi, const SymMatrix& P, int a, int b) {
  const int k = static_cast<int>(pi.size());
  if (k < 2) throw ValidationError("merge needs at least two blocks");
  if (P.dim() != k) throw ValidationError("P dimension does not match pi");
  if (a == b) throw ValidationError("merge needs two distinct blocks");
  if (a < 0 || b < 0 || a >= k || b >= k) throw ValidationError("block index out of range");
  for (double p : pi)
    if (!(p > 0.0)) throw ValidationError("merge needs strictly positive weights");
  if (a > b) std::swap(a, b);

  // Old index -> new index; b folds into a.
  std::vector<int> target(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) target[c] = c == b ? a : (c > b ? c - 1 : c);

  MergeResult out;
  out.merged_pair = {a, b};
  out.pi_star.assign(static_cast<std::size_t>(k - 1), 0.0);
  for (int c = 0; c < k; ++c) out.pi_star[target[c]] += pi[c];
  out.P_star = SymMatrix(k - 1);
  for (int l = 0; l < k; ++l) {
    if (l == b) continue;
    for (int r = l; r < k; ++r) {
      if (r == b) continue;
      const int nl = target[l], nr = target[r];
      if (l != a && r != a) {
        out.P_star.set(nl, nr, P(l, r));
      } else if (l == a && r == a) {
        const double num = pi[a] * pi[a] * P(a, a) + 2.0 * pi[a] * pi[b] * P(a, b) + pi[b] * pi[b] * P(b, b);
        const double den = pi[a] * pi[a] + 2.0 * pi[a] * pi[b] + pi[b] * pi[b];
        out.P_star.set(nl, nr, num / den);
      } else {
        const int other = l == a ? r : l;
        const double num = pi[other] * pi[a] * P(other, a) + pi[other] * pi[b] * P(other, b);
        const double den = pi[other] * pi[a] + pi[other] * pi[b];
        out.P_star.set(nl, nr, num / den);
      }
    }
  }
  return out;
}

namespace {

constexpr double kIdenticalColumnTol = 1e-10;

double weighted_sum(const std::vector<double>& pi, const SymMatrix& P, const std::function<double(double)>& f) {
  const int k = static_cast<int>(pi.size());
  double total = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) total += pi[a] * pi[b] * f(P(a, b));
  return total;
}

bool columns_identical(const SymMatrix& P, int r, int s) {
  for (int l = 0; l < P.dim(); ++l)
    if (std::abs(P(l, r) - P(l, s)) > kIdenticalColumnTol) return false;
  return true;
}

GapResult merge_gap(const std::vector<double>& pi0, const SymMatrix& P0, const std::function<double(double)>& f) {
  const int k0 = static_cast<int>(pi0.size());
  if (k0 < 2) throw ValidationError("gap needs k0 >= 2");
  if (P0.dim() != k0) throw ValidationError("matrix dimension does not match pi");
  GapResult out;
  out.full_term = weighted_sum(pi0, P0, f);
  bool have_best = false;
  for (int r = 0; r < k0 && !out.reducible; ++r) {
    for (int s = r + 1; s < k0; ++s) {
      auto merged = merge_blocks(pi0, P0, r, s);
      const double term = weighted_sum(merged.pi_star, merged.P_star, f);
      const bool identical = columns_identical(P0, r, s);
      if (identical || !have_best || term > out.merged_term) {
        out.merged_term = term;
        out.best_pair = {r, s};
        out.merged = std::move(merged);
        have_best = true;
      }
      if (identical) {
        out.reducible = true;
        break;
      }
    }
  }
  out.gap = out.reducible ? 0.0 : 0.5 * (out.full_term - out.merged_term);
  return out;
}

}  // namespace

GapResult dense_gap(const std::vector<double>& pi0, const SymMatrix& P0) {
  return merge_gap(pi0, P0, gamma_fn);
}

GapResult sparse_gap(const std::vector<double>& pi0, const SymMatrix& S0) { return merge_gap(pi0, S0, tau_fn); }

double empirical_underfit_ratio(const LabelVector& z, const Graph& x, int k0, const ProfileMode& mode,
                                double norm) {
  if (k0 < 2) throw ValidationError("under-fit ratio needs k0 >= 2");
  if (!(norm > 0.0)) throw ValidationError("normalization must be positive");
  const double full = max_complete_log_lik(z, x, k0);
  const double reduced = profile_label_search(x, k0 - 1, mode).value;
  const double n = x.n();
  return (full - reduced) / (norm * n * n);
}

}  // namespace ktsbm
