#include "folio/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "folio/error.hpp"

namespace folio {

Eigen::MatrixXd simple_returns(const PriceSeries& series,
                               const std::vector<std::size_t>& assets) {
  const std::size_t n = series.num_days();
  if (n < 2) throw DataError("simple_returns: need at least two days");
  Eigen::MatrixXd r(static_cast<Eigen::Index>(n - 1),
                    static_cast<Eigen::Index>(assets.size()));
  for (std::size_t j = 0; j < assets.size(); ++j) {
    if (assets[j] >= series.num_assets()) {
      throw std::out_of_range("asset index " + std::to_string(assets[j]));
    }
    for (std::size_t t = 1; t < n; ++t) {
      const double prev = series.close(assets[j], t - 1);
      r(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(j)) =
          (series.close(assets[j], t) - prev) / prev;
    }
  }
  return r;
}

CovarianceEstimate empirical_covariance(const PriceSeries& series,
                                        const std::vector<std::size_t>& assets,
                                        const CovarianceOptions& options) {
  if (assets.empty()) throw std::invalid_argument("empty asset subset");
  for (auto a : assets) {
    if (a == series.cash_index()) {
      throw std::invalid_argument("covariance subset must exclude cash");
    }
  }
  if (series.num_days() < 4) {
    throw DataError("empirical_covariance: need at least 3 return observations");
  }
  Eigen::MatrixXd r = simple_returns(series, assets);
  const Eigen::RowVectorXd mean = r.colwise().mean();
  r.rowwise() -= mean;
  Eigen::MatrixXd c = (r.transpose() * r) / static_cast<double>(r.rows() - 1);
  // Exact symmetry; the product is symmetric up to rounding only.
  c = (0.5 * (c + c.transpose())).eval();

  const double k = static_cast<double>(assets.size());
  const double ridge = options.ridge.value_or(
      std::max(options.relative_ridge * c.trace() / k, options.min_ridge));
  if (ridge < 0.0) throw std::invalid_argument("ridge must be non-negative");
  c.diagonal().array() += ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "covariance singular after ridge " + std::to_string(ridge) +
        "; increase the ridge");
  }
  CovarianceEstimate est;
  est.matrix = std::move(c);
  est.ridge = ridge;
  for (auto a : assets) est.asset_ids.push_back(series.asset_names()[a]);
  return est;
}

MinVarResult min_variance_weights(const CovarianceEstimate& cov) {
  const auto k = cov.matrix.rows();
  if (k == 0 || cov.matrix.cols() != k) {
    throw std::invalid_argument("covariance must be square and non-empty");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov.matrix);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("singular covariance: Cholesky factorization failed");
  }
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(k));
  const double denom = x.sum();
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("singular covariance: 1'C^-1 1 not positive");
  }
  MinVarResult out;
  out.weights = x / denom;
  out.variance = 1.0 / denom;
  out.subset = cov.asset_ids;
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

namespace {

struct ChunkResult {
  double variance = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> combo;
  std::uint64_t visited = 0;
};

// Enumerates all k-combinations of [0, n) whose first element is `first`,
// in lexicographic order. The Cholesky factor L of C[S, S] and z = L^-1 1
// are prefix-stable in S, so only rows from the first changed position are
// recomputed; 1' C^-1 1 = |z|^2.
ChunkResult search_chunk(const Eigen::MatrixXd& c, std::size_t k,
                         std::size_t first) {
  const std::size_t n = static_cast<std::size_t>(c.rows());
  ChunkResult res;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = first + i;
  if (idx.back() >= n) return res;

  std::vector<double> l(k * k, 0.0);
  std::vector<double> z(k, 0.0);
  std::vector<double> zsq_prefix(k + 1, 0.0);

  auto refactor_from = [&](std::size_t row) -> bool {
    for (std::size_t i = row; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = c(static_cast<Eigen::Index>(idx[i]),
                     static_cast<Eigen::Index>(idx[j]));
        for (std::size_t p = 0; p < j; ++p) s -= l[i * k + p] * l[j * k + p];
        if (i == j) {
          if (!(s > 0.0)) return false;
          l[i * k + i] = std::sqrt(s);
        } else {
          l[i * k + j] = s / l[j * k + j];
        }
      }
      double zi = 1.0;
      for (std::size_t p = 0; p < i; ++p) zi -= l[i * k + p] * z[p];
      z[i] = zi / l[i * k + i];
      zsq_prefix[i + 1] = zsq_prefix[i] + z[i] * z[i];
    }
    return true;
  };

  std::size_t changed = 0;
  while (true) {
    if (!refactor_from(changed)) {
      throw NumericalError("subset covariance not positive definite");
    }
    ++res.visited;
    const double var = 1.0 / zsq_prefix[k];
    if (var < res.variance) {
      res.variance = var;
      res.combo = idx;
    }
    // Next combination; position 0 is pinned to `first`.
    std::size_t pos = 0;
    for (std::size_t p = k; p-- > 1;) {
      if (idx[p] < n - k + p) {
        pos = p;
        break;
      }
    }
    if (pos == 0) return res;
    ++idx[pos];
    for (std::size_t i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    changed = pos;
  }
}

}  // namespace

SubsetSearchResult select_subset(const CovarianceEstimate& cov, std::size_t k,
                                 const SelectionOptions& options) {
  const std::size_t n = static_cast<std::size_t>(cov.matrix.rows());
  if (k < 1 || k > n) {
    throw std::invalid_argument("select_subset: k=" + std::to_string(k) +
                                " must be in [1, " + std::to_string(n) + "]");
  }
  const std::uint64_t total = binomial(n, k);
  if (total > options.enumeration_cap) {
    throw std::invalid_argument(
        "select_subset: " + std::to_string(total) +
        " combinations exceed the enumeration cap of " +
        std::to_string(options.enumeration_cap) +
        "; reduce the universe or use a heuristic search");
  }
  {
    Eigen::LLT<Eigen::MatrixXd> llt(cov.matrix);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("universe covariance not positive definite");
    }
  }

  const std::size_t chunks = n - k + 1;
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<std::uint64_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t first = next.fetch_add(1);
      if (first >= chunks) return;
      try {
        results[first] = search_chunk(cov.matrix, k, first);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
      const auto d = done.fetch_add(results[first].visited) +
                     results[first].visited;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(d, total);
      }
    }
  };

  unsigned threads = options.threads != 0
                         ? options.threads
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Chunks are ordered by first index, so a strict < keeps the
  // lexicographically smallest tuple among equal variances.
  SubsetSearchResult out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    out.combinations_visited += r.visited;
    if (!r.combo.empty() && r.variance < best) {
      best = r.variance;
      out.indices = r.combo;
    }
  }

  CovarianceEstimate sub;
  const auto kk = static_cast<Eigen::Index>(k);
  sub.matrix.resize(kk, kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    for (Eigen::Index j = 0; j < kk; ++j) {
      sub.matrix(i, j) =
          cov.matrix(static_cast<Eigen::Index>(out.indices[static_cast<std::size_t>(i)]),
                     static_cast<Eigen::Index>(out.indices[static_cast<std::size_t>(j)]));
    }
    sub.asset_ids.push_back(cov.asset_ids.empty()
                                ? std::to_string(out.indices[static_cast<std::size_t>(i)])
                                : cov.asset_ids[out.indices[static_cast<std::size_t>(i)]]);
  }
  sub.ridge = cov.ridge;
  out.best = min_variance_weights(sub);
  return out;
}

SubsetSearchResult select_subset(const PriceSeries& series, std::size_t k,
                                 const std::vector<std::size_t>& universe,
                                 const SelectionOptions& options) {
  if (k > universe.size()) {
    throw std::invalid_argument("select_subset: k exceeds universe size");
  }
  auto sorted = universe;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("select_subset: duplicate assets in universe");
  }
  const auto total = binomial(sorted.size(), k);
  if (total > options.enumeration_cap) {
    throw std::invalid_argument(
        "select_subset: " + std::to_string(total) +
        " combinations exceed the enumeration cap of " +
        std::to_string(options.enumeration_cap) +
        "; reduce the universe or use a heuristic search");
  }
  auto cov = empirical_covariance(series, sorted, options.covariance);
  auto res = select_subset(cov, k, options);
  for (auto& i : res.indices) i = sorted[i];
  return res;
}

}  // namespace folio
