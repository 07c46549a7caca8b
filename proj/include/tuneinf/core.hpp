#pragma once

// Basic vocabulary shared by every tuneinf module: Eigen aliases, the error
// type, datasets, boxes, the seeded generator and deterministic reductions.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace tuneinf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowRef = Eigen::Ref<const Eigen::VectorXd>;

enum class ErrorCode {
  SingularJacobian,
  NoConvergence,
  DomainEscape,
  Evaluation,
  RefitFailure,
  CriterionFailure,
  BoundaryFit,
  FlatLimitSuspected,
  EvaluationOutsideDomain,
  FailureRateExceeded,
  RankDeficient,
  InvalidInput,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DomainEscape: return "DomainEscape";
    case ErrorCode::Evaluation: return "Evaluation";
    case ErrorCode::RefitFailure: return "RefitFailure";
    case ErrorCode::CriterionFailure: return "CriterionFailure";
    case ErrorCode::BoundaryFit: return "BoundaryFit";
    case ErrorCode::FlatLimitSuspected: return "FlatLimitSuspected";
    case ErrorCode::EvaluationOutsideDomain: return "EvaluationOutsideDomain";
    case ErrorCode::FailureRateExceeded: return "FailureRateExceeded";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Axis-aligned box, one closed interval per coordinate.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw Error(ErrorCode::InvalidInput, "box bounds differ in length");
  }
  static Box interval(double a, double b) { return Box(Vec::Constant(1, a), Vec::Constant(1, b)); }

  Eigen::Index dim() const { return lower.size(); }
  double width(Eigen::Index j) const { return upper[j] - lower[j]; }

  bool contains(const Vec& x) const {
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (x[j] < lower[j] || x[j] > upper[j]) return false;
    return true;
  }
  Vec project(const Vec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

  void validate_strict() const {
    for (Eigen::Index j = 0; j < dim(); ++j)
      if (!(lower[j] < upper[j])) throw Error(ErrorCode::InvalidInput, "box requires lower < upper on every axis");
  }
};

struct ColumnRoles {
  int response = -1;
  std::vector<int> covariates;
};

/// n i.i.d. rows of dimension d, stored row-major so each row is contiguous.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(RowMat rows, std::optional<ColumnRoles> roles = std::nullopt)
      : rows_(std::move(rows)), roles_(std::move(roles)) {
    if (rows_.rows() < 2) throw Error(ErrorCode::InvalidInput, "dataset needs at least 2 rows");
    if (!rows_.allFinite()) throw Error(ErrorCode::InvalidInput, "dataset contains non-finite entries");
  }

  Eigen::Index n() const { return rows_.rows(); }
  Eigen::Index d() const { return rows_.cols(); }
  const RowMat& rows() const { return rows_; }
  const std::optional<ColumnRoles>& roles() const { return roles_; }

  Eigen::Map<const Vec> row(Eigen::Index i) const { return {rows_.data() + i * rows_.cols(), rows_.cols()}; }

  Dataset subset(const std::vector<Eigen::Index>& idx) const {
    RowMat out(static_cast<Eigen::Index>(idx.size()), d());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = rows_.row(idx[k]);
    return Dataset(std::move(out), roles_);
  }

 private:
  RowMat rows_;
  std::optional<ColumnRoles> roles_;
};

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// SplitMix64; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do { x = (*this)(); } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

/// Seed of the independent stream `index` derived from `master`.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  g();
  return g();
}

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  SplitMix64 g(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(g.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Deterministic reductions and worker pool
// ---------------------------------------------------------------------------

/// Pairwise-tree sum of f(i) for i in [begin, end). The tree shape depends
/// only on the range, so results do not depend on thread count.
template <class T, class F>
T pairwise_sum(Eigen::Index begin, Eigen::Index end, F&& f) {
  const Eigen::Index len = end - begin;
  if (len <= 16) {
    T acc = f(begin);
    for (Eigen::Index i = begin + 1; i < end; ++i) acc += f(i);
    return acc;
  }
  const Eigen::Index mid = begin + len / 2;
  T left = pairwise_sum<T>(begin, mid, f);
  left += pairwise_sum<T>(mid, end, f);
  return left;
}

inline std::atomic<unsigned>& max_threads_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}

/// Caps worker threads; 0 means hardware concurrency.
inline void set_max_threads(unsigned n) { max_threads_setting() = n; }

inline unsigned worker_count(std::size_t tasks) {
  unsigned cap = max_threads_setting().load();
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(tasks, 1)));
}

/// Runs f(i) for i in [0, n). Work is claimed dynamically but each index
/// writes its own slot, so outputs are scheduling independent. The first
/// exception thrown by any task is rethrown after all workers join.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Small linear-algebra helpers
// ---------------------------------------------------------------------------

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

inline double condition_number(const Mat& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

inline constexpr double kSingularCondition = 1e12;

/// Inverse of a square matrix, or SingularJacobian when cond > 1e12.
inline Mat checked_inverse(const Mat& a, const char* what) {
  const double c = condition_number(a);
  if (!(c <= kSingularCondition) || !a.allFinite())
    throw Error(ErrorCode::SingularJacobian, std::string(what) + " has condition number " + std::to_string(c));
  return a.fullPivLu().inverse();
}

/// Column-major flattening, (a_1, ..., a_q) -> (a_1^T, ..., a_q^T)^T.
inline Vec flatten(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }

inline Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

}  // namespace tuneinf
