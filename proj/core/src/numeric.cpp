#include "unfold/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "unfold/error.hpp"

namespace unfold {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroResponse: return "ZeroResponse";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::NegativeCounts: return "NegativeCounts";
    case ErrorCode::MissingNormEstimate: return "MissingNormEstimate";
    case ErrorCode::InsufficientTrace: return "InsufficientTrace";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadReplicaCount: return "BadReplicaCount";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& weights) {
  if (u.size() != v.size() || u.size() != weights.size()) {
    throw Error(ErrorCode::ShapeMismatch, "weighted_dot operands differ in length");
  }
  return ordered_sum(static_cast<std::size_t>(u.size()), [&](std::size_t k) {
    const auto j = static_cast<Eigen::Index>(k);
    return u[j] * v[j] * weights[j];
  });
}

double weighted_norm(const Eigen::VectorXd& h, const Eigen::VectorXd& weights) {
  return std::sqrt(weighted_dot(h, h, weights));
}

namespace {

std::atomic<std::size_t> g_thread_override{0};

std::size_t env_threads() {
  if (const char* env = std::getenv("UNFOLD_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      // unparsable value: fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Below this much work a loop runs inline; thread start-up would dominate.
constexpr std::size_t kParallelWorkThreshold = 1u << 16;

}  // namespace

std::size_t thread_limit() {
  const std::size_t forced = g_thread_override.load();
  return forced > 0 ? forced : env_threads();
}

void set_thread_limit(std::size_t threads) { g_thread_override.store(threads); }

void parallel_for(std::size_t count, std::size_t work_per_index,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min(thread_limit(), count);
  if (threads <= 1 || count * std::max<std::size_t>(work_per_index, 1) < kParallelWorkThreshold) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([begin, end, &body] {
      for (std::size_t k = begin; k < end; ++k) body(k);
    });
  }
}

}  // namespace unfold
