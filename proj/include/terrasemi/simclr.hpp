#pragma once

// NT-Xent contrastive loss over 2N embeddings where (2k, 2k+1) are the
// positive pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "terrasemi/error.hpp"

namespace terrasemi {

/// Temperature, strictly positive.
class Temperature {
 public:
  explicit Temperature(double tau = 0.1) : tau_(tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw Error(ErrorKind::kInvalidArgument, "temperature must be positive and finite");
    }
  }
  double value() const noexcept { return tau_; }

 private:
  double tau_;
};

/// 2N x D row-major embeddings.
class EmbeddingBatch {
 public:
  EmbeddingBatch(std::size_t count, std::size_t dim, std::vector<double> values)
      : count_(count), dim_(dim), values_(std::move(values)) {
    if (count_ < 2 || count_ % 2 != 0) {
      throw Error(ErrorKind::kInvalidArgument, "embedding count must be 2N with N >= 1");
    }
    if (dim_ == 0 || values_.size() != count_ * dim_) {
      throw Error(ErrorKind::kDimensionMismatch, "embedding payload does not match 2N x D");
    }
    for (std::size_t k = 0; k < count_; ++k) {
      double sq = 0.0;
      for (double v : row(k)) {
        if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, "embedding is not finite");
        sq += v * v;
      }
      if (sq == 0.0) throw Error(ErrorKind::kInvalidArgument, "zero-norm embedding");
    }
  }

  std::size_t count() const noexcept { return count_; }
  std::size_t pairs() const noexcept { return count_ / 2; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }

  static std::size_t partner(std::size_t k) noexcept { return k ^ 1u; }

 private:
  std::size_t count_;
  std::size_t dim_;
  std::vector<double> values_;
};

inline double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kDimensionMismatch, "cosine_sim: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::kInvalidArgument, "cosine_sim: zero-norm input");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// -log( exp(sim(i,j)/tau) / sum_{k != i} exp(sim(i,k)/tau) ), evaluated as
/// logsumexp - sim(i,j)/tau with the max logit subtracted.
inline double nt_xent_pair(const EmbeddingBatch& batch, std::size_t i, std::size_t j,
                           Temperature tau) {
  if (i >= batch.count() || j >= batch.count() || i == j) {
    throw Error(ErrorKind::kInvalidArgument, "nt_xent_pair: invalid indices");
  }
  std::vector<double> logits;
  logits.reserve(batch.count() - 1);
  double positive = 0.0;
  for (std::size_t k = 0; k < batch.count(); ++k) {
    if (k == i) continue;
    const double l = cosine_sim(batch.row(i), batch.row(k)) / tau.value();
    if (k == j) positive = l;
    logits.push_back(l);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  return std::max(0.0, mx + std::log(sum) - positive);
}

/// Mean over both orderings of every positive pair (2N terms).
inline double nt_xent_batch(const EmbeddingBatch& batch, Temperature tau) {
  double total = 0.0;
  for (std::size_t k = 0; k < batch.count(); ++k) {
    total += nt_xent_pair(batch, k, EmbeddingBatch::partner(k), tau);
  }
  return total / static_cast<double>(batch.count());
}

}  // namespace terrasemi
