#include "recbench/models/losses.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/error.hpp"

namespace recbench {
namespace {

void check_pairs(std::span<const double> pos, std::span<const double> neg) {
  if (pos.size() != neg.size()) {
    throw DataError("positive and negative score arrays differ in length (" +
                    std::to_string(pos.size()) + " vs " + std::to_string(neg.size()) + ")");
  }
  if (pos.empty()) throw DataError("pairwise loss needs at least one pair");
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double bpr_loss(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  check_pairs(pos_scores, neg_scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < pos_scores.size(); ++i) {
    sum += softplus(-(pos_scores[i] - neg_scores[i]));
  }
  return sum / static_cast<double>(pos_scores.size());
}

std::vector<double> bpr_loss_grad(std::span<const double> pos_scores,
                                  std::span<const double> neg_scores) {
  check_pairs(pos_scores, neg_scores);
  const auto n = static_cast<double>(pos_scores.size());
  std::vector<double> grad(pos_scores.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = -sigmoid(-(pos_scores[i] - neg_scores[i])) / n;
  }
  return grad;
}

double margin_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                   double margin) {
  check_pairs(pos_scores, neg_scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < pos_scores.size(); ++i) {
    sum += std::max(0.0, margin - (pos_scores[i] - neg_scores[i]));
  }
  return sum / static_cast<double>(pos_scores.size());
}

double logistic_loss(double logit, double label) { return softplus(logit) - label * logit; }

}  // namespace recbench
