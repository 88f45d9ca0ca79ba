#pragma once

#include <span>
#include <vector>

namespace recbench {

double sigmoid(double x);
// ln(1 + e^x) without overflow.
double softplus(double x);

// Mean of -ln sigmoid(pos - neg) over pairs. Throws DataError on a length
// mismatch or empty input.
double bpr_loss(std::span<const double> pos_scores, std::span<const double> neg_scores);

// d bpr_loss / d pos_scores; the gradient w.r.t. neg_scores is its negation.
std::vector<double> bpr_loss_grad(std::span<const double> pos_scores,
                                  std::span<const double> neg_scores);

// Mean hinge max(0, margin - (pos - neg)).
double margin_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                   double margin);

// Binary cross-entropy of sigmoid(logit) against label in {0, 1}.
double logistic_loss(double logit, double label);

}  // namespace recbench
