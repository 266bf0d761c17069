#include "graphkrig/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "graphkrig/error.hpp"

namespace graphkrig {

double mse(const Vector& pred, const Vector& truth, std::span<const std::size_t> idx) {
  require(!idx.empty(), "mse: empty index set");
  double total = 0.0;
  for (std::size_t i : idx) {
    require(i < std::size_t(pred.size()) && i < std::size_t(truth.size()),
            "mse: index out of range");
    const double e = pred(Index(i)) - truth(Index(i));
    total += e * e;
  }
  return total / double(idx.size());
}

// Mann-Whitney form with midranks. Rank sums are multiples of 1/2 and hence
// exact, so the result matches pair counting bit for bit.
std::optional<double> auc(const Vector& scores, const Vector& labels,
                          std::span<const std::size_t> idx) {
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(idx.size());
  for (std::size_t i : idx) {
    require(i < std::size_t(scores.size()) && i < std::size_t(labels.size()),
            "auc: index out of range");
    const double label = labels(Index(i));
    require(label == 1.0 || label == -1.0, "auc: labels must be +1 or -1");
    require(std::isfinite(scores(Index(i))), "auc: scores must be finite");
    items.push_back({scores(Index(i)), label > 0.0});
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  double positives = 0.0;
  double negatives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < items.size();) {
    std::size_t end = k;
    double pos_here = 0.0;
    while (end < items.size() && items[end].score == items[k].score) {
      pos_here += items[end].positive ? 1.0 : 0.0;
      ++end;
    }
    const double mid_rank = (double(k + 1) + double(end)) / 2.0;
    rank_sum += pos_here * mid_rank;
    positives += pos_here;
    negatives += double(end - k) - pos_here;
    k = end;
  }
  if (positives == 0.0 || negatives == 0.0) return std::nullopt;
  const double concordant = rank_sum - positives * (positives + 1.0) / 2.0;
  return concordant / (positives * negatives);
}

}  // namespace graphkrig
