#include "lobforge/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lobforge/error.hpp"

namespace lobforge {

bool dominates(const Objectives& d1, const Objectives& d2) {
  if (d1.size() != d2.size()) throw Error(ErrorCode::LengthMismatch, "objective vectors differ in length");
  bool strict = false;
  for (std::size_t k = 0; k < d1.size(); ++k) {
    if (d1[k] > d2[k]) return false;
    if (d1[k] < d2[k]) strict = true;
  }
  return strict;
}

std::vector<int> non_dominated_sort(const std::vector<Objectives>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<int> rank(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(points[p], points[q]))
        dominated[p].push_back(q);
      else if (dominates(points[q], points[p]))
        ++count[p];
    }
    if (count[p] == 0) {
      rank[p] = 1;
      current.push_back(p);
    }
  }
  int r = 1;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (const auto p : current)
      for (const auto q : dominated[p])
        if (--count[q] == 0) {
          rank[q] = r + 1;
          next.push_back(q);
        }
    ++r;
    current = std::move(next);
  }
  return rank;
}

std::vector<std::vector<int>> fronts_from_ranks(const std::vector<int>& ranks) {
  const int max_rank = ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end());
  std::vector<std::vector<int>> fronts(static_cast<std::size_t>(max_rank));
  for (std::size_t i = 0; i < ranks.size(); ++i) fronts[static_cast<std::size_t>(ranks[i] - 1)].push_back(static_cast<int>(i));
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  const std::size_t k_obj = front.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < k_obj; ++k) {
    std::iota(order.begin(), order.end(), 0);
    // Ties broken by the full vector, then index, so the order is reproducible.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (front[a][k] != front[b][k]) return front[a][k] < front[b][k];
      if (front[a] != front[b]) return front[a] < front[b];
      return a < b;
    });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double range = front[order.back()][k] - front[order.front()][k];
    if (!(range > 0.0)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i)
      dist[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
  }
  return dist;
}

double hypervolume_2d(std::vector<Objectives> points, const Objectives& ref) {
  if (ref.size() != 2) throw Error(ErrorCode::LengthMismatch, "2-D hypervolume needs a 2-D reference");
  std::erase_if(points, [&](const Objectives& p) {
    if (p.size() != 2) throw Error(ErrorCode::LengthMismatch, "2-D hypervolume needs 2-D points");
    return !(p[0] < ref[0] && p[1] < ref[1]);
  });
  std::sort(points.begin(), points.end());
  double area = 0.0;
  double ceiling = ref[1];
  for (const auto& p : points) {
    if (p[1] >= ceiling) continue;
    area += (ref[0] - p[0]) * (ceiling - p[1]);
    ceiling = p[1];
  }
  return area;
}

}  // namespace lobforge
