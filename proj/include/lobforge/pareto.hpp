#pragma once

#include <vector>

namespace lobforge {

using Objectives = std::vector<double>;

/// d1 <= d2 everywhere and d1 < d2 somewhere. Throws LengthMismatch.
bool dominates(const Objectives& d1, const Objectives& d2);

/// Fast non-dominated sort. Returns 1-based front ranks, one per point.
std::vector<int> non_dominated_sort(const std::vector<Objectives>& points);

/// Indices grouped by front, front 1 first.
std::vector<std::vector<int>> fronts_from_ranks(const std::vector<int>& ranks);

/// Crowding distance of each point within one front. Boundary points get +inf;
/// an objective with zero range adds nothing to interior points.
std::vector<double> crowding_distance(const std::vector<Objectives>& front);

/// Area dominated by a set of 2-D points and bounded by `ref`. Points not
/// strictly better than ref in both coordinates are ignored.
double hypervolume_2d(std::vector<Objectives> points, const Objectives& ref);

}  // namespace lobforge
