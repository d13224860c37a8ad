#pragma once

#include <cstddef>
#include <vector>

namespace icsplit {

/// Confusion counts with positive = abnormal, negative = normal.
struct ConfusionCounts {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
};

/// Tally predictions against ground truth (labels/predictions: 0 negative,
/// 1 positive).
ConfusionCounts confusion(const std::vector<int>& labels, const std::vector<int>& predictions);

/// (TPR + TNR) / 2. Throws if either class is empty - an empty class is an
/// evaluation bug, never a zero.
double balanced_accuracy(const ConfusionCounts& c);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace icsplit
