#include "icsplit/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace icsplit {

ConfusionCounts confusion(const std::vector<int>& labels, const std::vector<int>& predictions) {
    if (labels.size() != predictions.size())
        throw std::invalid_argument("confusion: size mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            (predictions[i] ? c.tp : c.fn) += 1;
        } else {
            (predictions[i] ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double balanced_accuracy(const ConfusionCounts& c) {
    const std::size_t pos = c.tp + c.fn, neg = c.tn + c.fp;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("balanced_accuracy: empty class");
    return 0.5 * (double(c.tp) / double(pos) + double(c.tn) / double(neg));
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate: empty list");
    Aggregate a;
    for (double v : values) a.mean += v;
    a.mean /= double(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(acc / double(values.size()));
    return a;
}

}  // namespace icsplit
