#pragma once

#include <vector>

namespace classbd::metrics {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fpr = 0.0;
};

struct MetricReport {
    std::vector<ClassMetrics> per_class;
    ClassMetrics macro; ///< unweighted class mean
    std::vector<std::vector<long>> confusion; ///< confusion[actual][predicted]
};

/// One-vs-rest metrics per class plus macro averages.
/// Conventions: a class with zero predicted and zero actual positives scores
/// precision = recall = F1 = 1; any other zero denominator scores 0.
MetricReport evaluate_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels, int num_classes);

} // namespace classbd::metrics
