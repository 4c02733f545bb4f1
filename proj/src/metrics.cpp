#include "classbd/metrics.hpp"

#include "classbd/common.hpp"

namespace classbd::metrics {

MetricReport evaluate_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels, int num_classes) {
    require(predictions.size() == labels.size(), "evaluate_metrics: prediction/label count mismatch");
    require(num_classes > 0, "evaluate_metrics: num_classes must be positive");
    require(!labels.empty(), "evaluate_metrics: empty input");

    MetricReport report;
    report.confusion.assign(static_cast<std::size_t>(num_classes),
                            std::vector<long>(static_cast<std::size_t>(num_classes), 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && labels[i] < num_classes, "evaluate_metrics: label out of range");
        require(predictions[i] >= 0 && predictions[i] < num_classes,
                "evaluate_metrics: prediction out of range");
        report.confusion[static_cast<std::size_t>(labels[i])]
                        [static_cast<std::size_t>(predictions[i])]++;
    }

    const double total = static_cast<double>(labels.size());
    report.per_class.resize(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        const std::size_t cu = static_cast<std::size_t>(c);
        double tp = static_cast<double>(report.confusion[cu][cu]);
        double actual = 0.0, predicted = 0.0;
        for (int j = 0; j < num_classes; ++j) {
            actual += static_cast<double>(report.confusion[cu][static_cast<std::size_t>(j)]);
            predicted += static_cast<double>(report.confusion[static_cast<std::size_t>(j)][cu]);
        }
        const double fp = predicted - tp;
        const double fn = actual - tp;
        const double tn = total - tp - fp - fn;

        ClassMetrics m;
        if (predicted == 0.0 && actual == 0.0) {
            m.precision = m.recall = m.f1 = 1.0;
        } else {
            m.precision = predicted > 0.0 ? tp / predicted : 0.0;
            m.recall = actual > 0.0 ? tp / actual : 0.0;
            m.f1 = (m.precision + m.recall) > 0.0
                       ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                       : 0.0;
        }
        m.fpr = (fp + tn) > 0.0 ? fp / (fp + tn) : 0.0;
        report.per_class[cu] = m;

        report.macro.precision += m.precision;
        report.macro.recall += m.recall;
        report.macro.f1 += m.f1;
        report.macro.fpr += m.fpr;
    }
    const double nc = static_cast<double>(num_classes);
    report.macro.precision /= nc;
    report.macro.recall /= nc;
    report.macro.f1 /= nc;
    report.macro.fpr /= nc;
    return report;
}

} // namespace classbd::metrics
