#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

namespace ppm {

struct MetricsReport {
    std::optional<double> auc_roc;
    std::optional<double> auc_pr;
    std::optional<double> f1;
    double accuracy = 0.0;
    std::size_t n_examples = 0;
    std::size_t n_positive = 0;
    double threshold = 0.5;
};

// Mann-Whitney AUC with average-rank tie handling; absent when only one class
// is present.
std::optional<double> auc_roc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision with tied scores grouped into a single cut; absent when
// there are no positives.
std::optional<double> auc_pr(const std::vector<double>& scores, const std::vector<int>& labels);

// f1 is absent when no positive predictions are made (or precision+recall = 0).
std::pair<std::optional<double>, double> f1_accuracy(const std::vector<double>& scores,
                                                     const std::vector<int>& labels,
                                                     double threshold = 0.5);

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_row(const MetricsReport& r, std::ostream& out);

} // namespace ppm
