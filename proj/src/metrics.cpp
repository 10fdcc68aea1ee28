#include "ppm/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ppm {

std::optional<double> auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc_roc: size mismatch");
    std::size_t P = 0, N = 0;
    for (int y : labels) (y ? P : N)++;
    if (P == 0 || N == 0) return std::nullopt; // SingleClass

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // wins = pairs where positive outranks negative; ties count half.
    // numerator kept integral (doubled) so the result is exact.
    double numerator2 = 0.0;
    std::size_t neg_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t pos_in_group = 0, neg_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? pos_in_group : neg_in_group)++;
            ++j;
        }
        numerator2 += 2.0 * static_cast<double>(pos_in_group) * static_cast<double>(neg_below);
        numerator2 += static_cast<double>(pos_in_group) * static_cast<double>(neg_in_group);
        neg_below += neg_in_group;
        i = j;
    }
    return numerator2 / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

std::optional<double> auc_pr(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc_pr: size mismatch");
    std::size_t P = 0;
    for (int y : labels) P += y;
    if (P == 0) return std::nullopt; // NoPositives

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t tp = 0, cut = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            pos_in_group += labels[order[j]];
            ++j;
        }
        tp += pos_in_group;
        cut = j; // whole tie group enters the cut
        double precision = static_cast<double>(tp) / static_cast<double>(cut);
        // one precision term per positive, accumulated in descending-cut order
        for (std::size_t g = 0; g < pos_in_group; ++g) ap += precision;
        i = j;
    }
    return ap / static_cast<double>(P);
}

std::pair<std::optional<double>, double> f1_accuracy(const std::vector<double>& scores,
                                                     const std::vector<int>& labels,
                                                     double threshold) {
    if (scores.empty() || scores.size() != labels.size())
        throw std::invalid_argument("f1_accuracy: bad input");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        if (pred && labels[i]) ++tp;
        else if (pred) ++fp;
        else if (labels[i]) ++fn;
        else ++tn;
    }
    double accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    std::optional<double> f1;
    if (tp + fp > 0 && tp + fn > 0) {
        double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double rec = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (prec + rec > 0.0) f1 = 2.0 * prec * rec / (prec + rec);
    }
    return {f1, accuracy};
}

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
    MetricsReport r;
    r.n_examples = scores.size();
    for (int y : labels) r.n_positive += y;
    r.auc_roc = auc_roc(scores, labels);
    r.auc_pr = auc_pr(scores, labels);
    auto [f1, acc] = f1_accuracy(scores, labels, threshold);
    r.f1 = f1;
    r.accuracy = acc;
    r.threshold = threshold;
    return r;
}

static void put_opt(std::ostream& out, const std::optional<double>& v) {
    if (v) out << *v;
    // blank when undefined
}

void write_metrics_csv_header(std::ostream& out) {
    out << "auc_roc,f1,accuracy,auc_pr,n_examples,n_positive,threshold\n";
}

void write_metrics_csv_row(const MetricsReport& r, std::ostream& out) {
    put_opt(out, r.auc_roc);
    out << ",";
    put_opt(out, r.f1);
    out << "," << r.accuracy << ",";
    put_opt(out, r.auc_pr);
    out << "," << r.n_examples << "," << r.n_positive << "," << r.threshold << "\n";
}

} // namespace ppm
