#include "amgae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amgae {

double accuracy(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("accuracy: prediction/truth length mismatch");
    if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double auc(const std::vector<double>& scores, const std::vector<std::int32_t>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: score/label length mismatch");

    // Rank-based Mann-Whitney: average ranks over tied scores, then
    // U = rank_sum_pos - P(P+1)/2 and AUC = U / (P*N).
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double pos = 0.0, neg = 0.0, pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (labels[k] == 1) {
            pos += 1.0;
            pos_rank_sum += rank[k];
        } else if (labels[k] == 0) {
            neg += 1.0;
        } else {
            throw std::invalid_argument("auc: labels must be 0 or 1");
        }
    }
    if (pos == 0.0 || neg == 0.0)
        throw std::invalid_argument("auc: both classes must be present");
    const double u = pos_rank_sum - pos * (pos + 1.0) / 2.0;
    return u / (pos * neg);
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::int32_t>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("average_precision: score/label length mismatch");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double positives = 0.0;
    double ap_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::int32_t lab = labels[order[r]];
        if (lab != 0 && lab != 1)
            throw std::invalid_argument("average_precision: labels must be 0 or 1");
        if (lab == 1) {
            positives += 1.0;
            ap_sum += positives / static_cast<double>(r + 1);
        }
    }
    if (positives == 0.0)
        throw std::invalid_argument("average_precision: no positive labels");
    return ap_sum / positives;
}

Summary summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    Summary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(values.size()));
    }
    return s;
}

}  // namespace amgae
