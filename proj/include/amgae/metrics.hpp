#pragma once

#include <cstdint>
#include <vector>

namespace amgae {

// matches / total
double accuracy(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& truth);

// Probability that a random positive outscores a random negative, ties
// counted one half (Mann-Whitney form). Requires both classes present.
double auc(const std::vector<double>& scores, const std::vector<std::int32_t>& labels);

// Sum over positives, in score-descending order, of precision at that rank,
// divided by the number of positives. Ties keep stable input order.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::int32_t>& labels);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // population std; 0 when only one value
};

Summary summarize(const std::vector<double>& values);

}  // namespace amgae
