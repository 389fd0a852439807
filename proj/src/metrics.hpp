#pragma once

#include <cstdint>
#include <span>

namespace randgad {

// Mann-Whitney AUC: P(score of random anomaly > score of random normal),
// ties counted 0.5. Throws NumericError when labels are single-class.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Average precision over the descending-score sweep; ties broken by node
// index. Same single-class error contract as auc.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

}  // namespace randgad
