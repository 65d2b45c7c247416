// Copyright 2026 The PrivBandit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVBANDIT_STATS_H_
#define PRIVBANDIT_STATS_H_

#include <span>
#include <vector>

namespace privbandit {

struct MeanStderr {
  double mean = 0.0;
  // Sample standard deviation / sqrt(n); 0 when n < 2.
  double std_error = 0.0;
};

// Summed in index order.
MeanStderr SummarizeSamples(std::span<const double> values);

// Average ranks (ties share the mean rank), 1-based.
std::vector<double> FractionalRanks(std::span<const double> values);

// Spearman rank correlation with tie correction (Pearson on average ranks).
// Returns 0 when either series is constant.
double SpearmanRho(std::span<const double> x, std::span<const double> y);

}  // namespace privbandit

#endif  // PRIVBANDIT_STATS_H_
