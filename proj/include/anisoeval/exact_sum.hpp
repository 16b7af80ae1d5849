// Copyright 2026 The AnisoEval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

namespace anisoeval {

/// Exact double summation (Shewchuk partials, same scheme as Python's
/// math.fsum). The running sum is held as a list of non-overlapping
/// partials representing the exact value, so folding the same multiset of
/// addends in any order — including merging two accumulators either way
/// around — yields a bit-identical rounded value.
class ExactSum {
 public:
  void add(double x) {
    std::size_t used = 0;
    for (double p : partials_) {
      if (std::abs(x) < std::abs(p)) std::swap(x, p);
      const double hi = x + p;
      const double lo = p - (hi - x);
      if (lo != 0.0) partials_[used++] = lo;
      x = hi;
    }
    partials_.resize(used);
    partials_.push_back(x);
  }

  void merge(const ExactSum& other) {
    for (double p : other.partials_) add(p);
  }

  /// Correctly rounded value of the exact sum.
  double value() const {
    double hi = 0.0;
    std::size_t n = partials_.size();
    if (n > 0) {
      hi = partials_[--n];
      double lo = 0.0;
      while (n > 0) {
        const double x = hi;
        const double y = partials_[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
      }
      // Nudge for correct round-half-even across remaining partials.
      if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                    (lo > 0.0 && partials_[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
      }
    }
    return hi;
  }

  void reset(double v) {
    partials_.clear();
    if (v != 0.0) partials_.push_back(v);
  }

 private:
  std::vector<double> partials_;
};

}  // namespace anisoeval
