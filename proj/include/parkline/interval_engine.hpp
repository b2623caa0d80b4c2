#pragma once
#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>
#include <vector>

namespace parkline {

// Half-open covered interval [a, b).
struct Interval {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct AllocationOutcome {
  std::vector<Interval> fragments;  // newly covered pieces, left to right
  double consumed = 0.0;            // mass stored inside the window
  double spilled = 0.0;             // mass pushed past +half_width
  bool spilled_past_window() const { return spilled > 0.0; }
};

// Covered subset of the window [-half_width, +half_width), kept as a sorted
// vector of disjoint half-open intervals. Free space is the complement; it
// is never materialized, so coalescing bugs cannot desynchronize two maps.
//
// Strict invariant between neighbours: iv[k].b < iv[k+1].a. An allocation
// that fills a gap exactly writes the gap bound itself as the endpoint
// (never an accumulated sum), so exact fills coalesce exactly.
class CoveringState {
 public:
  explicit CoveringState(double half_width) : w_(half_width) {
    if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
  }

  static CoveringState from_intervals(double half_width, std::vector<Interval> iv) {
    CoveringState s(half_width);
    std::sort(iv.begin(), iv.end(),
              [](const Interval& l, const Interval& r) { return l.a < r.a; });
    for (const Interval& seg : iv) {
      if (!(seg.a < seg.b)) throw std::invalid_argument("empty or inverted interval");
      if (seg.a < -half_width || seg.b > half_width)
        throw std::invalid_argument("interval outside window");
      if (!s.iv_.empty() && seg.a <= s.iv_.back().b) {
        s.iv_.back().b = std::max(s.iv_.back().b, seg.b);  // overlap or exact touch
      } else {
        s.iv_.push_back(seg);
      }
    }
    return s;
  }

  double half_width() const { return w_; }
  const std::vector<Interval>& intervals() const { return iv_; }

  // Covered interval containing p, if any.
  std::optional<Interval> block_at(double p) const {
    std::size_t i = first_ending_after(p);
    if (i < iv_.size() && iv_[i].a <= p) return iv_[i];
    return std::nullopt;
  }

  double covered_length() const {
    double s = 0.0;
    for (const Interval& seg : iv_) s += seg.b - seg.a;
    return s;
  }

  // Lebesgue measure of the free part of [a, b).
  double free_measure(double a, double b) const {
    if (!(a < b)) return 0.0;
    double covered = 0.0;
    for (std::size_t i = first_ending_after(a); i < iv_.size() && iv_[i].a < b; ++i) {
      covered += std::min(iv_[i].b, b) - std::max(iv_[i].a, a);
    }
    return (b - a) - covered;
  }

  // First free point >= x; returns +half_width when the rest is covered.
  double first_free_at_or_after(double x) const {
    std::size_t i = first_ending_after(x);
    if (i < iv_.size() && iv_[i].a <= x) return std::min(iv_[i].b, w_);
    return std::min(x, w_);
  }

  // Store a file of length l arriving at x: fill free gaps left to right
  // starting at x. Data that runs past +half_width is reported as spill,
  // not an error; the caller decides whether that poisons the run.
  AllocationOutcome allocate(double x, double l) {
    assert(x >= -w_ && x < w_);
    assert(l > 0.0);
    AllocationOutcome out;

    std::size_t i = first_ending_after(x);
    std::size_t lo = i;       // first interval replaced by the merge
    double anchor = x;        // left end of the merged interval
    double cur = x;
    if (i < iv_.size() && iv_[i].a <= x) {
      // x lands on a covered block: data continues after it
      anchor = iv_[i].a;
      cur = iv_[i].b;
      ++i;
    } else if (i > 0 && iv_[i - 1].b == x) {
      // new coverage starts flush against the previous block
      --lo;
      anchor = iv_[lo].a;
    }

    double rem = l;
    while (true) {
      if (i < iv_.size() && cur == iv_[i].a) {
        cur = iv_[i].b;  // coverage reaches the next block: absorb it
        ++i;
        continue;
      }
      if (rem <= 0.0 || cur >= w_) break;
      double gap_end = (i < iv_.size()) ? iv_[i].a : w_;
      if (rem >= gap_end - cur) {
        out.fragments.push_back({cur, gap_end});
        rem -= gap_end - cur;
        cur = gap_end;
      } else {
        out.fragments.push_back({cur, cur + rem});
        cur += rem;
        rem = 0.0;
      }
    }
    out.spilled = rem;
    out.consumed = l - rem;

    if (!out.fragments.empty()) {
      iv_.erase(iv_.begin() + lo, iv_.begin() + i);
      iv_.insert(iv_.begin() + lo, Interval{anchor, cur});
    }
    return out;
  }

 private:
  // Index of the first interval with b > p.
  std::size_t first_ending_after(double p) const {
    std::size_t lo = 0, hi = iv_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (iv_[mid].b <= p) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  double w_;
  std::vector<Interval> iv_;
};

}  // namespace parkline
