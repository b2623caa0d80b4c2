#pragma once
#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <utility>
#include <vector>

#include "parkline/interval_engine.hpp"

namespace parkline {

struct BoundaryInfimum : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WindowExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spatial path of the stored-mass field at a fixed time: unit downward
// drift plus an upward jump of the file length at each arrival location,
// normalized so value(0) = 0. The covered set is exactly {Y > running inf},
// which is what covering_from_path extracts; the engine must agree with it.
class LevyPath {
 public:
  // jumps: (location, size) pairs anywhere in [-half_width, half_width];
  // duplicates at one location are aggregated. margin > 0 arms the
  // boundary-attainment guard used by the infimum queries.
  LevyPath(double half_width, double margin,
           std::vector<std::pair<double, double>> jumps)
      : w_(half_width), margin_(margin) {
    if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
    std::sort(jumps.begin(), jumps.end());
    pos_.reserve(jumps.size());
    size_.reserve(jumps.size());
    for (const auto& [z, s] : jumps) {
      if (z < -w_ || z > w_) throw std::invalid_argument("jump outside window");
      if (!(s > 0.0)) throw std::invalid_argument("jump sizes must be positive");
      if (!pos_.empty() && pos_.back() == z) {
        size_.back() += s;
      } else {
        pos_.push_back(z);
        size_.push_back(s);
      }
    }
    prefix_.resize(pos_.size() + 1);
    prefix_[0] = 0.0;
    for (std::size_t i = 0; i < pos_.size(); ++i) prefix_[i + 1] = prefix_[i] + size_[i];
    j0_ = prefix_[jumps_at_or_before(0.0)];

    // lowest left limit seen so far, with the latest position attaining it
    lmin_.resize(pos_.size());
    larg_.resize(pos_.size());
    double level = value_left(-w_);  // pre-window level, attained at -W
    double m = level, arg = -w_;
    for (std::size_t k = 0; k < pos_.size(); ++k) {
      double left = value_left(pos_[k]);
      if (left <= m) {
        m = left;
        arg = pos_[k];
      }
      lmin_[k] = m;
      larg_[k] = arg;
    }
    base_min_ = level;
  }

  double half_width() const { return w_; }
  double margin() const { return margin_; }
  std::size_t jump_count() const { return pos_.size(); }
  const std::vector<double>& jump_positions() const { return pos_; }
  const std::vector<double>& jump_sizes() const { return size_; }

  // Y(p), right-continuous
  double value(double p) const {
    assert(p >= -w_ && p <= w_);
    return prefix_[jumps_at_or_before(p)] - j0_ - p;
  }
  // Y(p-)
  double value_left(double p) const {
    return prefix_[jumps_before(p)] - j0_ - p;
  }

  struct InfimumTrace {
    double inf = 0.0;
    double attained_at = 0.0;  // latest position where the inf is reached
    bool within_margin_of_left_edge = false;
  };

  // Running infimum of Y over [-W, p] (left limits included).
  InfimumTrace infimum(double p) const {
    return trace(jumps_at_or_before(p), value(p), p);
  }
  // Running infimum over [-W, p), for left-limit evaluation at p.
  InfimumTrace infimum_left(double p) const {
    return trace(jumps_before(p), value_left(p), p);
  }

 private:
  InfimumTrace trace(std::size_t njumps, double val_here, double p) const {
    double m = base_min_, arg = -w_;
    if (njumps > 0) {
      m = lmin_[njumps - 1];
      arg = larg_[njumps - 1];
    }
    InfimumTrace t;
    if (val_here <= m) {
      t.inf = val_here;
      t.attained_at = p;
    } else {
      t.inf = m;
      t.attained_at = arg;
    }
    t.within_margin_of_left_edge = margin_ > 0.0 && t.attained_at < -w_ + margin_;
    return t;
  }

  std::size_t jumps_at_or_before(double p) const {
    return std::upper_bound(pos_.begin(), pos_.end(), p) - pos_.begin();
  }
  std::size_t jumps_before(double p) const {
    return std::lower_bound(pos_.begin(), pos_.end(), p) - pos_.begin();
  }

  double w_, margin_;
  std::vector<double> pos_, size_, prefix_;
  std::vector<double> lmin_, larg_;
  double j0_ = 0.0, base_min_ = 0.0;
};

inline LevyPath build_path(double half_width, double margin,
                           std::vector<std::pair<double, double>> jumps) {
  return LevyPath(half_width, margin, std::move(jumps));
}

// Mass that has swept over p: Y(p) - I(p). With left_limit the jump at p
// itself (if any) is excluded, which is the right reading for "data coming
// from strictly left of p". Errors when the governing infimum sits inside
// the guard margin at the left window edge, where truncation of the line
// could have changed the answer.
inline double remaining_mass(const LevyPath& path, double p, bool left_limit = false) {
  auto tr = left_limit ? path.infimum_left(p) : path.infimum(p);
  if (tr.within_margin_of_left_edge)
    throw BoundaryInfimum("infimum attained within margin of the left window edge");
  double val = left_limit ? path.value_left(p) : path.value(p);
  return val - tr.inf;
}

// Covered set {Y > I} of the windowed path. Both this walk and the engine
// see only in-window arrivals, so the two sides are truncated identically
// and compare exactly. A covered block reaching into the left guard zone
// means its supporting infimum sits within margin of -W, where truncation
// of the path could have changed the answer; such paths are refused.
inline CoveringState covering_from_path(const LevyPath& path) {
  const auto& pos = path.jump_positions();
  const auto& size = path.jump_sizes();
  std::vector<Interval> covered;
  bool open = false;
  double start = 0.0, cover_end = 0.0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    if (open && pos[k] <= cover_end) {
      cover_end += size[k];  // still covered (or flush): extend
    } else {
      if (open) covered.push_back({start, std::min(cover_end, path.half_width())});
      start = pos[k];
      cover_end = pos[k] + size[k];
      open = true;
    }
  }
  if (open) covered.push_back({start, std::min(cover_end, path.half_width())});
  // drop anything fully right of the window (a jump exactly at +W)
  std::erase_if(covered, [&](const Interval& iv) { return iv.a >= path.half_width(); });
  if (path.margin() > 0.0) {
    double guard = -path.half_width() + path.margin();
    for (const auto& iv : covered)
      if (iv.a < guard)
        throw BoundaryInfimum("covered block reaches within margin of the left window edge");
  }
  return CoveringState::from_intervals(path.half_width(), covered);
}

// Smallest y >= 0 such that the free measure of [origin, origin + y)
// strictly exceeds z; equivalently, the displacement of the right edge
// caused by storing mass z starting at origin.
inline double tau_forward(const CoveringState& state, double origin, double z) {
  assert(z >= 0.0);
  double w = state.half_width();
  const auto& iv = state.intervals();
  double cum = 0.0;   // free mass accumulated so far
  double cur = origin;
  std::size_t i = 0;
  while (i < iv.size() && iv[i].b <= cur) ++i;
  if (i < iv.size() && iv[i].a <= cur) {
    cur = iv[i].b;  // origin covered: free space starts after its block
    ++i;
  }
  while (cur < w) {
    double gap_end = (i < iv.size()) ? iv[i].a : w;
    if (cum + (gap_end - cur) > z) return (cur - origin) + (z - cum);
    cum += gap_end - cur;
    if (i >= iv.size()) break;
    cur = iv[i].b;
    ++i;
  }
  throw WindowExhausted("free space right of origin exhausted before passing z");
}

}  // namespace parkline
