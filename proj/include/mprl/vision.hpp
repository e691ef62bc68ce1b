#pragma once

// Sprite extraction by exact intensity matching.

#include <algorithm>
#include <cmath>
#include <optional>

#include "mprl/ballmodel.hpp"
#include "mprl/errors.hpp"
#include "mprl/pong.hpp"

namespace mprl::vision {

/// Columns scanned around the previous ball position (full height).
inline constexpr int kWindowWidth = 12;

namespace detail {

struct Scan {
  double sum_row = 0.0;
  double sum_col = 0.0;
  int hits = 0;
  int min_col = pong::kSize;
  int max_col = -1;
};

inline Scan scan(const pong::Frame& f, std::uint8_t value, int col_lo, int col_hi) {
  Scan s;
  for (int r = 0; r < pong::kSize; ++r) {
    for (int c = col_lo; c < col_hi; ++c) {
      if (f.at(r, c) != value) continue;
      s.sum_row += r;
      s.sum_col += c;
      ++s.hits;
      s.min_col = std::min(s.min_col, c);
      s.max_col = std::max(s.max_col, c);
    }
  }
  return s;
}

}  // namespace detail

/// Centroid (x = mean column, y = mean row) of the 236-valued pixels. With a
/// prior only the 80x12 band around the prior column is scanned; a miss, or a
/// sprite touching the band edge, falls back to the full frame.
inline Centroid find_ball(const pong::Frame& frame, std::optional<Centroid> prior = std::nullopt) {
  if (prior) {
    const int centre = static_cast<int>(std::floor(prior->x));
    const int lo = std::clamp(centre - kWindowWidth / 2, 0, pong::kSize);
    const int hi = std::clamp(centre + kWindowWidth / 2, 0, pong::kSize);
    const auto s = detail::scan(frame, pong::kBall, lo, hi);
    const bool clipped = (s.min_col == lo && lo > 0) || (s.max_col == hi - 1 && hi < pong::kSize);
    if (s.hits > 0 && !clipped) return {s.sum_col / s.hits, s.sum_row / s.hits};
  }
  const auto s = detail::scan(frame, pong::kBall, 0, pong::kSize);
  if (s.hits == 0) throw BallNotFound();
  return {s.sum_col / s.hits, s.sum_row / s.hits};
}

/// Mean row of the 92-valued pixels.
inline double find_paddle(const pong::Frame& frame) {
  const auto s = detail::scan(frame, pong::kAgentPaddle, 0, pong::kSize);
  if (s.hits == 0) throw PaddleNotFound();
  return s.sum_row / s.hits;
}

}  // namespace mprl::vision
