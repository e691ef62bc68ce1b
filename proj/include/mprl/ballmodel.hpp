#pragma once

// Identified ball model: three-frame finite-difference velocity estimate and
// certainty-equivalent forward propagation to the paddle plane.
//
// Coordinates here are the agent frame: x grows away from the agent's paddle
// (so an approaching ball has v_x < 0), y is the raster row (grows downward).

#include <array>
#include <cmath>
#include <cstddef>

#include "mprl/errors.hpp"

namespace mprl {

struct Centroid {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Centroid&, const Centroid&) = default;
};

/// The three most recent ball centroids, oldest first.
class BallTrack {
 public:
  BallTrack() = default;

  /// Builds a full track directly; `bounce` overrides impact detection.
  BallTrack(Centroid tm2, Centroid tm1, Centroid t, bool bounce)
      : points_{tm2, tm1, t}, count_(3), bounce_(bounce) {}

  /// Appends the newest centroid. An impact is flagged whenever either axis'
  /// last two displacements differ in sign.
  void push(Centroid c) {
    if (count_ < 3) {
      points_[count_++] = c;
    } else {
      points_[0] = points_[1];
      points_[1] = points_[2];
      points_[2] = c;
    }
    bounce_ = count_ == 3 && (sign_changed(0) || sign_changed(1));
  }

  void reset() noexcept {
    count_ = 0;
    bounce_ = false;
  }

  [[nodiscard]] bool valid() const noexcept { return count_ == 3; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool bounce_since_last() const noexcept { return bounce_; }

  [[nodiscard]] const Centroid& p_tm2() const { return at(0); }
  [[nodiscard]] const Centroid& p_tm1() const { return at(1); }
  [[nodiscard]] const Centroid& p_t() const { return at(2); }

  /// Most recent centroid, whatever the fill level. Requires size() >= 1.
  [[nodiscard]] const Centroid& latest() const {
    if (count_ == 0) throw InvalidTrack();
    return points_[count_ - 1];
  }

 private:
  [[nodiscard]] const Centroid& at(std::size_t i) const {
    if (!valid()) throw InvalidTrack();
    return points_[i];
  }

  [[nodiscard]] bool sign_changed(int axis) const {
    auto coord = [axis](const Centroid& c) { return axis == 0 ? c.x : c.y; };
    const double d1 = coord(points_[2]) - coord(points_[1]);
    const double d2 = coord(points_[1]) - coord(points_[0]);
    auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
    return sgn(d1) != sgn(d2);
  }

  std::array<Centroid, 3> points_{};
  std::size_t count_ = 0;
  bool bounce_ = false;
};

struct VelocityEstimate {
  double v_x = 0.0;
  double v_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
};

/// Mean of the two most recent displacements with their population variance,
/// or the latest displacement alone (zero variance) right after an impact.
inline VelocityEstimate estimate_velocity(const BallTrack& track) {
  if (!track.valid()) throw InvalidTrack();
  const double vx1 = track.p_t().x - track.p_tm1().x;
  const double vy1 = track.p_t().y - track.p_tm1().y;
  const double vx2 = track.p_tm1().x - track.p_tm2().x;
  const double vy2 = track.p_tm1().y - track.p_tm2().y;
  if (track.bounce_since_last()) return {vx1, vy1, 0.0, 0.0};
  auto mean = [](double a, double b) { return 0.5 * (a + b); };
  auto var = [](double a, double b) {
    const double m = 0.5 * (a + b);
    return 0.5 * ((a - m) * (a - m) + (b - m) * (b - m));
  };
  return {mean(vx1, vx2), mean(vy1, vy2), var(vx1, vx2), var(vy1, vy2)};
}

struct Arrival {
  int steps = 0;       ///< T: steps until the ball reaches the paddle plane
  double y = 0.0;      ///< ordinate on arrival
};

/// Folds an unconstrained ordinate back into [lo, hi] by repeated mirror reflection.
inline double fold_into(double y, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  const double period = 2.0 * span;
  double u = std::fmod(y - lo, period);
  if (u < 0.0) u += period;
  if (u > span) u = period - u;
  return lo + u;
}

inline constexpr int kDefaultHorizonCap = 200;

/// Noise-free propagation x += v_x, y += v_y with mirror walls at [y_min, y_max]
/// until x first reaches the paddle plane. Exact for dyadic inputs.
inline Arrival predict_arrival(Centroid pos, const VelocityEstimate& vel, double paddle_plane_x,
                               double y_min, double y_max, int t_max = kDefaultHorizonCap) {
  const double gap = paddle_plane_x - pos.x;
  if (vel.v_x == 0.0 || gap == 0.0 || (gap > 0.0) != (vel.v_x > 0.0)) throw NoImpact();
  const double steps = std::ceil(gap / vel.v_x);
  if (steps > static_cast<double>(t_max)) throw HorizonExceeded(t_max);
  const int t = static_cast<int>(steps);
  return {t, fold_into(pos.y + t * vel.v_y, y_min, y_max)};
}

}  // namespace mprl
