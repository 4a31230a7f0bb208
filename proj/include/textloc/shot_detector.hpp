#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "textloc/error.hpp"
#include "textloc/image.hpp"

namespace textloc {

/// Colour-moment signature of a frame: component-major [a1*M1^1..a1*M1^H, a2*M2^1.., a3*M3^1..].
struct MomentFeature {
  std::vector<double> values;
  int frame_index = 0;
};

/// A cut between frames cut_after-1 and cut_after.
struct ShotBoundary {
  int cut_after = 0;
  double distance = 0.0;
  friend bool operator==(const ShotBoundary&, const ShotBoundary&) = default;
};

/// Inclusive frame interval.
struct Shot {
  int start = 0;
  int end = 0;
  int length() const noexcept { return end - start + 1; }
  friend bool operator==(const Shot&, const Shot&) = default;
};

struct MomentParams {
  int moments = 3;
  std::array<double, 3> weights{0.6, 0.2, 0.2};
};

inline double first_moment(std::span<const double> plane) {
  if (plane.empty()) throw DomainError("first_moment: empty plane");
  return std::accumulate(plane.begin(), plane.end(), 0.0) / static_cast<double>(plane.size());
}

/// ((1/N) sum (p - mean)^h)^(1/h), using the signed real root when h is odd and the radicand negative.
inline double higher_moment(std::span<const double> plane, int h) {
  if (h < 2) throw DomainError("higher_moment: order must be >= 2, got " + std::to_string(h));
  const double mean = first_moment(plane);
  double acc = 0.0;
  for (double p : plane) {
    const double d = p - mean;
    double term = d;
    for (int k = 1; k < h; ++k) term *= d;
    acc += term;
  }
  const double radicand = acc / static_cast<double>(plane.size());
  const double root = std::pow(std::abs(radicand), 1.0 / h);
  return radicand < 0.0 ? -root : root;
}

inline MomentFeature feature_vector(const Frame& frame, const MomentParams& params = {}) {
  if (params.moments < 1) throw DomainError("feature_vector: H must be >= 1");
  for (double a : params.weights)
    if (!(a > 0.0)) throw DomainError("feature_vector: weights must be positive");
  MomentFeature f;
  f.frame_index = frame.index;
  f.values.reserve(3 * static_cast<std::size_t>(params.moments));
  const std::array<const GrayImage*, 3> planes{&frame.y, &frame.i, &frame.q};
  for (std::size_t c = 0; c < planes.size(); ++c) {
    const auto data = planes[c]->data();
    for (int h = 1; h <= params.moments; ++h)
      f.values.push_back(params.weights[c] * (h == 1 ? first_moment(data) : higher_moment(data, h)));
  }
  return f;
}

/// Sum over entries of |a_k - b_k|^q. With q = 2 this is the squared Euclidean distance.
inline double frame_distance(const MomentFeature& a, const MomentFeature& b, int q = 2) {
  if (a.values.size() != b.values.size())
    throw DomainError("frame_distance: feature lengths differ (" + std::to_string(a.values.size()) + " vs " +
                      std::to_string(b.values.size()) + ")");
  if (q < 1) throw DomainError("frame_distance: q must be >= 1");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double diff = std::abs(a.values[k] - b.values[k]);
    d += q == 2 ? diff * diff : std::pow(diff, q);
  }
  return d;
}

/// Fixed cut threshold, or mean + k*stddev of the distance series.
struct CutThreshold {
  bool automatic = true;
  double value = 3.0;  // T1 when fixed, k when automatic

  static CutThreshold fixed(double t1) { return {false, t1}; }
  static CutThreshold auto_sigma(double k = 3.0) { return {true, k}; }
};

/// distances[j-1] = d(F_j, F_{j-1}) for j = 1..n-1.
inline std::vector<double> distance_series(std::span<const MomentFeature> features, int q = 2) {
  std::vector<double> out;
  for (std::size_t j = 1; j < features.size(); ++j) out.push_back(frame_distance(features[j], features[j - 1], q));
  return out;
}

/// Resolves the numeric threshold for a distance series.
inline double resolve_threshold(std::span<const double> distances, const CutThreshold& threshold) {
  if (!threshold.automatic) {
    if (!(threshold.value > 0.0)) throw DomainError("cut threshold must be > 0");
    return threshold.value;
  }
  if (distances.empty()) return 0.0;
  const double n = static_cast<double>(distances.size());
  const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  double var = 0.0;
  for (double d : distances) var += (d - mean) * (d - mean);
  return mean + threshold.value * std::sqrt(var / n);
}

/// Boundaries wherever the consecutive-frame distance strictly exceeds T1.
inline std::vector<ShotBoundary> detect_cuts(std::span<const MomentFeature> features, int q = 2,
                                             const CutThreshold& threshold = CutThreshold::auto_sigma(),
                                             double* resolved = nullptr) {
  std::vector<ShotBoundary> cuts;
  if (features.size() < 2) {
    if (resolved) *resolved = threshold.automatic ? 0.0 : threshold.value;
    return cuts;
  }
  const auto distances = distance_series(features, q);
  const double t1 = resolve_threshold(distances, threshold);
  if (resolved) *resolved = t1;
  for (std::size_t j = 1; j < features.size(); ++j)
    if (distances[j - 1] > t1) cuts.push_back({static_cast<int>(j), distances[j - 1]});
  return cuts;
}

inline std::vector<Shot> cuts_to_shots(std::span<const ShotBoundary> boundaries, int n_frames) {
  std::vector<Shot> shots;
  if (n_frames <= 0) return shots;
  int start = 0;
  for (const auto& b : boundaries) {
    if (b.cut_after <= start || b.cut_after >= n_frames) continue;
    shots.push_back({start, b.cut_after - 1});
    start = b.cut_after;
  }
  shots.push_back({start, n_frames - 1});
  return shots;
}

}  // namespace textloc
