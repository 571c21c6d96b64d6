#include "rsmt/core_math.hpp"

#include <cmath>

#include "rsmt/errors.hpp"

namespace rsmt {

double Angle2D::wrap(double t) {
  t = std::fmod(t, 2.0 * M_PI);
  if (t > M_PI) t -= 2.0 * M_PI;
  if (t <= -M_PI) t += 2.0 * M_PI;
  return t;
}

Mat3 rot6d_to_matrix(const Rot6D& r) {
  Vec3 f = r.forward();
  Vec3 u = r.up();
  double fn = f.norm();
  if (fn < 1e-12) throw DegenerateRotation("zero forward vector");
  f /= fn;
  u -= u.dot(f) * f;
  double un = u.norm();
  if (un < 1e-12) throw DegenerateRotation("up vector parallel to forward");
  u /= un;
  Mat3 m;
  m.col(0) = f;
  m.col(1) = u;
  m.col(2) = f.cross(u);
  return m;
}

Rot6D matrix_to_rot6d(const Mat3& m) {
  Mat3 mtm = m.transpose() * m;
  if ((mtm - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-5 ||
      m.determinant() < 0.0) {
    throw InvalidRotation("matrix is not orthonormal / right-handed");
  }
  return Rot6D(m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1));
}

void forward_kinematics_full(const std::vector<int>& parents,
                             const std::vector<Vec3>& offsets,
                             const Vec3& root_position,
                             const std::vector<Mat3>& local_rotations,
                             std::vector<Vec3>& positions,
                             std::vector<Mat3>& rotations) {
  size_t n = parents.size();
  if (offsets.size() != n || local_rotations.size() != n) {
    throw SkeletonMismatch("parents/offsets/rotations counts differ: " +
                           std::to_string(n) + "/" + std::to_string(offsets.size()) +
                           "/" + std::to_string(local_rotations.size()));
  }
  positions.resize(n);
  rotations.resize(n);
  for (size_t j = 0; j < n; ++j) {
    int p = parents[j];
    if (p < 0) {
      positions[j] = root_position;
      rotations[j] = local_rotations[j];
    } else {
      positions[j] = positions[p] + rotations[p] * offsets[j];
      rotations[j] = rotations[p] * local_rotations[j];
    }
  }
}

std::vector<Vec3> forward_kinematics(const std::vector<int>& parents,
                                     const std::vector<Vec3>& offsets,
                                     const Vec3& root_position,
                                     const std::vector<Mat3>& local_rotations) {
  std::vector<Vec3> positions;
  std::vector<Mat3> rotations;
  forward_kinematics_full(parents, offsets, root_position, local_rotations,
                          positions, rotations);
  return positions;
}

std::vector<std::complex<double>> dft(const std::vector<double>& signal) {
  size_t n = signal.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      double a = -2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(n);
      acc += signal[t] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> fft_padded(const std::vector<double>& signal) {
  size_t n = 1;
  while (n < signal.size()) n <<= 1;
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];

  // bit reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  return a;
}

std::vector<double> power_spectrum(const std::vector<double>& signal) {
  if (signal.size() < 2) {
    throw SignalTooShort("need at least 2 samples, got " +
                         std::to_string(signal.size()));
  }
  auto coeffs = dft(signal);
  size_t half = signal.size() / 2;
  std::vector<double> power(half + 1);
  for (size_t j = 0; j <= half; ++j) power[j] = std::norm(coeffs[j]);
  return power;
}

double contact_weight(double foot_speed) {
  if (foot_speed < 0.0) {
    throw InvalidSpeed("negative foot speed " + std::to_string(foot_speed));
  }
  if (foot_speed <= 0.5) return 1.0;
  if (foot_speed >= 1.0) return 0.0;
  double t = 2.0 * (foot_speed - 0.5);
  return 2.0 * t * t * t - 3.0 * t * t + 1.0;
}

Angle2D slerp_angle(Angle2D a, Angle2D b, double w) {
  double diff = Angle2D::wrap(b.theta - a.theta);
  // wrap() maps the antipodal case to +pi, which is the documented tie rule
  return Angle2D(a.theta + w * diff);
}

Eigen::Vector2d rotate2d(const Eigen::Vector2d& p, Angle2D theta) {
  double c = std::cos(theta.theta);
  double s = std::sin(theta.theta);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

}  // namespace rsmt
