#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace rsmt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// First two columns (forward and up) of a 3x3 rotation matrix, concatenated.
struct Rot6D {
  double v[6] = {1, 0, 0, 0, 1, 0};

  Rot6D() = default;
  Rot6D(double fx, double fy, double fz, double ux, double uy, double uz)
      : v{fx, fy, fz, ux, uy, uz} {}

  Vec3 forward() const { return Vec3(v[0], v[1], v[2]); }
  Vec3 up() const { return Vec3(v[3], v[4], v[5]); }

  static Rot6D identity() { return Rot6D(); }
};

// Angle in radians kept in (-pi, pi] under all arithmetic.
struct Angle2D {
  double theta = 0.0;

  Angle2D() = default;
  explicit Angle2D(double t) : theta(wrap(t)) {}

  static double wrap(double t);
};

// Gram-Schmidt decode: normalize forward, orthogonalize up, cross for the
// third axis. Throws DegenerateRotation on zero or parallel input vectors.
Mat3 rot6d_to_matrix(const Rot6D& r);

// Inverse of rot6d_to_matrix; input must be orthonormal within 1e-5.
Rot6D matrix_to_rot6d(const Mat3& m);

// Global joint positions from per-joint local rotations. Parents must precede
// children; parent[0] == -1 designates the root.
std::vector<Vec3> forward_kinematics(const std::vector<int>& parents,
                                     const std::vector<Vec3>& offsets,
                                     const Vec3& root_position,
                                     const std::vector<Mat3>& local_rotations);

// Same traversal but also returns global rotations.
void forward_kinematics_full(const std::vector<int>& parents,
                             const std::vector<Vec3>& offsets,
                             const Vec3& root_position,
                             const std::vector<Mat3>& local_rotations,
                             std::vector<Vec3>& positions,
                             std::vector<Mat3>& rotations);

// |DFT(signal)[j]|^2 for j in 0..n/2. Uses an exact-length O(n^2) transform;
// bit-stable for metrics regardless of length.
std::vector<double> power_spectrum(const std::vector<double>& signal);

// Full complex DFT via iterative radix-2 FFT with zero padding to the next
// power of two. Fast path for training-time spectral fits.
std::vector<std::complex<double>> fft_padded(const std::vector<double>& signal);

// Exact-length naive DFT (the oracle path and the NPSS path).
std::vector<std::complex<double>> dft(const std::vector<double>& signal);

// Ground-contact probability from foot speed: 1 below 0.5, 0 above 1.0,
// cubic smoothstep 2t^3-3t^2+1 with t = 2(f_v-0.5) in between.
double contact_weight(double foot_speed);

// Shorter-arc interpolation between two angles. The antipodal tie (difference
// of exactly pi) is broken toward the positive direction from a.
Angle2D slerp_angle(Angle2D a, Angle2D b, double w);

// Counterclockwise rotation of a 2-vector.
Eigen::Vector2d rotate2d(const Eigen::Vector2d& p, Angle2D theta);

}  // namespace rsmt
