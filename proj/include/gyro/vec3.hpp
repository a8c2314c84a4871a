#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace gyro {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline bool finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Row-major 3x3 matrix, just enough linear algebra for the stepping kernels.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }
  static Mat3 zero() { return Mat3{}; }

  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (double& v : a) v *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
          m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
          m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      c(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return c;
}

inline Mat3 transpose(const Mat3& m) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = m(j, i);
  return t;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i] * b[j];
  return m;
}

inline double max_abs(const Mat3& m) {
  double r = 0.0;
  for (double v : m.a) r = std::max(r, std::abs(v));
  return r;
}

// LU factorization of a 3x3 with partial pivoting, for the per-step implicit solve.
struct Lu3 {
  Mat3 lu;
  std::array<int, 3> piv{};

  explicit Lu3(Mat3 m) {
    for (int k = 0; k < 3; ++k) {
      int p = k;
      for (int i = k + 1; i < 3; ++i)
        if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
      piv[k] = p;
      if (p != k)
        for (int j = 0; j < 3; ++j) std::swap(m(k, j), m(p, j));
      if (m(k, k) == 0.0) throw std::runtime_error("Lu3: singular matrix");
      for (int i = k + 1; i < 3; ++i) {
        m(i, k) /= m(k, k);
        for (int j = k + 1; j < 3; ++j) m(i, j) -= m(i, k) * m(k, j);
      }
    }
    lu = m;
  }

  // multiplier rows are swapped along with the pivoted rows in the
  // factorization, so all permutations must hit b before the substitutions
  Vec3 solve(Vec3 b) const {
    for (int k = 0; k < 3; ++k)
      if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (int k = 0; k < 3; ++k)
      for (int i = k + 1; i < 3; ++i) b[i] -= lu(i, k) * b[k];
    for (int k = 2; k >= 0; --k) {
      for (int j = k + 1; j < 3; ++j) b[k] -= lu(k, j) * b[j];
      b[k] /= lu(k, k);
    }
    return b;
  }
};

inline Vec3 solve3(const Mat3& m, const Vec3& b) { return Lu3(m).solve(b); }

}  // namespace gyro
