#pragma once

// Exact Gaussian-rational scalar, usable as an Eigen scalar for incidence
// checks that must hold with zero tolerance.

#include <complex>
#include <ostream>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Core>

namespace qreduce {

using Rational = boost::multiprecision::cpp_rational;

class GaussianRational {
 public:
  GaussianRational() = default;
  GaussianRational(int re) : re_(re) {}  // NOLINT: implicit on purpose
  GaussianRational(Rational re, Rational im = 0) : re_(std::move(re)), im_(std::move(im)) {}

  /// Real fraction p/q.
  static GaussianRational fraction(long long p, long long q) {
    return GaussianRational(Rational(p) / q);
  }

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }

  bool is_zero() const { return re_ == 0 && im_ == 0; }

  GaussianRational& operator+=(const GaussianRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    Rational r = re_ * o.re_ - im_ * o.im_;
    im_ = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) {
    const Rational d = o.re_ * o.re_ + o.im_ * o.im_;
    if (d == 0) throw std::domain_error("GaussianRational: division by zero");
    Rational r = (re_ * o.re_ + im_ * o.im_) / d;
    im_ = (im_ * o.re_ - re_ * o.im_) / d;
    re_ = std::move(r);
    return *this;
  }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const GaussianRational& z) {
    os << z.re_;
    if (z.im_ != 0) os << (z.im_ > 0 ? "+" : "-") << abs(z.im_) << "i";
    return os;
  }

  std::complex<double> to_complex() const {
    return {static_cast<double>(re_), static_cast<double>(im_)};
  }

 private:
  Rational re_{0};
  Rational im_{0};
};

inline GaussianRational conjugate(const GaussianRational& z) { return {z.real(), -z.imag()}; }
inline Rational squared_modulus(const GaussianRational& z) {
  return z.real() * z.real() + z.imag() * z.imag();
}

// Scalar-generic helpers so templated geometry code works for double,
// std::complex<double> and GaussianRational alike.
template <typename T>
std::complex<T> conjugate(const std::complex<T>& z) { return std::conj(z); }
inline double conjugate(double x) { return x; }

template <typename T>
T squared_modulus(const std::complex<T>& z) { return std::norm(z); }
inline double squared_modulus(double x) { return x * x; }

inline bool is_zero(const GaussianRational& z) { return z.is_zero(); }
template <typename T>
bool is_zero(const std::complex<T>& z) { return z == std::complex<T>{}; }

template <int Rows>
using ExactVector = Eigen::Matrix<GaussianRational, Rows, 1>;

}  // namespace qreduce

namespace Eigen {

template <>
struct NumTraits<qreduce::GaussianRational> : GenericNumTraits<qreduce::GaussianRational> {
  using Real = qreduce::GaussianRational;
  using NonInteger = qreduce::GaussianRational;
  using Nested = qreduce::GaussianRational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 40,
    MulCost = 120
  };
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
