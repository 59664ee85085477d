#pragma once

// Logarithmic potential h, the quench scaling phi(alpha) = alpha^p, the smooth
// perturbations pi / pi_Gamma, and the double-obstacle complementarity helpers.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dqc {

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Derivatives of h are refused within this distance of +-1.
inline constexpr double kDerivativeGuard = 1e-14;

template <typename Scalar>
Scalar h(Scalar y) {
  using std::abs;
  using std::log;
  using std::log1p;
  if (abs(y) > Scalar(1)) throw DomainError("h: argument outside [-1, 1]");
  if (abs(y) == Scalar(1)) return Scalar(2) * log(Scalar(2));
  // (1-y) ln(1-y) + (1+y) ln(1+y), with log1p for accuracy near +-1
  return (Scalar(1) - y) * log1p(-y) + (Scalar(1) + y) * log1p(y);
}

template <typename Scalar>
Scalar h_prime(Scalar y) {
  using std::abs;
  using std::log1p;
  if (!(abs(y) < Scalar(1) - Scalar(kDerivativeGuard))) throw DomainError("h_prime: argument not strictly inside (-1, 1)");
  return log1p(y) - log1p(-y);
}

template <typename Scalar>
Scalar h_second(Scalar y) {
  using std::abs;
  if (!(abs(y) < Scalar(1) - Scalar(kDerivativeGuard))) throw DomainError("h_second: argument not strictly inside (-1, 1)");
  return Scalar(2) / ((Scalar(1) - y) * (Scalar(1) + y));
}

struct QuenchParams {
  double alpha = 1.0;
  double p_exponent = 1.0;

  QuenchParams() = default;
  QuenchParams(double a, double p) : alpha(a), p_exponent(p) {
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("QuenchParams: alpha must lie in (0, 1]");
    if (!(p > 0.0)) throw std::invalid_argument("QuenchParams: exponent must be positive");
  }

  double phi() const { return std::pow(alpha, p_exponent); }
};

/// (phi(alpha) h'(y), phi(alpha) h''(y))
template <typename Scalar>
std::pair<Scalar, Scalar> quench_term(Scalar y, const QuenchParams& q) {
  const Scalar phi = Scalar(q.phi());
  return {phi * h_prime(y), phi * h_second(y)};
}

/// Solves phi(alpha) h'(y) = v in closed form: y = tanh(v / (2 phi)).
inline double quench_inverse(double v, const QuenchParams& q) { return std::tanh(v / (2.0 * q.phi())); }

enum class ActiveBound : signed char { lower = -1, inactive = 0, upper = 1 };

struct Projection {
  double value;
  ActiveBound bound;
};

/// Clamp to [-1, 1]. Points exactly at +-1 count as active.
inline Projection obstacle_projection(double y) {
  if (y >= 1.0) return {1.0, ActiveBound::upper};
  if (y <= -1.0) return {-1.0, ActiveBound::lower};
  return {y, ActiveBound::inactive};
}

/// Polynomial on [-1, 1] given by ascending coefficients.
class SmoothPotential {
public:
  SmoothPotential() = default;
  explicit SmoothPotential(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  /// pi(y) = -y, the classical double-obstacle choice
  static SmoothPotential classical() { return SmoothPotential({0.0, -1.0}); }

  const std::vector<double>& coefficients() const { return coeffs_; }

  struct Value {
    double value;
    double derivative;
    bool clamped;  // y was outside [-1, 1] and got clamped before evaluation
  };

  Value eval(double y) const {
    bool clamped = false;
    if (y > 1.0) {
      y = 1.0;
      clamped = true;
    } else if (y < -1.0) {
      y = -1.0;
      clamped = true;
    }
    double v = 0.0, d = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
      d = d * y + v;
      v = v * y + coeffs_[k];
    }
    return {v, d, clamped};
  }

  double second_derivative(double y) const {
    double s = 0.0;
    for (std::size_t k = 2; k < coeffs_.size(); ++k) s += coeffs_[k] * double(k) * double(k - 1) * std::pow(y, double(k - 2));
    return s;
  }

private:
  std::vector<double> coeffs_;
};

}  // namespace dqc
