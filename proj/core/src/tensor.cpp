#include "fptx/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fptx/error.hpp"

namespace fptx {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw PreconditionError(std::string(what) + ": shape mismatch");
}

void require_same_length(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw PreconditionError(std::string(what) + ": length mismatch");
}

double ratio_with_conventions(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw PreconditionError("Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(const Vec& v) {
  Mat m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return m;
}

Mat Mat::column(const Vec& v) {
  Mat m(v.size(), 1);
  m.data_ = v;
  return m;
}

Mat Mat::from_columns(const std::vector<Vec>& cols) {
  if (cols.empty()) return {};
  Mat m(cols[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) m.set_col(j, cols[j]);
  return m;
}

Vec Mat::col(std::size_t j) const {
  Vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Vec Mat::row(std::size_t i) const {
  return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
             data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

void Mat::set_col(std::size_t j, const Vec& v) {
  if (v.size() != rows_) throw PreconditionError("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Mat Mat::leading_cols(std::size_t t) const {
  Mat m(rows_, t);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < t; ++j) m(i, j) = (*this)(i, j);
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat Mat::abs() const {
  Mat m = *this;
  for (auto& x : m.data_) x = std::fabs(x);
  return m;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw PreconditionError("matmul: inner dimension mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols() != x.size()) throw PreconditionError("matvec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Mat add(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "add");
  Mat c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Mat sub(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "sub");
  Mat c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Mat scale(const Mat& a, double s) {
  Mat c = a;
  for (auto& x : c.data()) x *= s;
  return c;
}

Vec add(const Vec& a, const Vec& b) {
  require_same_length(a, b, "add");
  Vec c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Vec sub(const Vec& a, const Vec& b) {
  require_same_length(a, b, "sub");
  Vec c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Vec scale(const Vec& a, double s) {
  Vec c = a;
  for (auto& x : c) x *= s;
  return c;
}

Vec abs(const Vec& a) {
  Vec c = a;
  for (auto& x : c) x = std::fabs(x);
  return c;
}

double dot(const Vec& a, const Vec& b) {
  require_same_length(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return k;
}

Vec vec(const Mat& m) {
  Vec v(m.size());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) v[j * m.rows() + i] = m(i, j);
  return v;
}

Mat unvec(const Vec& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw PreconditionError("unvec: size mismatch");
  Mat m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
  return m;
}

Norm dual(Norm p) {
  switch (p) {
    case Norm::One:
      return Norm::Inf;
    case Norm::Inf:
      return Norm::One;
    case Norm::Two:
      return Norm::Two;
  }
  return Norm::Two;
}

double norm1(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

double norm2(const Vec& x) {
  // Scaled to avoid overflow for large entries.
  double m = norm_inf(x);
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) {
    const double r = v / m;
    s += r * r;
  }
  return m * std::sqrt(s);
}

double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

double norm(const Vec& x, Norm p) {
  switch (p) {
    case Norm::One:
      return norm1(x);
    case Norm::Two:
      return norm2(x);
    case Norm::Inf:
      return norm_inf(x);
  }
  return norm2(x);
}

double min_abs(const Vec& x) {
  if (x.empty()) throw PreconditionError("min_abs: empty vector");
  double m = std::numeric_limits<double>::infinity();
  for (double v : x) m = std::min(m, std::fabs(v));
  return m;
}

double frobenius(const Mat& m) { return norm2(m.data()); }

double max_abs(const Mat& m) { return norm_inf(m.data()); }

double induced_norm(const Mat& m, Norm p, Norm q) {
  if (p == Norm::One) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, norm(m.col(j), q));
    return best;
  }
  if (p == Norm::Two && q == Norm::Two) return sv_extremes(m).sigma_max;
  // ||M||_{p,q} = ||M^T||_{q*,p*}; covers (inf, inf) and (2, inf).
  if (q == Norm::Inf) return induced_norm(m.transpose(), Norm::One, dual(p));
  throw CapabilityError("induced norm for this (p, q) pair is not supported");
}

std::vector<double> singular_values(const Mat& m, double tol) {
  // One-sided Jacobi on the columns of a tall matrix.
  Mat a = m.rows() >= m.cols() ? m : m.transpose();
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();
  if (n == 0) return {};
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gam = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gam += a(i, p) * a(i, q);
        }
        if (gam == 0.0 || std::fabs(gam) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gam);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double ap = a(i, p);
          const double aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(a.col(j));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

SingularValueExtremes sv_extremes(const Mat& m, double tol) {
  if (m.empty()) throw PreconditionError("sv_extremes: empty matrix");
  auto sv = singular_values(m, tol);
  return {sv.front(), sv.back()};
}

double rel_dist_componentwise(const Vec& xhat, const Vec& x) {
  require_same_length(xhat, x, "rel_dist_componentwise");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, ratio_with_conventions(std::fabs(xhat[i] - x[i]), std::fabs(x[i])));
  return worst;
}

double rel_dist_componentwise(const Mat& xhat, const Mat& x) {
  require_same_shape(xhat, x, "rel_dist_componentwise");
  return rel_dist_componentwise(xhat.data(), x.data());
}

double rel_dist_normwise(const Vec& xhat, const Vec& x, Norm p) {
  require_same_length(xhat, x, "rel_dist_normwise");
  const double den = norm(x, p);
  if (den == 0.0) throw DegenerateInputError("rel_dist_normwise: reference is zero");
  return norm(sub(xhat, x), p) / den;
}

double rel_dist_columnwise(const Mat& xhat, const Mat& x) {
  require_same_shape(xhat, x, "rel_dist_columnwise");
  double worst = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const Vec c = x.col(j);
    worst = std::max(worst, ratio_with_conventions(norm2(sub(xhat.col(j), c)), norm2(c)));
  }
  return worst;
}

}  // namespace fptx
