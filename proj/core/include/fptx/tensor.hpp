#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace fptx {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diag(const Vec& v);
  static Mat column(const Vec& v);
  static Mat from_columns(const std::vector<Vec>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vec col(std::size_t j) const;
  Vec row(std::size_t i) const;
  void set_col(std::size_t j, const Vec& v);
  // First t columns.
  Mat leading_cols(std::size_t t) const;

  Mat transpose() const;
  Mat abs() const;

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Exact (reference precision) linear algebra.
Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, const Vec& x);
Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
Vec abs(const Vec& a);
double dot(const Vec& a, const Vec& b);
Mat kron(const Mat& a, const Mat& b);

// Column-major vectorisation and its inverse.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, std::size_t rows, std::size_t cols);

enum class Norm { One, Two, Inf };

// Dual exponent: 1 <-> inf, 2 <-> 2.
Norm dual(Norm p);

double norm(const Vec& x, Norm p);
double norm1(const Vec& x);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
// min_i |x_i|
double min_abs(const Vec& x);
double frobenius(const Mat& m);
// Largest absolute entry, i.e. the (1, inf) induced norm.
double max_abs(const Mat& m);

// Induced norm sup ||M x||_q / ||x||_p. Supported: (1, q) for any q, (2, 2),
// (2, inf) and (inf, inf). Other pairs throw CapabilityError.
double induced_norm(const Mat& m, Norm p, Norm q);

struct SingularValueExtremes {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

// One-sided Jacobi; sigma_min is the smallest of the min(m, n) singular values.
SingularValueExtremes sv_extremes(const Mat& m, double tol = 1e-12);
std::vector<double> singular_values(const Mat& m, double tol = 1e-12);

// max_i |xhat_i - x_i| / |x_i| with 0/0 = 0 and a/0 = inf for a != 0.
double rel_dist_componentwise(const Vec& xhat, const Vec& x);
double rel_dist_componentwise(const Mat& xhat, const Mat& x);
// ||xhat - x||_p / ||x||_p; throws DegenerateInputError when x = 0.
double rel_dist_normwise(const Vec& xhat, const Vec& x, Norm p);
// max over columns of the l2 relative distance.
double rel_dist_columnwise(const Mat& xhat, const Mat& x);

}  // namespace fptx
