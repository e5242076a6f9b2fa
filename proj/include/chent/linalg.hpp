#pragma once

// Dense complex linear algebra for small (<= 64) dimensions.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace chent {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

/// Row-major dense complex matrix. Always at least 1x1.
class ComplexMatrix {
 public:
  ComplexMatrix() : ComplexMatrix(1, 1) {}
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;
  ComplexVector column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const Complex> values);

  Complex trace() const;
  double max_abs() const;
  double frobenius_norm() const;
  /// max |A - A^dagger| elementwise <= tol.
  bool is_hermitian(double tol = 1e-10) const;
  /// (A + A^dagger) / 2
  ComplexMatrix hermitian_part() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  std::vector<Complex> data_;
};

ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> v);

/// max-abs distance between two equally shaped matrices.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kron(std::span<const Complex> a, std::span<const Complex> b);

/// |u><v|
ComplexMatrix outer(std::span<const Complex> u, std::span<const Complex> v);
Complex inner(std::span<const Complex> u, std::span<const Complex> v);  // <u|v>
double norm(std::span<const Complex> v);

struct EigenSystem {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns are eigenvectors
};

/// Cyclic Jacobi eigensolver for Hermitian matrices.
/// Throws NotHermitian / NoConvergence.
EigenSystem eig_hermitian(const ComplexMatrix& a);

/// V f(lambda) V^dagger for Hermitian A.
template <class F>
ComplexMatrix hermitian_function(const EigenSystem& es, F&& f) {
  const std::size_t n = es.values.size();
  ComplexMatrix out(n, n);
  std::vector<double> fv(n);
  for (std::size_t k = 0; k < n; ++k) fv[k] = f(es.values[k]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += es.vectors(i, k) * fv[k] * std::conj(es.vectors(j, k));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Base-2 logarithm of a PSD matrix, eigenvalues clamped below at eps.
/// Throws NotPSD if an eigenvalue is below -1e-10.
ComplexMatrix matrix_log2_psd(const ComplexMatrix& a, double eps = 1e-12);

/// Square root of a PSD matrix (negative rounding noise clamped to zero).
ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& a);

/// Modified Gram-Schmidt on the columns of `a`. Returns a matrix with
/// orthonormal columns spanning the same flag of subspaces (QR's Q with a
/// positive-diagonal R). Degenerate columns are completed from the basis.
ComplexMatrix orthonormalize_columns(const ComplexMatrix& a);

/// Haar-distributed isometry (rows >= cols) from a Gaussian matrix.
ComplexMatrix random_isometry(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
inline ComplexMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  return random_isometry(n, n, rng);
}
ComplexVector random_unit_vector(std::size_t n, std::mt19937_64& rng);

}  // namespace chent
