#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cgn {

// Dense row-major matrix of doubles. Problem sizes here are tiny
// (n <= 19, m <= 30, cluster width a few hundred), so there is no blocking,
// no views, no expression machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    std::vector<double> col(std::size_t j) const;
    void set_col(std::size_t j, std::span<const double> v);

    Matrix transposed() const;
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

} // namespace cgn
