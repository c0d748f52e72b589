#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace leray {

using cd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

// thrown when a point leaves the chart or a determinant degenerates
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A complex number written through its real and imaginary parts, where the
// parts themselves may be complexified (T = complex<double>) for complex-step
// differentiation in the real coordinates.
template <class T>
struct Cx {
    T re{}, im{};
    Cx() = default;
    Cx(T r, T i) : re(r), im(i) {}
    explicit Cx(T r) : re(r), im(T(0)) {}
};

template <class T> Cx<T> operator+(Cx<T> a, Cx<T> b) { return {a.re + b.re, a.im + b.im}; }
template <class T> Cx<T> operator-(Cx<T> a, Cx<T> b) { return {a.re - b.re, a.im - b.im}; }
template <class T> Cx<T> operator-(Cx<T> a) { return {-a.re, -a.im}; }
template <class T> Cx<T> operator*(Cx<T> a, Cx<T> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cx<T> operator*(double s, Cx<T> a) { return {s * a.re, s * a.im}; }
template <class T> Cx<T> operator/(Cx<T> a, Cx<T> b) {
    T d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
template <class T> Cx<T> conj(Cx<T> a) { return {a.re, -a.im}; }
template <class T> T abs2(Cx<T> a) { return a.re * a.re + a.im * a.im; }

template <class T> Cx<T> from_cd(cd c) { return {T(c.real()), T(c.imag())}; }

// affine point packed as real coordinates (x1, y1, ..., xn, yn)
inline VecR to_real(const VecC& z) {
    VecR u(2 * z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        u(2 * j) = z(j).real();
        u(2 * j + 1) = z(j).imag();
    }
    return u;
}

inline VecC from_real(const VecR& u) {
    VecC z(u.size() / 2);
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = cd(u(2 * j), u(2 * j + 1));
    return z;
}

}  // namespace leray
